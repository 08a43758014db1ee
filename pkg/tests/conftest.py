import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make oracles importable

from cardiokit.datasets import Dataset, clean, encode, load_csv, synth_bhdc
from cardiokit.schema import load_schema

REPO_ROOT = Path(__file__).resolve().parents[1]
DATA_DIR = REPO_ROOT / "data"


@pytest.fixture(scope="session")
def uci_schema():
    return load_schema("uci")


@pytest.fixture(scope="session")
def bhdc_schema():
    return load_schema("bhdc")


@pytest.fixture(scope="session")
def bhdc_synth():
    return synth_bhdc(563, seed=42)


@pytest.fixture(scope="session")
def cleveland(uci_schema):
    raw = load_csv(DATA_DIR / "cleveland.csv", uci_schema, name="cleveland")
    return encode(clean(raw))


def toy_dataset(rows, labels, kinds=None, name="toy") -> Dataset:
    return Dataset.from_arrays(name, rows, labels, kinds=kinds)


@pytest.fixture
def xor_dataset():
    return toy_dataset(
        [[0, 0], [0, 1], [1, 0], [1, 1]],
        [0, 1, 1, 0],
        kinds=["categorical", "categorical"],
        name="xor",
    )
