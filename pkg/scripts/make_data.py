#!/usr/bin/env python3
"""Regenerate the shipped datasets under data/.

All five files are deterministic stand-ins: the questionnaire collection is
private and the benchmark files are not fetchable from the build environment,
so schema-valid synthetic tables with the published row counts are generated
instead (see README.md, "Data"). Loaders accept the real files unchanged.
"""

from pathlib import Path

from cardiokit.datasets import UCI_DATASET_PARAMS, dump_encoded_csv, synth_bhdc, synth_uci, write_raw_csv

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "data"
SEED = 42


def main() -> None:
    DATA.mkdir(exist_ok=True)
    bhdc = synth_bhdc(563, seed=SEED)
    (DATA / "bhdc.csv").write_text(dump_encoded_csv(bhdc, include_header=False), "utf-8")
    print(f"bhdc.csv: {bhdc.n_rows} rows")
    for name in UCI_DATASET_PARAMS:
        records = synth_uci(name, seed=SEED)
        write_raw_csv(records, DATA / f"{name}.csv")
        print(f"{name}.csv: {len(records)} rows")


if __name__ == "__main__":
    main()
