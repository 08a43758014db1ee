"""Model persistence: a versioned, self-describing JSON document.

The document carries the variant, hyperparameters, feature set, a fingerprint
of the schema the model was trained under, the parameter payload, and the
attribute ranking computed at training time (served as feature importance).
Loading against a schema whose fingerprint differs is an error.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .classifiers import Hyperparams, TrainedModel
from .errors import ModelFormatError
from .schema import Schema
from .selection import FeatureSet, FScore

MODEL_FORMAT = "cardiokit/model/v1"


def _to_jsonable(value):
    if isinstance(value, np.ndarray):
        return {"__array__": value.tolist()}
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, dict):
        return {_key_to_str(k): _to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_to_jsonable(v) for v in value]
    return value


def _key_to_str(key) -> str:
    if isinstance(key, float):
        return repr(key)
    return str(key)


def _from_jsonable(value):
    if isinstance(value, dict):
        if set(value.keys()) == {"__array__"}:
            return np.asarray(value["__array__"], dtype=np.float64)
        return {_key_from_str(k): _from_jsonable(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_from_jsonable(v) for v in value]
    return value


def _key_from_str(key: str):
    try:
        return float(key) if "." in key or key in ("inf", "-inf") else key
    except ValueError:
        return key


def model_document(
    model: TrainedModel,
    schema: Schema,
    ranking: list[FScore] | None = None,
    dataset_name: str = "",
    seed: int | None = None,
) -> dict:
    return {
        "format": MODEL_FORMAT,
        "variant": model.variant,
        "hyperparams": model.hyperparams.to_dict(),
        "feature_set": {
            "indices": list(model.feature_set.indices),
            "provenance": model.feature_set.provenance,
            "top_n": model.feature_set.top_n,
            "schema_name": model.feature_set.schema_name,
        },
        "schema_name": schema.name,
        "schema_fingerprint": schema.fingerprint(),
        "dataset_name": dataset_name,
        "seed": seed,
        "ranking": [
            {
                "attribute_index": s.attribute_index,
                "name": schema.attribute(s.attribute_index).name,
                "s2_between": s.s2_between,
                "s2_within": s.s2_within,
                "f": "inf" if s.f == float("inf") else s.f,
            }
            for s in (ranking or [])
        ],
        "payload": _to_jsonable(model.payload),
    }


def save_model(
    model: TrainedModel,
    path: str | Path,
    schema: Schema,
    ranking: list[FScore] | None = None,
    dataset_name: str = "",
    seed: int | None = None,
) -> None:
    doc = model_document(model, schema, ranking, dataset_name, seed)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", "utf-8")


def model_id_of(path: str | Path) -> str:
    digest = hashlib.sha256(Path(path).read_bytes()).hexdigest()
    return digest[:12]


def load_model(path: str | Path, schema: Schema | None = None) -> tuple[TrainedModel, dict]:
    """Read a persisted model; verify the schema fingerprint when one is given.

    Returns the model plus the raw document (ranking, names, provenance).
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text("utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"cannot read model document {path}: {exc}") from exc
    if doc.get("format") != MODEL_FORMAT:
        raise ModelFormatError(f"unsupported model format {doc.get('format')!r}")
    if schema is not None and doc.get("schema_fingerprint") != schema.fingerprint():
        raise ModelFormatError(
            f"model {path.name} was trained under schema "
            f"{doc.get('schema_name')!r} with a different fingerprint; refusing to load"
        )
    fs_doc = doc["feature_set"]
    feature_set = FeatureSet(
        indices=tuple(fs_doc["indices"]),
        provenance=fs_doc["provenance"],
        top_n=fs_doc.get("top_n"),
        schema_name=fs_doc.get("schema_name"),
    )
    model = TrainedModel(
        variant=doc["variant"],
        feature_set=feature_set,
        hyperparams=Hyperparams.from_dict(doc["hyperparams"]),
        payload=_from_jsonable(doc["payload"]),
    )
    return model, doc
