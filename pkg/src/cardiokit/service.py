"""HTTP prediction service over a persisted model.

Endpoints:
    GET  /health      -> status and model id
    GET  /schema      -> attribute schema document plus the model's feature set
    POST /predict     -> label, score, feature importance, what-if results
    GET  /importance  -> the attribute ranking stored with the model

The loaded model is immutable shared state: requests never mutate it, and
identical requests always produce identical responses. All codes cross the
wire numerically; attribute meanings live in the /schema document so clients
can render forms without hardcoding anything.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .classifiers import predict_batch
from .errors import CardiokitError
from .persistence import load_model, model_id_of
from .schema import CATEGORICAL, Schema, load_schema


class WhatIfOverride(BaseModel):
    attribute_index: int
    code: float


class PredictionRequest(BaseModel):
    schema_name: str | None = None
    attributes: dict[int, float]
    what_if: list[WhatIfOverride] = Field(default_factory=list)


class FeatureImportance(BaseModel):
    attribute_index: int
    name: str
    f: float | None  # None encodes an infinite score


class WhatIfResult(BaseModel):
    override: WhatIfOverride
    label: int
    score: float


class PredictionResponse(BaseModel):
    label: int
    score: float
    model_id: str
    feature_importance: list[FeatureImportance]
    what_if_results: list[WhatIfResult] = Field(default_factory=list)


class HealthResponse(BaseModel):
    status: str
    model_id: str
    variant: str


def _importance_entries(doc: dict, indices: tuple[int, ...]) -> list[FeatureImportance]:
    by_index = {entry["attribute_index"]: entry for entry in doc.get("ranking", [])}
    out = []
    for idx in indices:
        entry = by_index.get(idx)
        if entry is None:
            continue
        f = entry["f"]
        out.append(
            FeatureImportance(
                attribute_index=idx,
                name=entry.get("name", str(idx)),
                f=None if f == "inf" else float(f),
            )
        )
    return out


def _validate_and_vectorize(
    attributes: dict[int, float], schema: Schema, indices: tuple[int, ...]
) -> np.ndarray:
    values = []
    for idx in indices:
        attr = schema.attribute(idx)
        if idx not in attributes:
            raise HTTPException(
                status_code=400,
                detail=f"missing attribute {idx} ({attr.name})",
            )
        value = float(attributes[idx])
        if attr.kind == CATEGORICAL and not attr.is_label:
            if value != int(value) or int(value) not in attr.codes:
                raise HTTPException(
                    status_code=400,
                    detail=(
                        f"attribute {idx} ({attr.name}): code {value!r} is not one of "
                        f"{sorted(attr.codes)}"
                    ),
                )
        values.append(value)
    return np.asarray(values, dtype=np.float64).reshape(1, -1)


def create_app(
    model_path: str | Path,
    schema_path: str | Path | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    """Build the service around one persisted model.

    The schema is resolved from the model document's schema name unless an
    explicit path is given; a fingerprint mismatch refuses to start. When a
    built questionnaire bundle exists it is mounted at /ui.
    """
    model_path = Path(model_path)
    model, doc = load_model(model_path)
    schema = load_schema(schema_path if schema_path is not None else doc["schema_name"])
    if doc.get("schema_fingerprint") != schema.fingerprint():
        raise CardiokitError(
            f"model {model_path.name} does not match schema {schema.name!r} "
            "(fingerprint mismatch)"
        )
    model_id = model_id_of(model_path)
    importance = _importance_entries(doc, model.feature_set.indices)

    app = FastAPI(title="cardiokit prediction service", version=doc.get("format", ""))
    app.state.model = model
    app.state.schema = schema
    app.state.model_id = model_id

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", model_id=model_id, variant=model.variant)

    @app.get("/schema")
    def schema_document() -> dict:
        return {
            "schema": schema.to_document(),
            "model": {
                "id": model_id,
                "variant": model.variant,
                "feature_set": {
                    "indices": list(model.feature_set.indices),
                    "provenance": model.feature_set.provenance,
                },
            },
            "request": {
                "endpoint": "/predict",
                "fields": {
                    "attributes": "map of attribute index to numeric code; must cover feature_set.indices",
                    "what_if": "optional list of {attribute_index, code} overrides, evaluated one at a time",
                },
            },
        }

    @app.get("/importance")
    def importance_ranking() -> dict:
        return {"model_id": model_id, "ranking": doc.get("ranking", [])}

    @app.post("/predict", response_model=PredictionResponse)
    def predict_endpoint(request: PredictionRequest) -> PredictionResponse:
        if request.schema_name is not None and request.schema_name != schema.name:
            raise HTTPException(
                status_code=400,
                detail=f"model is bound to schema {schema.name!r}, not {request.schema_name!r}",
            )
        x = _validate_and_vectorize(request.attributes, schema, model.feature_set.indices)
        labels, scores = predict_batch(model, x)
        what_if_results = []
        for override in request.what_if:
            if override.attribute_index not in model.feature_set.indices:
                attr_name = (
                    schema.attribute(override.attribute_index).name
                    if any(a.index == override.attribute_index for a in schema.attributes)
                    else "unknown"
                )
                raise HTTPException(
                    status_code=400,
                    detail=(
                        f"what-if attribute {override.attribute_index} ({attr_name}) "
                        "is not part of the model's feature set"
                    ),
                )
            scenario = dict(request.attributes)
            scenario[override.attribute_index] = override.code
            sx = _validate_and_vectorize(scenario, schema, model.feature_set.indices)
            s_labels, s_scores = predict_batch(model, sx)
            what_if_results.append(
                WhatIfResult(override=override, label=int(s_labels[0]), score=float(s_scores[0]))
            )
        return PredictionResponse(
            label=int(labels[0]),
            score=float(scores[0]),
            model_id=model_id,
            feature_importance=importance,
            what_if_results=what_if_results,
        )

    bundle = Path(ui_dir) if ui_dir else Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if bundle.is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(bundle), html=True), name="ui")

    return app


def serve(
    model_path: str | Path,
    host: str = "127.0.0.1",
    port: int = 8000,
    schema_path: str | Path | None = None,
    ui_dir: str | Path | None = None,
) -> None:
    """Run the service until interrupted."""
    import uvicorn

    app = create_app(model_path, schema_path, ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")
