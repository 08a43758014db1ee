import numpy as np
import pytest
from fastapi.testclient import TestClient

from cardiokit.classifiers import Hyperparams, fit, predict
from cardiokit.datasets import synth_bhdc
from cardiokit.errors import CardiokitError
from cardiokit.persistence import save_model
from cardiokit.schema import load_schema
from cardiokit.selection import expert_features, project, rank
from cardiokit.service import create_app


@pytest.fixture(scope="module")
def served(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("service")
    d = synth_bhdc(200, seed=13)
    schema = load_schema("bhdc")
    fs = expert_features(schema)
    model = fit(project(d, fs), Hyperparams(variant="LR"), feature_set=fs)
    path = tmp / "model.json"
    save_model(model, path, schema, ranking=rank(d), dataset_name=d.name, seed=13)
    app = create_app(path)
    return TestClient(app), model, schema, fs


BASE_ATTRIBUTES = {"1": 2, "2": 0, "3": 1, "7": 1, "8": 1, "9": 0, "10": 1, "14": 1}


def test_health(served):
    client, model, _, _ = served
    response = client.get("/health")
    assert response.status_code == 200
    body = response.json()
    assert body["status"] == "ok"
    assert body["variant"] == "LR"
    assert len(body["model_id"]) == 12


def test_schema_document_drives_forms(served):
    client, _, schema, fs = served
    body = client.get("/schema").json()
    assert body["schema"]["name"] == "bhdc"
    assert body["model"]["feature_set"]["indices"] == list(fs.indices)
    by_index = {a["index"]: a for a in body["schema"]["attributes"]}
    chest = by_index[9]
    assert [c["meaning"] for c in chest["categories"]] == [
        "Typical angina", "Atypical angina", "Non-cardiac chest pain", "No chest pain",
    ]
    assert len(by_index[1]["categories"]) == 4  # four age ranges


def test_predict_happy_path(served):
    client, model, _, _ = served
    response = client.post("/predict", json={"attributes": BASE_ATTRIBUTES})
    assert response.status_code == 200
    body = response.json()
    assert body["label"] in (0, 1)
    assert 0.0 <= body["score"] <= 1.0
    assert body["what_if_results"] == []
    importance = {e["attribute_index"] for e in body["feature_importance"]}
    assert importance == {1, 2, 3, 7, 8, 9, 10, 14}


def test_predict_matches_offline_exactly(served):
    client, model, _, fs = served
    body = client.post("/predict", json={"attributes": BASE_ATTRIBUTES}).json()
    x = [float(BASE_ATTRIBUTES[str(i)]) for i in fs.indices]
    label, score = predict(model, x)
    assert body["label"] == label
    assert body["score"] == score  # bit-identical, not approximately equal


def test_missing_attribute_names_it(served):
    client, _, _, _ = served
    attrs = dict(BASE_ATTRIBUTES)
    del attrs["14"]
    response = client.post("/predict", json={"attributes": attrs})
    assert response.status_code == 400
    assert "family history" in response.json()["detail"]


def test_invalid_code_rejected(served):
    client, _, _, _ = served
    attrs = dict(BASE_ATTRIBUTES, **{"9": 9})
    response = client.post("/predict", json={"attributes": attrs})
    assert response.status_code == 400
    assert "chest pain" in response.json()["detail"]


def test_malformed_body_is_4xx(served):
    client, _, _, _ = served
    response = client.post("/predict", json={"attributes": "nope"})
    assert 400 <= response.status_code < 500


def test_what_if_deltas_equal_offline_differences(served):
    client, model, _, fs = served
    request = {
        "attributes": BASE_ATTRIBUTES,
        "what_if": [
            {"attribute_index": 3, "code": 0},
            {"attribute_index": 7, "code": 0},
        ],
    }
    body = client.post("/predict", json=request).json()
    assert len(body["what_if_results"]) == 2
    base = [float(BASE_ATTRIBUTES[str(i)]) for i in fs.indices]
    _, base_score = predict(model, base)
    assert body["score"] == base_score
    for result in body["what_if_results"]:
        override = result["override"]
        scenario = list(base)
        scenario[fs.indices.index(override["attribute_index"])] = override["code"]
        label, score = predict(model, scenario)
        assert result["label"] == label
        assert result["score"] == score
        delta_served = result["score"] - body["score"]
        assert delta_served == score - base_score


def test_what_if_outside_feature_set_rejected(served):
    client, _, _, _ = served
    request = {
        "attributes": BASE_ATTRIBUTES,
        "what_if": [{"attribute_index": 18, "code": 0}],
    }
    response = client.post("/predict", json=request)
    assert response.status_code == 400
    assert "disease type" in response.json()["detail"]


def test_repeated_requests_identical(served):
    client, _, _, _ = served
    payload = {"attributes": BASE_ATTRIBUTES, "what_if": [{"attribute_index": 10, "code": 0}]}
    first = client.post("/predict", json=payload).json()
    for _ in range(5):
        assert client.post("/predict", json=payload).json() == first


def test_importance_endpoint(served):
    client, _, _, _ = served
    body = client.get("/importance").json()
    ranking = body["ranking"]
    assert len(ranking) == 18
    finite = [entry["f"] for entry in ranking if entry["f"] != "inf"]
    assert finite == sorted(finite, reverse=True)
    assert {"attribute_index", "name", "s2_between", "s2_within", "f"} <= set(ranking[0])


def test_wrong_schema_name_rejected(served):
    client, _, _, _ = served
    response = client.post("/predict", json={"schema_name": "uci", "attributes": BASE_ATTRIBUTES})
    assert response.status_code == 400


def test_fingerprint_mismatch_refuses_startup(tmp_path):
    d = synth_bhdc(60, seed=1)
    schema = load_schema("bhdc")
    fs = expert_features(schema)
    model = fit(project(d, fs), Hyperparams(variant="LR"), feature_set=fs)
    path = tmp_path / "model.json"
    save_model(model, path, schema, seed=1)
    with pytest.raises(CardiokitError):
        create_app(path, schema_path="uci")
