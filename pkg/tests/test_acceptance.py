"""Acceptance suite: one test per criterion, one printed verdict line each.

Run with `pytest tests/test_acceptance.py -v` (or `-s` to watch the verdict
lines stream). The grid criteria drive the real CLI against the shipped data
files; see README.md ("Data") for what those files are.
"""

import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from cardiokit.classifiers import Hyperparams, fit, gradient, linear_objective, objective, predict, predict_batch
from cardiokit.cli import main as cli_main
from cardiokit.datasets import Dataset, FoldPlan, clean, encode, load_csv, make_folds, synth_bhdc
from cardiokit.evaluation import ConfusionMatrix, auc, confusion, cross_validate, metrics, roc
from cardiokit.schema import load_schema
from cardiokit.selection import FeatureSet, anova_f, expert_features, fuse, rank, top_n
from oracles import auc_pairs, brute_anova, finite_difference_gradient, knn_bruteforce, svm_gradient_descent

from conftest import DATA_DIR, toy_dataset


def record(name: str, passed: bool, detail: str = "") -> None:
    print(f"ACCEPTANCE {name}: {'PASS' if passed else 'FAIL'} {detail}".rstrip())
    assert passed, f"{name} failed: {detail}"


# --- C1: variance-ratio scorer vs brute-force oracle ---------------------------

def test_c1_anova_oracle_equivalence():
    rng = np.random.default_rng(20240817)
    start = time.perf_counter()
    worst = 0.0
    for trial in range(1000):
        n = int(rng.integers(4, 201))
        d = int(rng.integers(1, 21))
        X = np.round(rng.normal(size=(n, d)) * rng.choice([0.5, 1.0, 10.0]), 4)
        labels = rng.integers(0, 2, size=n)
        if labels.sum() in (0, n):
            labels[0] = 1 - labels[0]
        ds = Dataset.from_arrays(f"rand{trial}", X, labels, kinds=["numeric"] * d)
        attr = int(rng.integers(1, d + 1))
        got = anova_f(ds, attr)
        eb, ew, ef = brute_anova(X[:, attr - 1].tolist(), labels.tolist())
        for ours, theirs in ((got.s2_between, eb), (got.s2_within, ew), (got.f, ef)):
            if math.isinf(theirs):
                assert math.isinf(ours)
                continue
            rel = abs(ours - theirs) / max(1e-30, abs(theirs))
            worst = max(worst, rel)
            assert rel <= 1e-9, (trial, attr, ours, theirs)
    elapsed = time.perf_counter() - start
    record(
        "C1 anova-oracle-equivalence",
        elapsed < 5.0,
        f"(1000 datasets, worst rel err {worst:.2e}, {elapsed:.2f}s < 5s)",
    )


# --- C2: fusion golden test -----------------------------------------------------

def test_c2_fusion_golden():
    beta = FeatureSet((1, 2, 3, 7, 8, 9, 10, 14), provenance="expert")
    alpha = FeatureSet((7, 8, 9, 10, 14, 16, 17, 18), provenance="anova", top_n=8)
    eta = fuse(alpha, beta)
    expected = (1, 2, 3, 7, 8, 9, 10, 14, 16, 17, 18)
    record(
        "C2 fusion-golden",
        eta.indices == expected and len(eta) == 11,
        f"(got {eta.indices})",
    )


# --- C3: classifier oracles ------------------------------------------------------

def test_c3_classifier_oracles():
    failures = []

    # KNN vs full-sort oracle, 100 random queries
    rng = np.random.default_rng(31)
    rows = rng.normal(size=(40, 3))
    labels = rng.integers(0, 2, size=40)
    knn_model = fit(
        toy_dataset(rows, labels, kinds=["numeric"] * 3), Hyperparams(variant="KNN", knn_k=5)
    )
    for _ in range(100):
        q = rng.normal(size=3)
        got = predict(knn_model, q)
        exp = knn_bruteforce(rows.tolist(), labels.tolist(), q.tolist(), 5)
        if got[0] != exp[0] or abs(got[1] - exp[1]) > 1e-12:
            failures.append(f"knn mismatch at {q}")
            break

    # LR analytic gradient vs central finite differences
    worst_grad = 0.0
    for _ in range(20):
        n = int(rng.integers(5, 51))
        d = int(rng.integers(1, 9))
        X = rng.normal(size=(n, d))
        y = rng.integers(0, 2, size=n).astype(float)
        theta = rng.normal(size=d + 1)
        analytic = gradient(theta, X, y)
        numeric = np.asarray(
            finite_difference_gradient(lambda t: objective(np.asarray(t), X, y), theta, eps=1e-5)
        )
        rel = float(np.max(np.abs(analytic - numeric)) / max(1.0, np.max(np.abs(numeric))))
        worst_grad = max(worst_grad, rel)
    if worst_grad >= 1e-6:
        failures.append(f"lr gradient rel err {worst_grad:.2e}")

    # DT solves 2-bit XOR at depth >= 2
    xor = toy_dataset([[0, 0], [0, 1], [1, 0], [1, 1]], [0, 1, 1, 0],
                      kinds=["categorical", "categorical"])
    dt_model = fit(xor, Hyperparams(variant="DT", dt_max_depth=3))
    dt_labels, _ = predict_batch(dt_model, xor.rows)
    if not np.array_equal(dt_labels, xor.labels):
        failures.append("dt cannot solve xor")

    # NB hand posterior 0.75 / 0.25
    nb_model = fit(
        toy_dataset([[0.0], [1.0]], [0, 1], kinds=["categorical"]),
        Hyperparams(variant="NB-categorical", nb_alpha=0.5),
    )
    nb_label, nb_score = predict(nb_model, [0.0])
    if nb_label != 0 or abs(nb_score - 0.25) > 1e-12:
        failures.append(f"nb posterior {nb_score}")

    # SVM: separable blobs at 100% and objective vs descent oracle
    pos = rng.normal(loc=(2, 2), scale=0.4, size=(10, 2))
    neg = rng.normal(loc=(-2, -2), scale=0.4, size=(10, 2))
    blob_rows = np.vstack([pos, neg])
    blob_labels = np.array([1] * 10 + [0] * 10)
    svm_model = fit(
        toy_dataset(blob_rows, blob_labels, kinds=["numeric"] * 2), Hyperparams(variant="SVM")
    )
    svm_labels, _ = predict_batch(svm_model, blob_rows)
    if not np.array_equal(svm_labels, blob_labels):
        failures.append("svm not perfect on separable blobs")
    worst_obj = 0.0
    for _ in range(3):
        X = rng.normal(size=(20, 3))
        y = rng.integers(0, 2, size=20)
        if y.sum() in (0, 20):
            y[0] = 1 - y[0]
        m = fit(toy_dataset(X, y, kinds=["numeric"] * 3), Hyperparams(variant="SVM"))
        theta = np.concatenate([m.payload["weights"], [m.payload["intercept"]]])
        t = 2.0 * y - 1.0
        ours = linear_objective(theta, X, t, 1.0)
        oracle = svm_gradient_descent(X.tolist(), t.tolist(), 1.0)
        worst_obj = max(worst_obj, abs(ours - oracle) / abs(oracle))
    if worst_obj >= 1e-6:
        failures.append(f"svm objective rel err {worst_obj:.2e}")

    record("C3 classifier-oracles", not failures, f"({failures or 'knn, lr, dt, nb, svm all match'})")


# --- C4: metrics and AUC -----------------------------------------------------------

def test_c4_metrics_and_auc():
    failures = []

    m = metrics(ConfusionMatrix(tp=96, fp=0, fn=0, tn=73))
    if (m.accuracy, m.precision, m.recall, m.specificity_fpr) != (1.0, 1.0, 1.0, 0.0):
        failures.append("perfect-classifier fixture")
    m2 = metrics(confusion([1, 0, 1, 1], [1, 1, 0, 1]))
    if m2.accuracy != 0.5 or abs(m2.precision - 2 / 3) > 1e-15 or m2.specificity_fpr != 1.0:
        failures.append("hand-counted fixture")

    if auc(roc([1.0, 1.0, 0.0, 0.0], [1, 1, 0, 0])) != 1.0:
        failures.append("perfect ranking auc")
    if auc(roc([0.0, 0.0, 1.0, 1.0], [1, 1, 0, 0])) != 0.0:
        failures.append("anti-perfect ranking auc")

    rng = np.random.default_rng(44)
    worst = 0.0
    for trial in range(200):
        truth = rng.integers(0, 2, size=50)
        if truth.sum() in (0, 50):
            truth[0] = 1 - truth[0]
        if trial % 2 == 0:
            scores = rng.random(size=50)
        else:
            scores = rng.choice([0.0, 0.2, 0.4, 0.6, 0.8, 1.0], size=50)
        got = auc(roc(scores, truth))
        exact = float(auc_pairs(scores.tolist(), truth.tolist()))
        worst = max(worst, abs(got - exact))
    if worst > 1e-12:
        failures.append(f"trapezoid vs pair statistic diff {worst:.2e}")

    record("C4 metrics-and-auc", not failures, f"({failures or f'200 random vectors, max diff {worst:.1e}'})")


# --- C5: end-to-end desk-scale reproduction ------------------------------------------

@pytest.fixture(scope="module")
def grid_runs(tmp_path_factory):
    """Two CLI grid runs over the shipped data with the same seed."""
    tmp = tmp_path_factory.mktemp("grids")
    durations = []
    for run in (1, 2):
        out_dir = tmp / f"run{run}"
        start = time.perf_counter()
        code = cli_main(
            ["grid", "--data", "all", "--data-dir", str(DATA_DIR), "--k", "5",
             "--seed", "7", "--out-dir", str(out_dir)]
        )
        durations.append(time.perf_counter() - start)
        assert code == 0, "grid run reported cell errors"
    return tmp / "run1", tmp / "run2", durations


def test_c5_end_to_end_desk_scale(grid_runs):
    # Part 1: the Cleveland table at desk scale (shipped stand-in; the real
    # benchmark file is not fetchable from this environment, see README).
    schema = load_schema("uci")
    start = time.perf_counter()
    d = encode(clean(load_csv(DATA_DIR / "cleveland.csv", schema, name="cleveland")))
    assert d.n_rows == 282, "cleaned Cleveland row count"
    beta = expert_features(schema)  # the recommended-attribute list
    assert len(beta) == 13
    plan = make_folds(d, FoldPlan(k=5, seed=42))
    best = None
    for variant in ("LR", "DT", "KNN", "NB-multinomial", "SVM"):
        rep = cross_validate(d, beta, Hyperparams(variant=variant), plan)
        if best is None or rep.cv_mean > best[1].cv_mean:
            best = (variant, rep)
    elapsed = time.perf_counter() - start
    variant, rep = best
    part1 = rep.cv_mean >= 80.0 and rep.auc >= 0.85 and elapsed < 60.0

    # Part 2: the fused selection beats or matches the expert selection for a
    # majority of classifiers on the synthetic questionnaire data.
    doc = json.loads((grid_runs[0] / "grid.json").read_text())
    cells = {(c["dataset"], c["tag"], c["classifier"]): c for c in doc["cells"]}
    wins = 0
    comparisons = []
    for clf in ("LR", "DT", "KNN", "NB", "SVM"):
        beta_cell = cells[("bhdc", "beta", clf)]["metrics"]["cv_mean"]
        eta_cell = cells[("bhdc", "eta", clf)]["metrics"]["cv_mean"]
        wins += eta_cell >= beta_cell
        comparisons.append(f"{clf}:{eta_cell:.1f}vs{beta_cell:.1f}")
    part2 = wins >= 3

    record(
        "C5 end-to-end-desk-scale",
        part1 and part2,
        f"(best={variant} cv_mean={rep.cv_mean:.2f}%>=80 auc={rep.auc:.3f}>=0.85 "
        f"in {elapsed:.1f}s<60s; eta>=beta for {wins}/5 [{' '.join(comparisons)}])",
    )


# --- C6: grid determinism -------------------------------------------------------------

def test_c6_grid_determinism(grid_runs):
    run1, run2, durations = grid_runs
    bytes1 = (run1 / "grid.json").read_bytes()
    bytes2 = (run2 / "grid.json").read_bytes()
    identical = bytes1 == bytes2
    in_budget = max(durations) < 300.0
    record(
        "C6 grid-determinism",
        identical and in_budget,
        f"(byte-identical={identical}, runs {durations[0]:.0f}s/{durations[1]:.0f}s < 300s)",
    )
