import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cardiokit.datasets import Dataset
from cardiokit.errors import SelectionError
from cardiokit.selection import (
    FeatureSet,
    anova_f,
    expert_features,
    fuse,
    project,
    rank,
    top_n,
)
from oracles import brute_anova


def column_dataset(*columns, labels, name="cols"):
    rows = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    return Dataset.from_arrays(name, rows, labels, kinds=["numeric"] * len(columns))


# --- anova_f -----------------------------------------------------------------

def test_perfectly_separating_attribute():
    d = column_dataset([1, 1, 3, 3], labels=[0, 0, 1, 1])
    s = anova_f(d, 1)
    assert s.s2_within == 0.0
    assert s.s2_between == pytest.approx(4.0)
    assert s.f == math.inf


def test_useless_attribute_scores_zero():
    d = column_dataset([0, 2, 0, 2], labels=[0, 0, 1, 1])
    s = anova_f(d, 1)
    assert s.s2_between == pytest.approx(0.0)
    assert s.f == 0.0


def test_hand_computed_example():
    d = column_dataset([1, 2, 3, 2, 4, 6], labels=[0, 0, 0, 1, 1, 1])
    s = anova_f(d, 1)
    assert s.s2_between == pytest.approx(6.0, rel=1e-12)
    assert s.s2_within == pytest.approx(2.5, rel=1e-12)
    assert s.f == pytest.approx(2.4, rel=1e-12)


def test_constant_attribute_is_zero_not_error():
    d = column_dataset([5, 5, 5, 5], labels=[0, 1, 0, 1])
    assert anova_f(d, 1).f == 0.0


def test_single_class_rejected():
    d = column_dataset([1, 2, 3], labels=[1, 1, 1])
    with pytest.raises(SelectionError):
        anova_f(d, 1)


def test_label_attribute_rejected(bhdc_synth):
    with pytest.raises(SelectionError):
        anova_f(bhdc_synth, bhdc_synth.schema.label.index)


def test_agrees_with_brute_force_oracle():
    rng = np.random.default_rng(123)
    for _ in range(100):
        n = int(rng.integers(4, 60))
        values = rng.normal(size=n)
        labels = rng.integers(0, 2, size=n)
        if labels.sum() in (0, n):
            labels[0] = 1 - labels[0]
        d = column_dataset(values, labels=labels)
        s = anova_f(d, 1)
        eb, ew, ef = brute_anova(values, labels)
        assert s.s2_between == pytest.approx(eb, rel=1e-9)
        assert s.s2_within == pytest.approx(ew, rel=1e-9)
        if math.isinf(ef):
            assert math.isinf(s.f)
        else:
            assert s.f == pytest.approx(ef, rel=1e-9)


@settings(max_examples=60, deadline=None)
@given(
    values=st.lists(st.integers(min_value=-50, max_value=50), min_size=4, max_size=40),
    scale=st.floats(min_value=0.01, max_value=100, allow_nan=False),
    shift=st.floats(min_value=-100, max_value=100, allow_nan=False),
    flip=st.booleans(),
)
def test_affine_invariance(values, scale, shift, flip):
    n = len(values)
    labels = [i % 2 for i in range(n)]
    a = (-scale if flip else scale)
    d1 = column_dataset(values, labels=labels)
    d2 = column_dataset([a * v + shift for v in values], labels=labels)
    f1 = anova_f(d1, 1).f
    f2 = anova_f(d2, 1).f
    if math.isinf(f1) or math.isinf(f2):
        assert math.isinf(f1) and math.isinf(f2)
    else:
        assert f2 == pytest.approx(f1, rel=1e-9, abs=1e-12)


# --- rank / top_n ------------------------------------------------------------

def test_rank_descending_with_ties_by_index():
    d = column_dataset([1, 1, 3, 3], [1, 1, 3, 3], [0, 1, 0, 1], labels=[0, 0, 1, 1])
    ranking = rank(d)
    assert [s.attribute_index for s in ranking] == [1, 2, 3]
    assert ranking[0].f == ranking[1].f == math.inf


def test_rank_singleton():
    d = column_dataset([1, 2, 3, 4], labels=[0, 0, 1, 1])
    assert [s.attribute_index for s in rank(d)] == [1]


def test_rank_flags_generator_attributes(bhdc_synth):
    top8 = {s.attribute_index for s in rank(bhdc_synth)[:8]}
    assert {7, 8, 9, 10, 14} <= top8


def test_top_n_identity_and_prefix():
    d = column_dataset([1, 1, 3, 3], [0, 1, 0, 1], [1, 2, 3, 4], labels=[0, 0, 1, 1])
    ranking = rank(d)
    assert top_n(ranking, len(ranking)).indices == tuple(s.attribute_index for s in ranking)
    assert top_n(ranking, 2).indices == tuple(s.attribute_index for s in ranking[:2])


def test_top_n_out_of_range():
    d = column_dataset([1, 2, 3, 4], labels=[0, 0, 1, 1])
    ranking = rank(d)
    for bad in (0, 2):
        with pytest.raises(SelectionError):
            top_n(ranking, bad)


def test_top_n_monotone_containment(bhdc_synth):
    ranking = rank(bhdc_synth)
    for n in range(2, 17, 2):
        small = set(top_n(ranking, n).indices)
        large = set(top_n(ranking, n + 2).indices)
        assert small < large


def test_bhdc_sweep_sizes(bhdc_synth):
    ranking = rank(bhdc_synth)
    sweeps = [top_n(ranking, n) for n in range(2, 19, 2)]
    assert len(sweeps) == 9
    assert [len(fs) for fs in sweeps] == list(range(2, 19, 2))


# --- fuse --------------------------------------------------------------------

def test_fusion_golden_example():
    beta = FeatureSet((1, 2, 3, 7, 8, 9, 10, 14), provenance="expert")
    alpha = FeatureSet((7, 8, 9, 10, 14, 16, 17, 18), provenance="anova", top_n=8)
    eta = fuse(alpha, beta)
    assert eta.indices == (1, 2, 3, 7, 8, 9, 10, 14, 16, 17, 18)
    assert len(eta) == 11
    assert eta.provenance == "fused"


def test_fusion_idempotent():
    beta = FeatureSet((1, 2, 3), provenance="expert")
    alpha = FeatureSet((1, 2, 3), provenance="anova", top_n=3)
    assert fuse(alpha, beta).indices == beta.indices


def test_fusion_disjoint():
    beta = FeatureSet((1, 2), provenance="expert")
    alpha = FeatureSet((3, 4, 5), provenance="anova", top_n=3)
    assert fuse(alpha, beta).indices == (1, 2, 3, 4, 5)


def test_fusion_schema_mismatch():
    beta = FeatureSet((1, 2), provenance="expert", schema_name="bhdc")
    alpha = FeatureSet((3,), provenance="anova", schema_name="uci")
    with pytest.raises(SelectionError):
        fuse(alpha, beta)


@settings(max_examples=80, deadline=None)
@given(
    alpha=st.lists(st.integers(1, 18), min_size=1, max_size=12, unique=True),
    beta=st.lists(st.integers(1, 18), min_size=1, max_size=12, unique=True),
)
def test_fusion_is_set_union_without_duplicates(alpha, beta):
    fused = fuse(
        FeatureSet(tuple(alpha), provenance="anova", top_n=len(alpha)),
        FeatureSet(tuple(beta), provenance="expert"),
    )
    assert set(fused.indices) == set(alpha) | set(beta)
    assert len(fused.indices) == len(set(fused.indices))
    assert len(fused) <= len(alpha) + len(beta)
    again = fuse(fused, fused)
    assert again.indices == fused.indices


def test_feature_set_rejects_duplicates_and_empty():
    with pytest.raises(SelectionError):
        FeatureSet((1, 1), provenance="expert")
    with pytest.raises(SelectionError):
        FeatureSet((), provenance="expert")


# --- project -----------------------------------------------------------------

def test_project_all_columns_reorders(bhdc_synth):
    fs = FeatureSet(tuple(reversed(bhdc_synth.feature_indices)), provenance="expert")
    p = project(bhdc_synth, fs)
    assert p.n_rows == bhdc_synth.n_rows
    assert p.feature_indices == fs.indices
    assert np.array_equal(p.rows[:, -1], bhdc_synth.rows[:, 0])
    assert np.array_equal(p.labels, bhdc_synth.labels)


def test_project_single_column():
    d = column_dataset([1, 2], [3, 4], [5, 6], labels=[0, 1])
    p = project(d, FeatureSet((1,), provenance="expert"))
    assert p.rows.shape == (2, 1)
    assert p.provenance == "projected"


def test_project_idempotent(bhdc_synth):
    fs = FeatureSet((9, 7, 14), provenance="anova", top_n=3)
    once = project(bhdc_synth, fs)
    twice = project(once, fs)
    assert np.array_equal(once.rows, twice.rows)
    assert once.feature_indices == twice.feature_indices


def test_project_invalid_index(bhdc_synth):
    with pytest.raises(SelectionError):
        project(bhdc_synth, FeatureSet((99,), provenance="expert"))


# --- expert sets -------------------------------------------------------------

def test_expert_sets(bhdc_schema, uci_schema):
    assert expert_features(bhdc_schema).indices == (1, 2, 3, 7, 8, 9, 10, 14)
    uci = expert_features(uci_schema)
    assert uci.indices == tuple(range(1, 14))  # label column dropped
    assert uci.provenance == "expert"
