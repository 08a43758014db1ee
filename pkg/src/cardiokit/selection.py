"""Attribute ranking by one-way variance analysis, top-n sets and fusion.

For a binary-labeled attribute column the discriminative score is the ratio
of between-class to within-class variance:

    s2_between = 1/(C-1) * sum_c a_c * (mean_c - mean)^2
    s2_within  = 1/(N-C) * sum_c sum_j (x_cj - mean_c)^2
    f          = s2_between / s2_within

A perfectly separating attribute (zero within-class variance, nonzero
between) scores +inf, which sorts above every finite score; an attribute
that is constant overall scores 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .datasets import PROJECTED, Dataset
from .errors import SelectionError
from .schema import Schema, uci_raw_index_map

EXPERT = "expert"
ANOVA = "anova"
FUSED = "fused"

# Attribute ids nominated by the collaborating cardiologists for the
# questionnaire, and the benchmark repository's recommended ids for the UCI
# files (raw-file numbering; resolved through the shipped index map).
EXPERT_BHDC_INDICES: tuple[int, ...] = (1, 2, 3, 7, 8, 9, 10, 14)
EXPERT_UCI_RAW_IDS: tuple[int, ...] = (3, 4, 9, 10, 12, 16, 19, 32, 38, 40, 41, 44, 51, 58)


@dataclass(frozen=True)
class FScore:
    """Variance decomposition of one attribute against the class label."""

    attribute_index: int
    s2_between: float
    s2_within: float
    f: float  # may be math.inf when s2_within == 0 < s2_between

    def __post_init__(self) -> None:
        if self.s2_between < 0 or self.s2_within < 0:
            raise SelectionError("variance components cannot be negative")


@dataclass(frozen=True)
class FeatureSet:
    """An ordered, duplicate-free list of attribute indices with provenance."""

    indices: tuple[int, ...]
    provenance: str  # "expert" | "anova" | "fused"
    top_n: int | None = None  # filled for anova sets
    schema_name: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        if not self.indices:
            raise SelectionError("a feature set cannot be empty")
        if len(set(self.indices)) != len(self.indices):
            raise SelectionError(f"duplicate attribute indices in feature set: {self.indices}")
        if self.provenance not in (EXPERT, ANOVA, FUSED):
            raise SelectionError(f"unknown feature-set provenance {self.provenance!r}")

    @property
    def tag(self) -> str:
        if self.provenance == EXPERT:
            return "beta"
        if self.provenance == ANOVA:
            return f"alpha-{self.top_n if self.top_n is not None else len(self.indices)}"
        return "eta"

    def __len__(self) -> int:
        return len(self.indices)


def anova_f(d: Dataset, attribute_index: int) -> FScore:
    """Score one attribute of an encoded dataset against its binary label."""
    if not d.is_encoded:
        raise SelectionError("variance ranking expects an encoded dataset")
    if attribute_index == d.schema.label.index:
        raise SelectionError("the label attribute cannot be scored")
    neg, pos = d.class_counts()
    if neg == 0 or pos == 0:
        raise SelectionError(f"dataset {d.name!r} must contain both classes")
    col = d.rows[:, d.column_of(attribute_index)]
    n_classes = 2
    n_total = col.size
    overall_mean = float(col.mean())
    between = 0.0
    within = 0.0
    for c in (0, 1):
        values = col[d.labels == c]
        class_mean = float(values.mean())
        between += values.size * (class_mean - overall_mean) ** 2
        within += float(np.sum((values - class_mean) ** 2))
    s2_between = between / (n_classes - 1)
    s2_within = within / (n_total - n_classes) if n_total > n_classes else 0.0
    if s2_within > 0.0:
        f = s2_between / s2_within
    elif s2_between > 0.0:
        f = math.inf
    else:
        f = 0.0
    return FScore(attribute_index, s2_between, s2_within, f)


def rank(d: Dataset) -> list[FScore]:
    """All non-label attributes, ordered by descending f; ties by index."""
    scores = [anova_f(d, idx) for idx in d.feature_indices]
    return sorted(scores, key=lambda s: (-s.f, s.attribute_index))


def top_n(ranking: list[FScore], n: int, schema_name: str | None = None) -> FeatureSet:
    """The first n indices of a ranking, order preserved."""
    if not 1 <= n <= len(ranking):
        raise SelectionError(f"top-n must satisfy 1 <= n <= {len(ranking)}, got {n}")
    return FeatureSet(
        indices=tuple(s.attribute_index for s in ranking[:n]),
        provenance=ANOVA,
        top_n=n,
        schema_name=schema_name,
    )


def fuse(alpha: FeatureSet, beta: FeatureSet) -> FeatureSet:
    """Duplicate-free union: beta's indices in beta order, then the alpha
    indices not already present, in alpha order."""
    if (
        alpha.schema_name is not None
        and beta.schema_name is not None
        and alpha.schema_name != beta.schema_name
    ):
        raise SelectionError(
            f"cannot fuse feature sets from different schemas: "
            f"{alpha.schema_name!r} vs {beta.schema_name!r}"
        )
    seen = set(beta.indices)
    merged = list(beta.indices) + [i for i in alpha.indices if i not in seen]
    return FeatureSet(
        indices=tuple(merged),
        provenance=FUSED,
        schema_name=beta.schema_name or alpha.schema_name,
    )


def project(d: Dataset, fs: FeatureSet) -> Dataset:
    """Restrict an encoded dataset to the feature set's columns, in its order."""
    if not d.is_encoded:
        raise SelectionError("project expects an encoded dataset")
    try:
        cols = [d.column_of(i) for i in fs.indices]
    except Exception as exc:
        raise SelectionError(str(exc)) from exc
    return replace(
        d,
        rows=d.rows[:, cols],
        provenance=PROJECTED,
        feature_indices=tuple(fs.indices),
    )


def expert_features(schema: Schema) -> FeatureSet:
    """The domain-expert attribute set for a built-in schema.

    The benchmark repository publishes its recommended ids against the raw
    76-column files; they are resolved through the shipped index map and the
    label column is dropped, leaving predictors only.
    """
    if schema.name == "bhdc":
        return FeatureSet(EXPERT_BHDC_INDICES, provenance=EXPERT, schema_name=schema.name)
    if schema.name == "uci":
        index_map = uci_raw_index_map()
        label_index = schema.label.index
        resolved = []
        for raw_id in EXPERT_UCI_RAW_IDS:
            if raw_id not in index_map:
                raise SelectionError(f"raw attribute id {raw_id} missing from the index map")
            col = index_map[raw_id]
            if col != label_index:
                resolved.append(col)
        return FeatureSet(tuple(resolved), provenance=EXPERT, schema_name=schema.name)
    raise SelectionError(f"no expert attribute set is defined for schema {schema.name!r}")
