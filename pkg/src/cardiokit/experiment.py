"""Experiment grid: {dataset x feature selection x classifier}.

For every dataset the runner evaluates the expert set (beta), sweeps the
ranked top-n sets (alpha-2, alpha-4, ... up to the configured cap, bounded by
the feature count), then, per classifier, fuses the best-scoring alpha with
beta (eta) and evaluates that. Hyperparameters are searched exhaustively over
the published discrete ranges, scored by K-fold cv_mean.

Cells are independent and may run on several workers; the grid assembles
deterministically whatever the execution order, and the canonical grid
document excludes wall-clock fields so identical configs serialize
byte-identically.
"""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .classifiers import (
    DT,
    KNN,
    LR,
    NB_CATEGORICAL,
    NB_MULTINOMIAL,
    SVM,
    Hyperparams,
    TrainedModel,
    fit as fit_classifier,
)
from .datasets import Dataset, FoldPlan, SplitSpec, make_folds, split_stratified
from .errors import CardiokitError, EvaluationError
from .evaluation import EvalReport, cross_validate, evaluate_model
from .schema import CATEGORICAL
from .selection import FeatureSet, FScore, expert_features, fuse, project, rank, top_n

GRID_FORMAT = "cardiokit/grid/v1"

# Classifier axis of the result tables; NB's flavor is resolved per cell.
GRID_CLASSIFIERS = (LR, DT, KNN, "NB", SVM)

LONG_CSV_METRICS = (
    "cv_mean",
    "cv_std",
    "accuracy",
    "precision",
    "recall",
    "specificity_fpr",
    "auc",
    "per_sample_time",
)


@dataclass(frozen=True)
class GridConfig:
    seed: int = 42
    k: int = 5
    workers: int = 1
    eval_split: bool = False  # False: K-fold CV cells; True: 70/30 held-out cells
    sweep_caps: dict = field(default_factory=lambda: {"bhdc": 18, "uci": 14})

    def sweep_cap(self, schema_name: str) -> int:
        return int(self.sweep_caps.get(schema_name, 14))


@dataclass(frozen=True)
class GridCell:
    dataset: str
    tag: str
    classifier: str
    hyperparams: dict | None = None
    report: EvalReport | None = None
    error: str | None = None

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.dataset, self.tag, self.classifier)

    def selection_score(self) -> float:
        if self.report is None:
            return float("-inf")
        if self.report.cv_mean is not None:
            return self.report.cv_mean
        return 100.0 * self.report.accuracy


@dataclass
class ExperimentGrid:
    config: GridConfig
    cells: dict[tuple[str, str, str], GridCell]
    eta_sources: dict[tuple[str, str], int]  # (dataset, classifier) -> best alpha n
    feature_sets: dict[tuple[str, str], tuple[int, ...]]  # (dataset, tag) or per-classifier eta
    rankings: dict[str, list[FScore]]
    datasets: dict[str, Dataset]
    timestamp: float = field(default_factory=time.time)

    @property
    def has_errors(self) -> bool:
        return any(c.error for c in self.cells.values())


def candidate_hyperparams(classifier: str, fs_all_categorical: bool) -> list[Hyperparams]:
    """The exhaustive search space over the published discrete ranges."""
    if classifier == LR:
        return [Hyperparams(variant=LR)]
    if classifier == DT:
        return [Hyperparams(variant=DT, dt_max_depth=depth) for depth in (3, 4, 5, 6)]
    if classifier == KNN:
        return [Hyperparams(variant=KNN, knn_k=k) for k in (5, 7, 9, 11, 13, 15)]
    if classifier == "NB":
        flavor = NB_CATEGORICAL if fs_all_categorical else NB_MULTINOMIAL
        return [Hyperparams(variant=flavor, nb_alpha=a) for a in (0.5, 0.6, 0.7, 0.8)]
    if classifier == SVM:
        return [Hyperparams(variant=SVM, svm_kernel=kernel) for kernel in ("linear", "rbf")]
    raise CardiokitError(f"unknown grid classifier {classifier!r}")


def _all_categorical(d: Dataset, fs: FeatureSet) -> bool:
    return all(d.schema.attribute(i).kind == CATEGORICAL for i in fs.indices)


def _evaluate_candidate(
    d: Dataset, fs: FeatureSet, h: Hyperparams, plan: FoldPlan, eval_split: bool, seed: int
) -> EvalReport:
    if not eval_split:
        return cross_validate(d, fs, h, plan)
    train, test = split_stratified(d, SplitSpec(seed=seed))
    model = fit_classifier(project(train, fs), h, feature_set=fs)
    return evaluate_model(model, project(test, fs))


def run_cell(args) -> GridCell:
    """Evaluate one (dataset, tag, classifier) cell: search hyperparameters,
    keep the best-scoring candidate. Failures are recorded, never raised."""
    d, tag, classifier, fs, plan, eval_split, seed = args
    candidates = candidate_hyperparams(classifier, _all_categorical(d, fs))
    best: tuple[float, Hyperparams, EvalReport] | None = None
    last_error: str | None = None
    for h in candidates:
        try:
            report = _evaluate_candidate(d, fs, h, plan, eval_split, seed)
        except Exception as exc:
            last_error = str(exc)
            continue
        score = report.cv_mean if report.cv_mean is not None else 100.0 * report.accuracy
        if best is None or score > best[0]:
            best = (score, h, report)
    if best is None:
        return GridCell(d.name, tag, classifier, error=last_error or "no candidate succeeded")
    _, h, report = best
    return GridCell(d.name, tag, classifier, hyperparams=h.to_dict(), report=report)


def _run_cells(specs: list, workers: int) -> list[GridCell]:
    if workers > 1 and len(specs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run_cell, specs))
    return [run_cell(spec) for spec in specs]


def alpha_sweep_sizes(n_features: int, cap: int) -> list[int]:
    return [n for n in range(2, cap + 1, 2) if n <= n_features]


def run_grid(datasets: list[Dataset], config: GridConfig) -> ExperimentGrid:
    """Evaluate the full selection-by-classifier grid on encoded datasets."""
    cells: dict[tuple[str, str, str], GridCell] = {}
    eta_sources: dict[tuple[str, str], int] = {}
    feature_sets: dict[tuple[str, str], tuple[int, ...]] = {}
    rankings: dict[str, list[FScore]] = {}
    by_name: dict[str, Dataset] = {}
    for d in datasets:
        if not d.is_encoded:
            raise CardiokitError(f"grid datasets must be encoded; {d.name!r} is {d.provenance}")
        by_name[d.name] = d
        plan = make_folds(d, FoldPlan(k=config.k, seed=config.seed))
        beta = expert_features(d.schema)
        ranking = rank(d)
        rankings[d.name] = ranking
        alphas = {
            n: top_n(ranking, n, schema_name=d.schema.name)
            for n in alpha_sweep_sizes(len(ranking), config.sweep_cap(d.schema.name))
        }
        tagged: list[tuple[str, FeatureSet]] = [("beta", beta)]
        tagged += [(f"alpha-{n}", fs) for n, fs in sorted(alphas.items())]
        for tag, fs in tagged:
            feature_sets[(d.name, tag)] = fs.indices
        specs = [
            (d, tag, classifier, fs, plan, config.eval_split, config.seed)
            for tag, fs in tagged
            for classifier in GRID_CLASSIFIERS
        ]
        for cell in _run_cells(specs, config.workers):
            cells[cell.key] = cell
        # per classifier: fuse the best alpha with the expert set, then evaluate
        eta_specs = []
        for classifier in GRID_CLASSIFIERS:
            alpha_cells = [cells[(d.name, f"alpha-{n}", classifier)] for n in sorted(alphas)]
            scored = [c for c in alpha_cells if c.report is not None]
            if not scored:
                cells[(d.name, "eta", classifier)] = GridCell(
                    d.name, "eta", classifier, error="no alpha cell succeeded"
                )
                continue
            best_cell = max(scored, key=lambda c: (c.selection_score(), -int(c.tag.split("-")[1])))
            best_n = int(best_cell.tag.split("-")[1])
            eta_sources[(d.name, classifier)] = best_n
            eta = fuse(alphas[best_n], beta)
            feature_sets[(d.name, f"eta/{classifier}")] = eta.indices
            eta_specs.append((d, "eta", classifier, eta, plan, config.eval_split, config.seed))
        for cell in _run_cells(eta_specs, config.workers):
            cells[cell.key] = cell
    return ExperimentGrid(
        config=config,
        cells=cells,
        eta_sources=eta_sources,
        feature_sets=feature_sets,
        rankings=rankings,
        datasets=by_name,
    )


def _cell_metrics(report: EvalReport | None, include_timing: bool) -> dict:
    if report is None:
        return {}
    metrics = {
        "cv_mean": report.cv_mean,
        "cv_std": report.cv_std,
        "accuracy": report.accuracy,
        "precision": report.precision,
        "recall": report.recall,
        "specificity_fpr": report.specificity_fpr,
        "auc": report.auc,
        "tp": report.cm.tp,
        "fp": report.cm.fp,
        "fn": report.cm.fn,
        "tn": report.cm.tn,
        "fold_accuracies": list(report.fold_accuracies),
    }
    if include_timing:
        metrics["per_sample_time"] = report.per_sample_time
    return metrics


def grid_document(grid: ExperimentGrid) -> dict:
    """Canonical grid document: everything deterministic, no wall-clock data."""
    cells = []
    for key in sorted(grid.cells):
        cell = grid.cells[key]
        cells.append(
            {
                "dataset": cell.dataset,
                "tag": cell.tag,
                "classifier": cell.classifier,
                "hyperparams": cell.hyperparams,
                "error": cell.error,
                "metrics": _cell_metrics(cell.report, include_timing=False),
            }
        )
    return {
        "format": GRID_FORMAT,
        "config": {
            "seed": grid.config.seed,
            "k": grid.config.k,
            "eval_split": grid.config.eval_split,
            "sweep_caps": dict(sorted(grid.config.sweep_caps.items())),
            "hyperparameter_search": "exhaustive over published ranges, scored by cv_mean",
        },
        "eta_sources": {
            f"{ds}/{clf}": n for (ds, clf), n in sorted(grid.eta_sources.items())
        },
        "feature_sets": {
            f"{ds}/{tag}": list(indices)
            for (ds, tag), indices in sorted(grid.feature_sets.items())
        },
        "rankings": {
            ds: [
                {
                    "attribute_index": s.attribute_index,
                    "s2_between": s.s2_between,
                    "s2_within": s.s2_within,
                    "f": "inf" if s.f == float("inf") else s.f,
                }
                for s in ranking
            ]
            for ds, ranking in sorted(grid.rankings.items())
        },
        "cells": cells,
    }


def serialize_grid(grid: ExperimentGrid) -> str:
    return json.dumps(grid_document(grid), indent=2, sort_keys=True) + "\n"


def long_csv(grid: ExperimentGrid) -> str:
    """Long-form CSV: one row per (cell, metric), wall-clock metrics included."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["dataset", "tag", "classifier", "metric", "value"])
    for key in sorted(grid.cells):
        cell = grid.cells[key]
        metrics = _cell_metrics(cell.report, include_timing=True)
        for name in LONG_CSV_METRICS:
            value = metrics.get(name)
            writer.writerow(
                [cell.dataset, cell.tag, cell.classifier, name, "" if value is None else f"{value:.10g}"]
            )
    return out.getvalue()


def dataset_table(grid: ExperimentGrid, dataset_name: str) -> str:
    """Accuracy table for one dataset: classifiers x selection tags,
    "mean+-std" cells, the best tag per classifier marked with '*'."""
    tags = sorted(
        {tag for (ds, tag, _) in grid.cells if ds == dataset_name},
        key=lambda t: (t != "beta", t == "eta", int(t.split("-")[1]) if t.startswith("alpha-") else 0),
    )
    lines = [f"# dataset={dataset_name} seed={grid.config.seed} k={grid.config.k}"]
    header = ["classifier"] + tags
    widths = [max(10, len(h)) for h in header]
    rows = []
    for classifier in GRID_CLASSIFIERS:
        row = [classifier]
        best_tag = None
        best_score = float("-inf")
        for tag in tags:
            cell = grid.cells.get((dataset_name, tag, classifier))
            if cell is None or cell.report is None:
                row.append("error")
                continue
            score = cell.selection_score()
            if score > best_score:
                best_score, best_tag = score, tag
            mean = cell.report.cv_mean if cell.report.cv_mean is not None else 100 * cell.report.accuracy
            std = cell.report.cv_std if cell.report.cv_std is not None else 0.0
            row.append(f"{mean:.1f}+-{std:.1f}")
        if best_tag is not None:
            idx = tags.index(best_tag) + 1
            row[idx] = row[idx] + "*"
        rows.append(row)
    for row in [header] + rows:
        lines.append("  ".join(str(v).ljust(w) for v, w in zip(row, widths)))
    return "\n".join(lines) + "\n"


def report(grid: ExperimentGrid, format: str = "table") -> str:
    """Render the grid: "table" (per-dataset), "csv" (long form), "json"."""
    if format == "json":
        return serialize_grid(grid)
    if format == "csv":
        return long_csv(grid)
    if format == "table":
        names = sorted({ds for (ds, _, _) in grid.cells})
        return "\n".join(dataset_table(grid, name) for name in names)
    raise CardiokitError(f"unknown report format {format!r}; pick table, csv or json")


def roc_documents(grid: ExperimentGrid) -> dict[str, str]:
    """Two-column ROC CSVs for every fused-selection cell."""
    docs = {}
    for (ds, tag, classifier), cell in sorted(grid.cells.items()):
        if tag != "eta" or cell.report is None or not cell.report.roc_points:
            continue
        lines = ["fpr,tpr"] + [f"{x:.10g},{y:.10g}" for x, y in cell.report.roc_points]
        docs[f"roc_{ds}_{classifier}_eta.csv"] = "\n".join(lines) + "\n"
    return docs


def best_model(grid: ExperimentGrid) -> tuple[tuple[str, str, str], TrainedModel]:
    """The winning cell and its model refit on the 70% training split.

    Ties break by lower prediction time, then classifier order, then key.
    """
    scored = [c for c in grid.cells.values() if c.report is not None]
    if not scored:
        raise CardiokitError("grid has no successful cells")

    def sort_key(cell: GridCell):
        order = GRID_CLASSIFIERS.index(cell.classifier)
        return (-cell.selection_score(), cell.report.per_sample_time, order, cell.key)

    winner = min(scored, key=sort_key)
    d = grid.datasets[winner.dataset]
    if winner.tag == "eta":
        indices = grid.feature_sets[(winner.dataset, f"eta/{winner.classifier}")]
        fs = FeatureSet(indices, provenance="fused", schema_name=d.schema.name)
    else:
        indices = grid.feature_sets[(winner.dataset, winner.tag)]
        if winner.tag == "beta":
            fs = FeatureSet(indices, provenance="expert", schema_name=d.schema.name)
        else:
            fs = FeatureSet(
                indices,
                provenance="anova",
                top_n=int(winner.tag.split("-")[1]),
                schema_name=d.schema.name,
            )
    train, _ = split_stratified(d, SplitSpec(seed=grid.config.seed))
    h = Hyperparams.from_dict(winner.hyperparams)
    model = fit_classifier(project(train, fs), h, feature_set=fs)
    return winner.key, model


def cell_count(grid: ExperimentGrid) -> int:
    return len(grid.cells)
