"""Command-line surface for the prognosis pipeline.

Subcommands: synth, ingest, rank, select, fuse, train, evaluate, cv, grid,
serve. Exit codes: 0 success, 1 domain error, 2 usage error. Every run prints
a header (with its seed) to stderr so stdout stays machine-readable.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from pathlib import Path

from . import __version__
from .classifiers import (
    KNN,
    NB_CATEGORICAL,
    NB_MULTINOMIAL,
    Hyperparams,
    fit as fit_classifier,
)
from .datasets import (
    Dataset,
    SplitSpec,
    FoldPlan,
    clean,
    dump_encoded_csv,
    encode,
    load_csv,
    make_folds,
    split_stratified,
    synth_bhdc,
    synth_uci,
    write_raw_csv,
    UCI_DATASET_PARAMS,
)
from .errors import CardiokitError
from .evaluation import cross_validate, evaluate_model
from .experiment import GridConfig, best_model, report, roc_documents, run_grid, serialize_grid, long_csv
from .persistence import load_model, save_model
from .schema import CATEGORICAL, load_schema
from .selection import FeatureSet, expert_features, fuse, project, rank, top_n

DATA_DIR_ENV = "CARDIOKIT_DATA"
GRID_DATASETS = ("bhdc", "cleveland", "hungarian", "switzerland", "long_beach_va")


def _data_dir(value: str | None) -> Path:
    return Path(value or os.environ.get(DATA_DIR_ENV, "data"))


def _header(args: argparse.Namespace, command: str) -> None:
    seed = getattr(args, "seed", None)
    extras = f" seed={seed}" if seed is not None else ""
    print(f"# cardiokit {__version__} {command}{extras}", file=sys.stderr)


def _load_encoded(path: str | Path, schema_name: str, name: str | None = None) -> Dataset:
    schema = load_schema(schema_name)
    raw = load_csv(path, schema, name=name)
    cleaned = clean(raw)
    if cleaned.n_dropped:
        print(f"# dropped {cleaned.n_dropped} rows with missing values", file=sys.stderr)
    return encode(cleaned)


def _schema_for_dataset(dataset_name: str) -> str:
    return "bhdc" if dataset_name == "bhdc" else "uci"


def _feature_set(args: argparse.Namespace, d: Dataset) -> FeatureSet:
    tag = args.tag
    if tag == "beta":
        return expert_features(d.schema)
    if tag.startswith("alpha-"):
        n = int(tag.split("-", 1)[1])
        return top_n(rank(d), n, schema_name=d.schema.name)
    if tag == "eta":
        n = args.alpha_n
        if n is None:
            raise CardiokitError("--alpha-n is required with --tag eta")
        return fuse(top_n(rank(d), n, schema_name=d.schema.name), expert_features(d.schema))
    raise CardiokitError(f"unknown selection tag {tag!r}; use beta, alpha-N or eta")


def _hyperparams(args: argparse.Namespace, d: Dataset, fs: FeatureSet) -> Hyperparams:
    variant = args.classifier
    if variant == "NB":
        all_cat = all(d.schema.attribute(i).kind == CATEGORICAL for i in fs.indices)
        variant = NB_CATEGORICAL if all_cat else NB_MULTINOMIAL
    kwargs: dict = {"variant": variant}
    overrides = {
        "lr_solver_tolerance": args.lr_tol,
        "dt_criterion": args.dt_criterion,
        "dt_max_depth": args.dt_max_depth,
        "knn_k": args.knn_k,
        "nb_alpha": args.nb_alpha,
        "svm_kernel": args.svm_kernel,
        "svm_c": args.svm_c,
        "svm_rbf_gamma": args.svm_gamma,
    }
    kwargs.update({k: v for k, v in overrides.items() if v is not None})
    return Hyperparams(**kwargs)


def _write_or_print(text: str, out: str | None) -> None:
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, "utf-8")
        print(f"# wrote {path}", file=sys.stderr)
    else:
        sys.stdout.write(text)


def _parse_indices(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip() != "")
    except ValueError:
        raise CardiokitError(f"expected a comma-separated index list, got {text!r}") from None


def cmd_synth(args: argparse.Namespace) -> int:
    if args.dataset == "bhdc":
        d = synth_bhdc(args.n, args.seed)
        _write_or_print(dump_encoded_csv(d, include_header=False), args.out)
    else:
        records = synth_uci(args.dataset, args.seed)
        if args.out:
            write_raw_csv(records, args.out)
            print(f"# wrote {args.out}", file=sys.stderr)
        else:
            writer = csv.writer(sys.stdout, lineterminator="\n")
            writer.writerows(records)
    return 0


def cmd_ingest(args: argparse.Namespace) -> int:
    d = _load_encoded(args.data, args.schema, name=args.name)
    print(f"# rows={d.n_rows} dropped={d.n_dropped} features={d.n_features}", file=sys.stderr)
    _write_or_print(dump_encoded_csv(d), args.out)
    return 0


def cmd_rank(args: argparse.Namespace) -> int:
    d = _load_encoded(args.data, args.schema)
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["attribute_index", "name", "s2_between", "s2_within", "f"])
    for score in rank(d):
        writer.writerow(
            [
                score.attribute_index,
                d.schema.attribute(score.attribute_index).name,
                f"{score.s2_between:.10g}",
                f"{score.s2_within:.10g}",
                "inf" if score.f == float("inf") else f"{score.f:.10g}",
            ]
        )
    _write_or_print(out.getvalue(), args.out)
    return 0


def cmd_select(args: argparse.Namespace) -> int:
    d = _load_encoded(args.data, args.schema)
    fs = _feature_set(args, d)
    names = [d.schema.attribute(i).name for i in fs.indices]
    print(f"# tag={fs.tag} size={len(fs)}", file=sys.stderr)
    _write_or_print(",".join(str(i) for i in fs.indices) + "\n", args.out)
    print("# " + ", ".join(names), file=sys.stderr)
    return 0


def cmd_fuse(args: argparse.Namespace) -> int:
    alpha = FeatureSet(_parse_indices(args.alpha), provenance="anova", top_n=None)
    beta = FeatureSet(_parse_indices(args.beta), provenance="expert")
    fused = fuse(alpha, beta)
    _write_or_print(",".join(str(i) for i in fused.indices) + "\n", args.out)
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    d = _load_encoded(args.data, args.schema)
    fs = _feature_set(args, d)
    h = _hyperparams(args, d, fs)
    ranking = rank(d)
    if args.full:
        train = d
    else:
        train, _ = split_stratified(d, SplitSpec(train_fraction=args.train_fraction, seed=args.seed))
    model = fit_classifier(project(train, fs), h, feature_set=fs)
    save_model(model, args.out, d.schema, ranking=ranking, dataset_name=d.name, seed=args.seed)
    print(f"# trained {h.variant} on {train.n_rows} rows, saved to {args.out}", file=sys.stderr)
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    schema = load_schema(args.schema)
    model, doc = load_model(args.model, schema=schema)
    d = _load_encoded(args.data, args.schema)
    if args.on == "test":
        seed = doc.get("seed")
        if seed is None:
            raise CardiokitError("model document has no stored seed; use --on full")
        _, subset = split_stratified(d, SplitSpec(seed=seed))
    else:
        subset = d
    fs = model.feature_set
    result = evaluate_model(model, project(subset, fs))
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    row = result.to_row()
    writer.writerow(row.keys())
    writer.writerow(["" if v is None else v for v in row.values()])
    _write_or_print(out.getvalue(), args.out)
    return 0


def cmd_cv(args: argparse.Namespace) -> int:
    d = _load_encoded(args.data, args.schema)
    fs = _feature_set(args, d)
    h = _hyperparams(args, d, fs)
    plan = make_folds(d, FoldPlan(k=args.k, seed=args.seed))
    result = cross_validate(d, fs, h, plan)
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    row = result.to_row()
    writer.writerow(row.keys())
    writer.writerow(["" if v is None else v for v in row.values()])
    _write_or_print(out.getvalue(), args.out)
    print(f"# cv_mean={result.cv_mean:.2f} cv_std={result.cv_std:.2f}", file=sys.stderr)
    return 0


def cmd_grid(args: argparse.Namespace) -> int:
    data_dir = _data_dir(args.data_dir)
    names = GRID_DATASETS if args.data == ["all"] else tuple(args.data)
    datasets = []
    for name in names:
        path = data_dir / f"{name}.csv"
        if not path.exists():
            raise CardiokitError(f"no dataset file {path}; run scripts/make_data.py or synth first")
        datasets.append(_load_encoded(path, _schema_for_dataset(name), name=name))
    config = GridConfig(seed=args.seed, k=args.k, workers=args.workers, eval_split=args.eval_split)
    grid = run_grid(datasets, config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "grid.json").write_text(serialize_grid(grid), "utf-8")
    (out_dir / "grid_long.csv").write_text(long_csv(grid), "utf-8")
    (out_dir / "tables.txt").write_text(report(grid, "table"), "utf-8")
    for filename, text in roc_documents(grid).items():
        (out_dir / filename).write_text(text, "utf-8")
    if args.save_model:
        key, model = best_model(grid)
        winner_dataset = grid.datasets[key[0]]
        save_model(
            model,
            args.save_model,
            winner_dataset.schema,
            ranking=grid.rankings[key[0]],
            dataset_name=key[0],
            seed=args.seed,
        )
        print(f"# best cell {key} persisted to {args.save_model}", file=sys.stderr)
    print(f"# grid written to {out_dir} ({len(grid.cells)} cells)", file=sys.stderr)
    if grid.has_errors:
        failed = [c.key for c in grid.cells.values() if c.error]
        print(f"# {len(failed)} cells errored: {failed}", file=sys.stderr)
        return 1
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    from .service import serve

    serve(args.model, host=args.host, port=args.port, schema_path=args.schema, ui_dir=args.ui)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cardiokit",
        description="Heart-disease prognosis pipeline: data, selection, training, evaluation, serving.",
    )
    parser.add_argument("--version", action="version", version=f"cardiokit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_seed(p):
        p.add_argument("--seed", type=int, default=42, help="random seed (default 42)")

    def add_data_schema(p):
        p.add_argument("--data", required=True, help="CSV file to load")
        p.add_argument("--schema", required=True, help="schema name (bhdc, uci) or JSON path")

    def add_selection(p):
        p.add_argument("--tag", default="beta", help="feature selection: beta, alpha-N or eta")
        p.add_argument("--alpha-n", type=int, default=None, help="top-n source for --tag eta")

    def add_hyper(p):
        p.add_argument("--classifier", default="SVM",
                       choices=["LR", "DT", "KNN", "NB", "NB-multinomial", "NB-categorical", "SVM"])
        p.add_argument("--lr-tol", type=float, default=None)
        p.add_argument("--dt-criterion", choices=["gini", "entropy"], default=None)
        p.add_argument("--dt-max-depth", type=int, default=None)
        p.add_argument("--knn-k", type=int, default=None)
        p.add_argument("--nb-alpha", type=float, default=None)
        p.add_argument("--svm-kernel", choices=["linear", "rbf"], default=None)
        p.add_argument("--svm-c", type=float, default=None)
        p.add_argument("--svm-gamma", type=float, default=None)

    p = sub.add_parser("synth", help="generate a synthetic dataset CSV")
    p.add_argument("--dataset", default="bhdc", choices=("bhdc",) + tuple(UCI_DATASET_PARAMS))
    p.add_argument("--n", type=int, default=563, help="row count (questionnaire only)")
    p.add_argument("--out", default=None)
    add_seed(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="load, clean and encode a CSV; emit the canonical dump")
    add_data_schema(p)
    p.add_argument("--name", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("rank", help="attribute ranking table as CSV")
    add_data_schema(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("select", help="emit a feature set's indices")
    add_data_schema(p)
    add_selection(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("fuse", help="fuse two comma-separated index lists")
    p.add_argument("--alpha", required=True)
    p.add_argument("--beta", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("train", help="fit one classifier and persist the model")
    add_data_schema(p)
    add_selection(p)
    add_hyper(p)
    p.add_argument("--train-fraction", type=float, default=0.70)
    p.add_argument("--full", action="store_true", help="train on all rows instead of the split")
    p.add_argument("--out", required=True, help="model JSON path")
    add_seed(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a persisted model")
    add_data_schema(p)
    p.add_argument("--model", required=True)
    p.add_argument("--on", choices=["test", "full"], default="test")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("cv", help="K-fold cross-validate one configuration")
    add_data_schema(p)
    add_selection(p)
    add_hyper(p)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--out", default=None)
    add_seed(p)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("grid", help="run the full selection-by-classifier grid")
    p.add_argument("--data", nargs="+", default=["all"],
                   help="dataset names under the data dir, or 'all'")
    p.add_argument("--data-dir", default=None, help=f"defaults to ${DATA_DIR_ENV} or ./data")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--eval-split", action="store_true",
                   help="use a 70/30 held-out evaluation instead of K-fold CV")
    p.add_argument("--out-dir", default="out")
    p.add_argument("--save-model", default=None, help="persist the winning cell's model here")
    add_seed(p)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("serve", help="run the HTTP prediction service")
    p.add_argument("--model", required=True)
    p.add_argument("--schema", default=None, help="override the schema referenced by the model")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--ui", default=None, help="directory of a built questionnaire bundle")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _header(args, args.command)
    try:
        return args.func(args)
    except CardiokitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
