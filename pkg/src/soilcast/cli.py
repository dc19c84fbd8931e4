"""Command-line entry point: synth, train, eval, compare, select, boost, predict."""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .cfs import build_correlations, best_first_search
from .dataset import DataError, add_noise_attributes, load_csv, synthesize_soil_dataset, write_csv
from .evaluation import (
    compare, cross_validate, render_comparison, render_report, reports_to_csv, reports_to_json,
)
from .learners import ALGORITHMS, BOOST_SELECTED, SELECT_THEN_BOOST, Pipeline, fit_pipeline
from .model_io import ModelFile, ModelFormatError, load_model, save_model

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2
SEED_ENV = "SOILCAST_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 1
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _class_column(value: str):
    try:
        return int(value)
    except ValueError:
        return value


def _add_data(p, required=True):
    p.add_argument("--data", required=required, help="CSV dataset")
    p.add_argument("--class-column", default="-1", type=_class_column,
                   help="class column name or index (default: last column)")
    p.add_argument("--missing-token", default="?", help="token marking missing cells (default: ?)")
    p.add_argument("--no-header", action="store_true", help="the CSV has no header row")


def _add_seed(p):
    p.add_argument("--seed", type=int, default=None, help=f"random seed (default: ${SEED_ENV} or 1)")


def _add_output(p, decimals):
    p.add_argument("--decimals", type=int, default=decimals, help="accuracy decimals in the table")
    p.add_argument("--out", help="also write the report to this .csv or .json file")


def _add_pipeline(p, algo_flag="--algo"):
    p.add_argument(algo_flag, dest="algo", default="j48", choices=sorted(ALGORITHMS), help="base learner")
    p.add_argument("--select", choices=["cfs"], default=None, help="attribute selection")
    p.add_argument("--selection-scope", choices=["fold", "dataset"], default="fold",
                   help="select inside each CV training fold (default) or once on the full dataset")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="soilcast", description="Decision-tree toolkit for soil-fertility classification.")
    parser.add_argument("--version", action="version", version=f"soilcast {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="write a synthetic soil dataset")
    p.add_argument("--n", type=int, default=1988)
    p.add_argument("--sep", type=float, default=2.0, help="class separation (larger means less overlap)")
    p.add_argument("--noise-attrs", type=int, default=0, help="append this many irrelevant columns")
    p.add_argument("--out", required=True)
    _add_seed(p)

    p = sub.add_parser("train", help="train a pipeline and save the model")
    _add_data(p)
    _add_pipeline(p)
    p.add_argument("--boost", type=int, default=0, metavar="N", help="AdaBoost.M1 iterations (0 = off)")
    p.add_argument("--out", required=True, help="model file to write")
    _add_seed(p)

    p = sub.add_parser("eval", help="cross-validate one pipeline")
    _add_data(p)
    _add_pipeline(p)
    p.add_argument("--boost", type=int, default=0, metavar="N")
    p.add_argument("--cv", type=int, default=10)
    _add_output(p, 4)
    _add_seed(p)

    p = sub.add_parser("compare", help="cross-validate several learners on identical folds")
    _add_data(p)
    p.add_argument("--algos", default="j48,cart,nbtree", help="comma-separated learners")
    p.add_argument("--cv", type=int, default=10)
    _add_output(p, 2)
    _add_seed(p)

    p = sub.add_parser("select", help="run CFS best-first selection on a dataset")
    _add_data(p)
    p.add_argument("--max-stale", type=int, default=5)

    p = sub.add_parser("boost", help="cross-validate an AdaBoost.M1 pipeline")
    _add_data(p)
    _add_pipeline(p, "--base")
    p.add_argument("--iterations", type=int, default=10)
    p.add_argument("--nesting", choices=[SELECT_THEN_BOOST, BOOST_SELECTED], default=SELECT_THEN_BOOST)
    p.add_argument("--resample", action="store_true", help="train members on weighted bootstrap samples")
    p.add_argument("--cv", type=int, default=10)
    _add_output(p, 4)
    _add_seed(p)

    p = sub.add_parser("predict", help="label the rows of a CSV file with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--missing-token", default="?")
    return parser


def _load(args):
    return load_csv(args.data, args.class_column, header=not args.no_header, missing_token=args.missing_token)


def _seed(args) -> int:
    return args.seed if args.seed is not None else _default_seed()


def _write_reports(reports, path, decimals):
    path = Path(path)
    if path.suffix.lower() == ".json":
        path.write_text(reports_to_json(reports, decimals), encoding="utf-8")
    else:
        path.write_text(reports_to_csv(reports, decimals), encoding="utf-8")


def cmd_synth(args, out) -> int:
    d = synthesize_soil_dataset(args.n, _seed(args), args.sep)
    if args.noise_attrs:
        d = add_noise_attributes(d, args.noise_attrs, _seed(args))
    write_csv(d, args.out)
    counts = ", ".join(f"{name}={c}" for name, c in zip(d.class_attribute.nominal_values, d.class_counts()))
    out.write(f"wrote {d.n_instances} instances x {len(d.attributes)} columns to {args.out} ({counts})\n")
    return EXIT_OK


def _pipeline(args, iterations, nesting=SELECT_THEN_BOOST, resample=False) -> Pipeline:
    return Pipeline(algo=args.algo, select=args.select, boost_iterations=iterations, nesting=nesting,
                    resample=resample, selection_scope=getattr(args, "selection_scope", "fold"),
                    seed=_seed(args))


def cmd_train(args, out) -> int:
    d = _load(args)
    p = _pipeline(args, args.boost)
    model = fit_pipeline(p, d)
    save_model(ModelFile.for_dataset(p, d, model), args.out)
    out.write(f"trained {p.name} on {d.n_instances} instances; model written to {args.out}\n")
    subset = getattr(model, "subset", None)
    if subset is not None:
        names = [d.attributes[j].name for j in subset.attribute_indices]
        out.write(f"selected attributes: {', '.join(names) or '(none)'} (merit {subset.merit:.4f})\n")
    return EXIT_OK


def _single_report(args, p: Pipeline, out) -> int:
    d = _load(args)
    r = cross_validate(d, p, args.cv, _seed(args))
    out.write(render_report(r, args.decimals))
    if args.out:
        _write_reports([r], args.out, 4)
    return EXIT_OK


def cmd_eval(args, out) -> int:
    return _single_report(args, _pipeline(args, args.boost), out)


def cmd_boost(args, out) -> int:
    return _single_report(args, _pipeline(args, args.iterations, args.nesting, args.resample), out)


def cmd_compare(args, out) -> int:
    algos = [a.strip().lower() for a in args.algos.split(",") if a.strip()]
    for a in algos:
        if a not in ALGORITHMS:
            raise UsageError(f"unknown learner {a!r}; expected one of {', '.join(sorted(ALGORITHMS))}")
    if len(algos) < 2:
        raise UsageError("compare needs at least two learners")
    d = _load(args)
    seed = _seed(args)
    reports = compare(d, [Pipeline(algo=a, seed=seed) for a in algos], args.cv, seed)
    out.write(f"{args.cv}-fold stratified cross-validation, seed {seed}, {d.n_instances} instances\n")
    out.write(render_comparison(reports, args.decimals))
    if args.out:
        _write_reports(reports, args.out, 4)
    return EXIT_OK


def cmd_select(args, out) -> int:
    d = _load(args)
    cache = build_correlations(d)
    subset = best_first_search(cache, args.max_stale)
    out.write("attribute  class correlation (symmetric uncertainty)\n")
    for j in cache.attributes:
        mark = "*" if j in subset.attribute_indices else " "
        out.write(f"{mark} {d.attributes[j].name:<10s} {cache.r_cf[j]:.4f}\n")
    names = [d.attributes[j].name for j in subset.attribute_indices]
    out.write(f"selected {len(names)} of {len(cache.attributes)}: {', '.join(names) or '(none)'}\n")
    out.write(f"merit {subset.merit:.6f}\n")
    return EXIT_OK


def _read_prediction_rows(mf: ModelFile, path, missing_token) -> np.ndarray:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path}: empty input")
    header = [c.strip() for c in rows[0]]
    names = [a.name for a in mf.attributes]
    class_name = names[mf.class_index]
    for h in header:
        if h not in names:
            raise DataError(f"{path}: column {h!r} is not part of the model schema")
    for j, name in enumerate(names):
        if j != mf.class_index and name not in header:
            raise DataError(f"{path}: required column {name!r} is missing")
    X = np.full((len(rows) - 1, len(names)), np.nan)
    for i, r in enumerate(rows[1:]):
        if len(r) != len(header):
            raise DataError(f"{path}:{i + 2}: expected {len(header)} fields, found {len(r)}")
        for h, tok in zip(header, r):
            tok = tok.strip()
            if h == class_name or tok == missing_token:
                continue
            j = names.index(h)
            try:
                X[i, j] = mf.attributes[j].encode(tok)
            except ValueError:
                raise DataError(f"{path}:{i + 2}: invalid value {tok!r} for column {h!r}") from None
    return X


def cmd_predict(args, out) -> int:
    mf = load_model(args.model)
    X = _read_prediction_rows(mf, args.input, args.missing_token)
    proba = mf.model.predict_proba(X)
    labels = mf.class_values
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["predicted"] + [f"P({c})" for c in labels])
    for p in proba:
        w.writerow([labels[int(np.argmax(p))]] + [f"{v:.6f}" for v in p])
    return EXIT_OK


COMMANDS = {"synth": cmd_synth, "train": cmd_train, "eval": cmd_eval, "compare": cmd_compare,
            "select": cmd_select, "boost": cmd_boost, "predict": cmd_predict}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (DataError, ModelFormatError, ValueError, OSError) as exc:
        print(f"soilcast: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
