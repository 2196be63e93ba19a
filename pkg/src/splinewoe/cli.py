"""Command-line interface.

Every tabular output is tab separated with a header row. Exit status is 0
on success, 1 for data or model problems and 2 for usage errors.
"""

from __future__ import annotations

import argparse
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from .data import DataError, Schema, load_csv
from .glm import RankDeficientError
from .metrics import MetricReport, evaluate
from .model import ModelFormatError, PipelineModel
from .tuning import (CRITERIA, DEFAULT_GRID, WOE_DF, PipelineConfig, PipelineError, TuningGrid,
                     cross_validate, fit_pipeline)
from .woe import UnseenCategoryError

__all__ = ["main", "parse_grid", "build_parser"]

PROG = "splinewoe"


def parse_grid(text: str) -> tuple[float, ...]:
    """``"0.1,1,10"`` or ``"exp:a:b:n"`` (n values e^a .. e^b, evenly spaced
    exponents)."""
    text = text.strip()
    try:
        if text.startswith("exp:"):
            a, b, n = text[4:].split(":")
            n = int(n)
            if n < 1:
                raise ValueError
            return tuple(float(v) for v in np.exp(np.linspace(float(a), float(b), n)))
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"bad grid {text!r}: use comma-separated values or exp:a:b:n") from None
    if not vals or any(not math.isfinite(v) or v < 0 for v in vals):
        raise argparse.ArgumentTypeError(f"bad grid {text!r}: values must be finite and >= 0")
    return vals


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _ratio(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if v == 0 or not math.isfinite(v):
        raise argparse.ArgumentTypeError("severity ratio must be finite and nonzero")
    return v


def _tuning_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid-cat", type=parse_grid, default=DEFAULT_GRID, metavar="GRID")
    p.add_argument("--grid-uc", type=parse_grid, default=DEFAULT_GRID, metavar="GRID")
    p.add_argument("--grid-c", type=parse_grid, default=DEFAULT_GRID, metavar="GRID")
    p.add_argument("--criterion", choices=CRITERIA, default="aic")
    p.add_argument("--woe-df", choices=WOE_DF, default="bic",
                   help="charge per extra clustered WOE level when tuning lambda_cat")
    p.add_argument("--n-jobs", type=_positive_int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=PROG, description="Spline binning and WOE encodings "
                                     "for interpretable logistic regression.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("fit", help="tune and fit a model")
    p.add_argument("--data", required=True, type=Path)
    p.add_argument("--schema", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    _tuning_options(p)
    p.add_argument("--folds", type=_positive_int, default=5,
                   help="internal folds for the auc/h criteria")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", type=Path, metavar="DIR",
                   help="write one TSV per tuning stage into DIR")

    for name, helptext in (("transform", "write the model's design matrix"),
                           ("predict", "write predicted probabilities")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--model", required=True, type=Path)
        p.add_argument("--data", required=True, type=Path)
        p.add_argument("--out", required=True, type=Path)
        p.add_argument("--unseen-policy", choices=("overall_logodds", "error"),
                       default="overall_logodds")

    p = sub.add_parser("evaluate", help="AUC, weighted Brier score and H-measure")
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--data", required=True, type=Path)
    p.add_argument("--severity-ratio", type=_ratio, default=None)
    p.add_argument("--unseen-policy", choices=("overall_logodds", "error"),
                   default="overall_logodds")
    p.add_argument("--out", type=Path, help="write the table here instead of stdout")

    p = sub.add_parser("cv", help="cross-validated metrics of the whole pipeline")
    p.add_argument("--data", required=True, type=Path)
    p.add_argument("--schema", required=True, type=Path)
    p.add_argument("--folds", type=_positive_int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--severity-ratio", type=_ratio, default=None)
    _tuning_options(p)
    p.add_argument("--out", type=Path, help="write the table here instead of stdout")

    p = sub.add_parser("export-plot", help="tables for plotting smooths and WOE values")
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path, metavar="DIR")
    p.add_argument("--points", type=_positive_int, default=200)

    p = sub.add_parser("coef", help="coefficient table of the final GLM")
    p.add_argument("--model", required=True, type=Path)
    p.add_argument("--out", type=Path, help="write the table here instead of stdout")
    return parser


def _config(args) -> PipelineConfig:
    grid = TuningGrid(args.grid_cat, args.grid_uc, args.grid_c)
    folds = args.folds if args.command == "fit" else 5
    seed = args.seed if args.command == "fit" else 0
    return PipelineConfig(grid=grid, criterion=args.criterion, folds=folds, seed=seed,
                          woe_df=args.woe_df, n_jobs=args.n_jobs)


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _fmt_row(values) -> str:
    return "\t".join(repr(float(v)) for v in values)


def _cmd_fit(args) -> None:
    schema = Schema.from_file(args.schema)
    ds = load_csv(args.data, schema)
    if ds.rejected_count:
        print(f"{PROG}: skipped {ds.rejected_count} rows with missing values", file=sys.stderr)
    model = fit_pipeline(ds, schema, _config(args))
    model.save(args.out)
    if args.trace is not None:
        args.trace.mkdir(parents=True, exist_ok=True)
        for tr in model.traces:
            (args.trace / f"trace_{tr.stage}.tsv").write_text(tr.to_tsv(), encoding="utf-8")


def _load_for_model(args):
    model = PipelineModel.load(args.model)
    ds = load_csv(args.data, model.schema, require_response=False)
    return model, ds


def _cmd_transform(args) -> None:
    model, ds = _load_for_model(args)
    X = model.transform(ds, args.unseen_policy)
    lines = ["\t".join(model.names)] + [_fmt_row(r) for r in X]
    args.out.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _cmd_predict(args) -> None:
    model, ds = _load_for_model(args)
    p = model.predict(ds, args.unseen_policy)
    args.out.write_text("probability\n" + "".join(f"{float(v)!r}\n" for v in p), encoding="utf-8")


def _cmd_evaluate(args) -> None:
    model = PipelineModel.load(args.model)
    ds = load_csv(args.data, model.schema)
    rep = evaluate(model.predict(ds, args.unseen_policy), ds.response, args.severity_ratio)
    _emit(MetricReport.tsv_header() + "\n" + rep.tsv_row() + "\n", args.out)


def _cmd_cv(args) -> None:
    schema = Schema.from_file(args.schema)
    ds = load_csv(args.data, schema)
    reports = cross_validate(ds, schema, _config(args), folds=args.folds, seed=args.seed,
                             severity_ratio=args.severity_ratio)
    lines = ["fold\t" + MetricReport.tsv_header()]
    lines += [f"{i}\t{r.tsv_row()}" for i, r in enumerate(reports, 1)]
    means = [float(np.mean([getattr(r, k) for r in reports])) for k in ("auc", "wbrier", "h")]
    lines.append("mean\t" + "\t".join(repr(v) for v in means) + "\t" * 5)
    _emit("\n".join(lines) + "\n", args.out)


def _cmd_export_plot(args) -> None:
    model = PipelineModel.load(args.model)
    args.out.mkdir(parents=True, exist_ok=True)
    for col in model.smooths:
        (args.out / f"smooth_{col}.tsv").write_text(model.smooth_table(col, args.points),
                                                    encoding="utf-8")
    for col in model.woe_maps:
        (args.out / f"woe_{col}.tsv").write_text(model.woe_table(col), encoding="utf-8")


def _cmd_coef(args) -> None:
    model = PipelineModel.load(args.model)
    if model.glm is None:
        raise ModelFormatError("model has no fitted GLM")
    _emit(model.coef_table(), args.out)


COMMANDS = {
    "fit": _cmd_fit,
    "transform": _cmd_transform,
    "predict": _cmd_predict,
    "evaluate": _cmd_evaluate,
    "cv": _cmd_cv,
    "export-plot": _cmd_export_plot,
    "coef": _cmd_coef,
}

# failures caused by inputs rather than by the program
INPUT_ERRORS = (DataError, ModelFormatError, PipelineError, UnseenCategoryError,
                RankDeficientError, KeyError, OSError, ValueError)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            warnings.showwarning = _warn_to_stderr
            COMMANDS[args.command](args)
    except INPUT_ERRORS as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"{PROG}: error: {msg}", file=sys.stderr)
        return 1
    return 0


def _warn_to_stderr(message, category, filename, lineno, file=None, line=None):
    print(f"{PROG}: warning: {message}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
