"""Two-stage tuning and the end-to-end fitting pipeline.

Stage order:

1. categorical encodings; clustered WOE columns get their cluster counts
   from a grid over ``lambda_cat`` scored by a GAM fit;
2. a GAM with smooths for the nonlinear continuous columns and smoothing
   parameters chosen by AIC;
3. smooths with edf at most 1.1 are demoted to linear terms;
4. a cross-grid over ``(lambda_uc, lambda_c)`` picks the bin count of every
   remaining smooth, each candidate scored by a logistic GLM on the binned
   columns;
5. the winning GLM becomes the final model.

Within one stage every grid point is independent; candidates are cached by
their tuple of bin/cluster counts, since many lambdas map to the same
counts. Grid points may be evaluated on a thread pool and results are
always merged in grid order.
"""

from __future__ import annotations

import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .binning import apply_step, binning_path, step_from_partition
from .cluster1d import choose_k
from .data import Dataset, Schema, split_folds
from .gam import (DEFAULT_LAMBDA_GRID, LINEAR_EDF_THRESHOLD, GamFit, TermSpec, build_design,
                  fit_gam, is_effectively_linear, predict_gam, select_smoothing,
                  term_values_and_variance)
from .glm import RankDeficientError, SeparationWarning, fit_glm, predict_glm
from .metrics import MetricReport, auc, evaluate, h_measure
from .model import (Feature, PipelineModel, StoredSmooth, source_date,
                    step_feature_name, woe_feature_name)
from .woe import (DEFAULT_OFFSET, apply_woe, select_woe_clusters, summarize_categories, woe_cluster_path,
                  woe_raw, woe_shrunk)

__all__ = [
    "DEFAULT_GRID",
    "TuningGrid",
    "PipelineConfig",
    "TraceRow",
    "TuningTrace",
    "PipelineError",
    "tune_lambda_cat",
    "tune_lambda_continuous",
    "fit_pipeline",
    "cross_validate",
]

DEFAULT_GRID = tuple(float(v) for v in np.exp(np.linspace(-10.0, 2.0, 13)))
CRITERIA = ("aic", "auc", "h")
WOE_DF = ("bic", "aic", "none")


class PipelineError(RuntimeError):
    """A failure inside one pipeline stage."""

    def __init__(self, stage: str, exc: Exception):
        super().__init__(f"{stage}: {exc}")
        self.stage = stage


def _clean_grid(values, name):
    vals = tuple(sorted({float(v) for v in values}))
    if not vals:
        raise ValueError(f"{name} grid is empty")
    if vals[0] < 0 or not np.all(np.isfinite(vals)):
        raise ValueError(f"{name} grid values must be finite and nonnegative")
    return vals


@dataclass(frozen=True)
class TuningGrid:
    """Candidate penalties; stored sorted ascending without duplicates."""

    lambda_cat: tuple = DEFAULT_GRID
    lambda_uc: tuple = DEFAULT_GRID
    lambda_c: tuple = DEFAULT_GRID

    def __post_init__(self):
        for name in ("lambda_cat", "lambda_uc", "lambda_c"):
            object.__setattr__(self, name, _clean_grid(getattr(self, name), name))


@dataclass(frozen=True)
class PipelineConfig:
    """Settings for :func:`fit_pipeline`.

    ``woe_df`` sets the charge for the K - 1 free levels of a clustered
    WOE column when scoring ``lambda_cat`` candidates: ``"bic"`` adds
    log(n) (K - 1), ``"aic"`` adds 2 (K - 1) and ``"none"`` adds nothing.
    Without a charge in-sample AIC always prefers the unclustered encoding,
    and with the AIC charge it still keeps splits that the clustering found
    by chasing noise, since a data-chosen partition costs more than K - 1
    degrees of freedom.
    ``folds`` and ``seed`` set the internal cross-validation used by the
    ``auc`` and ``h`` criteria.
    """

    grid: TuningGrid = field(default_factory=TuningGrid)
    criterion: str = "aic"
    folds: int = 5
    seed: int = 0
    smoothing_grid: tuple = DEFAULT_LAMBDA_GRID
    demote_edf: float = LINEAR_EDF_THRESHOLD
    offset: float = DEFAULT_OFFSET
    woe_df: str = "bic"
    n_jobs: int = 1

    def __post_init__(self):
        if self.criterion not in CRITERIA:
            raise ValueError(f"criterion must be one of {CRITERIA}")
        if self.woe_df not in WOE_DF:
            raise ValueError(f"woe_df must be one of {WOE_DF}")

    def level_charge(self, n: int) -> float:
        """Score added per extra level of a clustered WOE column."""
        return {"bic": float(np.log(n)), "aic": 2.0, "none": 0.0}[self.woe_df]


@dataclass
class TraceRow:
    params: dict
    ks: dict
    aic: float
    score: float
    wall: float
    converged: bool


@dataclass
class TuningTrace:
    stage: str
    param_names: tuple
    rows: list = field(default_factory=list)
    winner: int | None = None
    criterion: str = "aic"

    def to_tsv(self, include_time: bool = False) -> str:
        """One row per grid point. Wall times are off by default so the
        file is reproducible."""
        knames = sorted({k for r in self.rows for k in r.ks})
        head = [*self.param_names, *[f"k[{k}]" for k in knames], "aic", "score", "converged",
                "winner"]
        if include_time:
            head.append("seconds")
        lines = ["\t".join(head)]
        for i, r in enumerate(self.rows):
            vals = [repr(r.params[p]) for p in self.param_names]
            vals += [str(r.ks.get(k, "")) for k in knames]
            vals += [repr(r.aic), repr(r.score), str(int(r.converged)), str(int(i == self.winner))]
            if include_time:
                vals.append(f"{r.wall:.6f}")
            lines.append("\t".join(vals))
        return "\n".join(lines) + "\n"


def _map(fn, items, n_jobs):
    if n_jobs is None or n_jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n_jobs) as ex:
        return list(ex.map(fn, items))


def _winner(scores) -> int:
    """First index attaining the minimum (grids are ascending, so ties go to
    the smallest lambda, lexicographically for cross-grids)."""
    scores = np.asarray(scores, dtype=float)
    if not np.any(np.isfinite(scores)):
        raise ValueError("no grid point produced a usable fit")
    return int(np.flatnonzero(scores == np.min(scores))[0])


def _metric(name, p, y):
    return auc(p, y) if name == "auc" else h_measure(p, y)


def _folds(ds: Dataset, config: PipelineConfig):
    fa = split_folds(ds.response, config.folds, config.seed)
    return [fa.train_test(f) for f in range(1, config.folds + 1)]


# ---------------------------------------------------------------- encodings

def _cwoe_columns(schema: Schema):
    return [c for c in schema.predictors if c.role == "categorical" and c.treatment == "cwoe"]


def _fixed_maps(ds: Dataset, schema: Schema, offset: float) -> dict:
    maps = {}
    for c in schema.predictors:
        if c.role == "categorical" and c.treatment in ("woe", "swoe"):
            s = summarize_categories(ds[c.name], ds.response)
            maps[c.name] = woe_raw(s, offset) if c.treatment == "woe" else woe_shrunk(s, offset)
    return maps


class _CwoePaths:
    """Per clustered column: summary and the k = 1..J clustering path."""

    def __init__(self, ds: Dataset, schema: Schema, offset: float):
        self.offset = offset
        self.items = {}
        for c in _cwoe_columns(schema):
            s = summarize_categories(ds[c.name], ds.response)
            self.items[c.name] = (s, woe_cluster_path(s, offset))

    def maps(self, lam: float) -> tuple[dict, dict]:
        ks, maps = {}, {}
        for name, (s, path) in self.items.items():
            k, m = select_woe_clusters(s, lam, self.offset, path)
            ks[name], maps[name] = k, m
        return ks, maps

    def raw_maps(self) -> dict:
        return {name: woe_raw(s, self.offset) for name, (s, _) in self.items.items()}


def _encode(ds: Dataset, schema: Schema, offset: float, lam_cat: float | None) -> dict:
    """All categorical maps fitted on ``ds``; clustered ones at ``lam_cat``."""
    maps = _fixed_maps(ds, schema, offset)
    paths = _CwoePaths(ds, schema, offset)
    if paths.items:
        maps.update(paths.maps(lam_cat)[1] if lam_cat is not None else paths.raw_maps())
    return maps


# ---------------------------------------------------------------- GAM stage

def _gam_inputs(ds: Dataset, schema: Schema, maps: dict, demoted=()):
    """Columns and term specs in schema order; constant woe columns dropped."""
    cols, specs = {}, []
    for c in schema.predictors:
        if c.role == "categorical":
            m = maps[c.name]
            if m.k < 2:
                continue
            name = woe_feature_name(c.name, c.treatment)
            cols[name] = apply_woe(ds[c.name], m)
            specs.append(TermSpec(name, "linear"))
        elif c.role == "continuous_linear" or c.name in demoted:
            cols[c.name] = ds[c.name]
            specs.append(TermSpec(c.name, "linear"))
        elif c.role == "continuous_cyclic":
            cols[c.name] = ds[c.name]
            specs.append(TermSpec(c.name, "cyclic_smooth", q=c.q, period=c.period))
        else:
            cols[c.name] = ds[c.name]
            specs.append(TermSpec(c.name, "smooth", q=c.q))
    return cols, specs


def _quiet(fn, *args, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SeparationWarning)
        warnings.simplefilter("ignore", RuntimeWarning)
        return fn(*args, **kw)


def _gam_design(ds, schema, maps, demoted=()):
    cols, specs = _gam_inputs(ds, schema, maps, demoted)
    return build_design(cols, specs, n=ds.n), cols


# ---------------------------------------------------------------- stage 1

def tune_lambda_cat(dataset: Dataset, schema: Schema, grid: TuningGrid | None = None,
                    config: PipelineConfig | None = None, smoothing: dict | None = None):
    """Choose ``lambda_cat`` for the clustered WOE columns.

    For every grid value each clustered column gets the cluster count
    minimising WCSS_k + lambda k, the encoded data are fitted by a GAM at
    fixed smoothing parameters (chosen once with unclustered encodings
    unless given), and the AIC is recorded.

    Returns
    -------
    (lambda_cat, ks, maps, trace); ``lambda_cat`` is None and the trace is
    empty when the schema has no clustered WOE column.
    """
    config = config or PipelineConfig()
    grid = grid or config.grid
    trace = TuningTrace("lambda_cat", ("lambda_cat",), criterion=config.criterion)
    if not _cwoe_columns(schema):
        return None, {}, {}, trace
    paths = _CwoePaths(dataset, schema, config.offset)
    fixed = _fixed_maps(dataset, schema, config.offset)
    if smoothing is None:
        design, _ = _gam_design(dataset, schema, {**fixed, **paths.raw_maps()})
        smoothing, _ = _quiet(select_smoothing, design, dataset.response, config.smoothing_grid)

    y = dataset.response
    cache = {}

    def evaluate_ks(item):
        key, maps = item
        t0 = time.perf_counter()
        try:
            design, _ = _gam_design(dataset, schema, {**fixed, **maps})
            fit = _quiet(fit_gam, design, y, smoothing)
            aic = fit.aic
            aic += config.level_charge(dataset.n) * sum(m.k - 1 for m in maps.values())
            ok = fit.converged
        except (RankDeficientError, np.linalg.LinAlgError, ValueError):
            aic, ok = np.inf, False
        return key, aic, ok, time.perf_counter() - t0

    points = []
    todo = []
    for lam in grid.lambda_cat:
        ks, maps = paths.maps(lam)
        key = tuple(sorted(ks.items()))
        points.append((lam, ks, maps, key))
        if key not in cache:
            cache[key] = None
            todo.append((key, maps))
    for key, aic, ok, wall in _map(evaluate_ks, todo, config.n_jobs):
        cache[key] = (aic, ok, wall)

    scores = [cache[p[3]][0] for p in points]
    if config.criterion != "aic":
        scores = _cat_cv_scores(dataset, schema, grid, config, smoothing)
    for (lam, ks, _, key), score in zip(points, scores):
        aic, ok, wall = cache[key]
        trace.rows.append(TraceRow({"lambda_cat": lam}, dict(ks), aic, score, wall, ok))
    trace.winner = _winner([r.score for r in trace.rows])
    lam, ks, maps, _ = points[trace.winner]
    return lam, ks, maps, trace


def _cat_cv_scores(ds, schema, grid, config, smoothing):
    """Mean held-out -metric per lambda_cat (maps refitted on each training fold)."""
    totals = np.zeros(len(grid.lambda_cat))
    for train_idx, test_idx in _folds(ds, config):
        tr, te = ds.subset(train_idx), ds.subset(test_idx)
        paths = _CwoePaths(tr, schema, config.offset)
        fixed = _fixed_maps(tr, schema, config.offset)
        cache = {}
        for i, lam in enumerate(grid.lambda_cat):
            ks, maps = paths.maps(lam)
            key = tuple(sorted(ks.items()))
            if key not in cache:
                try:
                    design, _ = _gam_design(tr, schema, {**fixed, **maps})
                    fit = _quiet(fit_gam, design, tr.response, smoothing)
                    cols, _ = _gam_inputs(te, schema, {**fixed, **maps})
                    p = predict_gam(fit, cols) if fit.terms else np.full(te.n, np.mean(tr.response))
                    cache[key] = -_metric(config.criterion, p, te.response)
                except (RankDeficientError, np.linalg.LinAlgError, ValueError):
                    cache[key] = np.inf
            totals[i] += cache[key]
    return list(totals / config.folds)


# ---------------------------------------------------------------- stage 4

@dataclass
class _Binner:
    """Precomputed binning path for one smooth term."""

    name: str
    mode: str
    period: float | None
    x: np.ndarray
    z: np.ndarray
    path: list
    smooth: StoredSmooth

    def step(self, k):
        return step_from_partition(self.path[k - 1], self.x, self.z, self.mode, self.name,
                                   self.period)

    def choose(self, lam):
        wcss = np.array([p.wcss for p in self.path]) / self.x.size
        return choose_k(wcss, lam)

    def apply(self, step, x):
        if step.mode == "constrained":
            return apply_step(step, x_new=x)
        return apply_step(step, z_new=self.smooth.values(x))


def _stored_smooth(fit: GamFit, name: str, x) -> StoredSmooth:
    t = fit.design.term(name)
    return StoredSmooth(t.basis, fit.coef[t.cols].copy(), fit.cov[t.cols, t.cols].copy(),
                        float(np.min(x)), float(np.max(x)))


def _binners(ds: Dataset, schema: Schema, fit: GamFit) -> list[_Binner]:
    out = []
    for c in schema.predictors:
        if c.binning_mode is None:
            continue
        try:
            t = fit.design.term(c.name)
        except KeyError:
            continue
        if not t.is_smooth:
            continue
        x = np.asarray(ds[c.name], dtype=float)
        z, var = term_values_and_variance(fit, c.name, x)
        path = binning_path(x, z, var, c.binning_mode, c.kmax, c.period)
        out.append(_Binner(c.name, c.binning_mode, c.period, x, z, path,
                           _stored_smooth(fit, c.name, x)))
    return out


def _plan(schema: Schema, maps: dict, binners: list[_Binner]):
    """Features in schema order (steps filled in per candidate)."""
    binned = {b.name for b in binners}
    feats = []
    for c in schema.predictors:
        if c.role == "categorical":
            if maps[c.name].k >= 2:
                feats.append(Feature(woe_feature_name(c.name, c.treatment), c.name, "woe"))
        elif c.name in binned:
            feats.append(Feature(step_feature_name(c.name), c.name, "step"))
        else:
            feats.append(Feature(c.name, c.name, "linear"))
    return feats


def _provisional_model(schema, feats, maps, binners, ks):
    steps, smooths, used = {}, {}, []
    for b in binners:
        st = b.step(ks[b.name])
        if st.k >= 2:
            steps[b.name] = st
            smooths[b.name] = b.smooth
    for f in feats:
        if f.kind == "step" and f.source not in steps:
            continue
        used.append(f)
    return PipelineModel(schema, used, dict(maps), smooths, steps)


def _continuous_points(grid: TuningGrid, binners):
    has_uc = any(b.mode == "unconstrained" for b in binners)
    has_c = any(b.mode == "constrained" for b in binners)
    g_uc = grid.lambda_uc if has_uc else grid.lambda_uc[:1]
    g_c = grid.lambda_c if has_c else grid.lambda_c[:1]
    return [(a, b) for a in g_uc for b in g_c]


def _ks_for(binners, lam_uc, lam_c):
    return {b.name: b.choose(lam_uc if b.mode == "unconstrained" else lam_c) for b in binners}


def tune_lambda_continuous(dataset: Dataset, schema: Schema, grid: TuningGrid | None,
                           gamfit: GamFit, woe_maps: dict, config: PipelineConfig | None = None,
                           lambda_cat: float | None = None):
    """Cross-grid over (lambda_uc, lambda_c) for binning the smooth terms.

    Each grid point sets the bin count of every smooth by WCSS_k / n +
    lambda k (lambda_uc for unconstrained terms, lambda_c for constrained
    ones), replaces the smooths by their step functions and fits a GLM
    together with the linear and WOE columns; smooths binned to a single
    level drop out. A grid collapses to its first value when no term uses
    it.

    Returns
    -------
    (lambda_uc, lambda_c, model, trace) where ``model`` is the winning
    candidate as a :class:`PipelineModel` with its GLM fitted.
    """
    config = config or PipelineConfig()
    grid = grid or config.grid
    binners = _binners(dataset, schema, gamfit)
    feats = _plan(schema, woe_maps, binners)
    y = dataset.response
    trace = TuningTrace("lambda_continuous", ("lambda_uc", "lambda_c"), criterion=config.criterion)
    points = _continuous_points(grid, binners)
    cache = {}

    def evaluate_ks(key):
        t0 = time.perf_counter()
        model = _provisional_model(schema, feats, woe_maps, binners, dict(key))
        try:
            X = model.transform(dataset)
            fit = _quiet(fit_glm, X, y, names=model.names)
            model.glm = fit
            aic, ok = fit.aic, fit.converged
        except (RankDeficientError, np.linalg.LinAlgError, ValueError):
            aic, ok = np.inf, False
        return key, model, aic, ok, time.perf_counter() - t0

    keyed = []
    todo = []
    for lam_uc, lam_c in points:
        key = tuple(sorted(_ks_for(binners, lam_uc, lam_c).items()))
        keyed.append(key)
        if key not in cache:
            cache[key] = None
            todo.append(key)
    for key, model, aic, ok, wall in _map(evaluate_ks, todo, config.n_jobs):
        cache[key] = (model, aic, ok, wall)

    if config.criterion == "aic":
        scores = [cache[k][1] for k in keyed]
    else:
        scores = _continuous_cv_scores(dataset, schema, points, gamfit, config, lambda_cat)
    for (lam_uc, lam_c), key, score in zip(points, keyed, scores):
        model, aic, ok, wall = cache[key]
        trace.rows.append(TraceRow({"lambda_uc": lam_uc, "lambda_c": lam_c}, dict(key), aic,
                                   score, wall, ok))
    trace.winner = _winner([r.score for r in trace.rows])
    lam_uc, lam_c = points[trace.winner]
    return lam_uc, lam_c, cache[keyed[trace.winner]][0], trace


def _continuous_cv_scores(ds, schema, points, gamfit: GamFit, config, lam_cat):
    """Mean held-out -metric per grid point; encodings and the GAM are refitted
    on each training fold with the full-data smoothing parameters."""
    smoothing = {t.name: t.lam for t in gamfit.terms if t.is_smooth}
    demoted = {t.name for t in gamfit.terms if t.kind == "linear"}
    totals = np.zeros(len(points))
    for train_idx, test_idx in _folds(ds, config):
        tr, te = ds.subset(train_idx), ds.subset(test_idx)
        maps = _encode(tr, schema, config.offset, lam_cat)
        design, _ = _gam_design(tr, schema, maps, demoted)
        fit = _quiet(fit_gam, design, tr.response, smoothing)
        binners = _binners(tr, schema, fit)
        feats = _plan(schema, maps, binners)
        cache = {}
        for i, (lam_uc, lam_c) in enumerate(points):
            key = tuple(sorted(_ks_for(binners, lam_uc, lam_c).items()))
            if key not in cache:
                model = _provisional_model(schema, feats, maps, binners, dict(key))
                try:
                    glm = _quiet(fit_glm, model.transform(tr), tr.response, names=model.names)
                    p = predict_glm(glm, model.transform(te))
                    cache[key] = -_metric(config.criterion, p, te.response)
                except (RankDeficientError, np.linalg.LinAlgError, ValueError):
                    cache[key] = np.inf
            totals[i] += cache[key]
    return list(totals / config.folds)


# ---------------------------------------------------------------- pipeline

def _stage(name):
    def wrap(fn, *args, **kw):
        try:
            return fn(*args, **kw)
        except PipelineError:
            raise
        except Exception as exc:  # annotate and re-raise
            raise PipelineError(name, exc) from exc
    return wrap


def fit_pipeline(dataset: Dataset, schema: Schema | None = None,
                 config: PipelineConfig | None = None) -> PipelineModel:
    """Run all stages and return the fitted model (with traces attached)."""
    schema = schema or dataset.schema
    config = config or PipelineConfig()
    y = dataset.response
    if y is None:
        raise PipelineError("input", ValueError("training data need a response column"))
    traces = []
    tuning: dict = {"criterion": config.criterion, "woe_df": config.woe_df}

    # (1) categorical encodings
    has_smooth = any(c.is_nonlinear for c in schema.predictors)
    lam_cat = None
    if _cwoe_columns(schema):
        lam_cat, ks, cmaps, tr = _stage("lambda_cat")(tune_lambda_cat, dataset, schema,
                                                      config.grid, config)
        traces.append(tr)
        tuning["lambda_cat"] = lam_cat
        tuning["k_cat"] = ks
    else:
        cmaps = {}
    maps = {**_stage("woe")(_fixed_maps, dataset, schema, config.offset), **cmaps}

    # (2) GAM and (3) demotion
    demoted: list[str] = []
    model = None
    if has_smooth:
        def gam_stage(demoted):
            design, _ = _gam_design(dataset, schema, maps, demoted)
            return _quiet(select_smoothing, design, y, config.smoothing_grid)
        smoothing, gam = _stage("gam")(gam_stage, demoted)
        for c in schema.predictors:
            if c.is_nonlinear and is_effectively_linear(gam, c.name, config.demote_edf):
                demoted.append(c.name)
        tuning["edf"] = {t.name: t.edf for t in gam.terms if t.is_smooth}
        if demoted:
            smoothing, gam = _stage("gam")(gam_stage, demoted)
        tuning["smoothing"] = smoothing
        tuning["demoted"] = demoted
        # (4) binning grid
        if gam.design.smooth_names:
            lam_uc, lam_c, model, tr = _stage("lambda_continuous")(
                tune_lambda_continuous, dataset, schema, config.grid, gam, maps, config, lam_cat)
            traces.append(tr)
            tuning["lambda_uc"] = lam_uc
            tuning["lambda_c"] = lam_c
            tuning["k_bins"] = {b: int(k) for b, k in tr.rows[tr.winner].ks.items()}

    if model is None:
        # no smooth left: every continuous column enters linearly
        model = _provisional_model(schema, _plan(schema, maps, []), maps, [], {})
    # (5) final GLM on exactly the transformed training data
    X = model.transform(dataset)
    model.glm = _stage("glm")(fit_glm, X, y, names=model.names)
    n1 = int(y.sum())
    model.tuning = _jsonable(tuning)
    model.meta = {"n": int(dataset.n), "positives": n1, "pi1": n1 / dataset.n,
                  "pi0": 1 - n1 / dataset.n, "fitted_at": source_date()}
    model.traces = traces
    return model


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)) and not isinstance(obj, bool):
        return int(obj)
    return obj


def cross_validate(dataset: Dataset, schema: Schema | None = None,
                   config: PipelineConfig | None = None, folds: int = 10, seed: int = 0,
                   assignment=None, severity_ratio: float | None = None) -> list[MetricReport]:
    """Fit the pipeline on each training part and score its held-out fold."""
    schema = schema or dataset.schema
    config = config or PipelineConfig()
    fa = assignment if assignment is not None else split_folds(dataset.response, folds, seed)
    reports = []
    for f in range(1, fa.folds + 1):
        train_idx, test_idx = fa.train_test(f)
        tr, te = dataset.subset(train_idx), dataset.subset(test_idx)
        model = fit_pipeline(tr, schema, config)
        p = model.predict(te)
        reports.append(evaluate(p, te.response, severity_ratio))
    return reports
