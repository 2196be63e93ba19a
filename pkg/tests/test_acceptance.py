"""Release criteria. Each test prints one PASS/FAIL line with the measured
quantity next to its tolerance."""

import os
import time
import warnings

import numpy as np
import pytest
from scipy.special import expit

from oracles import brute_contiguous, brute_grouped
from test_metrics import REF_H, REF_S, REF_Y
from splinewoe.cluster1d import kmeans_weighted, ksegments_weighted
from splinewoe.data import Schema
from splinewoe.experiments import fraud_comparison, planted_recovery
from splinewoe.gam import (TermSpec, build_design, penalized_gradient, penalized_loglik,
                           select_smoothing, term_values_and_variance)
from splinewoe.glm import fit_glm, predict_glm
from splinewoe.metrics import auc, h_measure, weighted_brier
from splinewoe.model import PipelineModel
from splinewoe.synthetic import planted_clusters, planted_schema, to_dataset
from splinewoe.tuning import PipelineConfig, cross_validate, fit_pipeline
from splinewoe.woe import shrinkage_proportions, summarize_categories


def report(capsys, number, ok, detail):
    with capsys.disabled():
        print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def test_1_dp_exactness(capsys):
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst = 0.0
    checked = 0
    for _ in range(500):
        n = int(rng.integers(1, 13))
        z = rng.normal(scale=3.0, size=n).round(int(rng.integers(0, 3)))
        w = rng.uniform(0, 2, n) * (rng.uniform(size=n) > 0.15)
        if w.sum() == 0:
            w[0] = 1.0
        for k in range(1, n + 1):
            seg = ksegments_weighted(None, z, w, k).wcss
            km = kmeans_weighted(z, w, k).wcss
            worst = max(worst, abs(seg - brute_contiguous(z, w, k)[0]),
                        abs(km - brute_grouped(z, z, w, k)))
            checked += 2
    secs = time.perf_counter() - t0
    report(capsys, 1, worst <= 1e-9 and secs < 10,
           f"{checked} DP solutions, max |wcss - exhaustive| = {worst:.2e} (tol 1e-9), "
           f"{secs:.1f} s (limit 10 s)")


def test_2_shrinkage_improvement(capsys):
    rng = np.random.default_rng(7)
    t0 = time.perf_counter()
    wins = 0
    J = 50
    for _ in range(200):
        n_j = rng.integers(5, 51, J)
        p_j = rng.beta(2, 8, J)
        x = np.repeat([f"c{j:02d}" for j in range(J)], n_j)
        y = np.concatenate([rng.binomial(1, p, n) for p, n in zip(p_j, n_j)])
        s = summarize_categories(x, y)
        truth = p_j[[int(lv[1:]) for lv in s.levels]]
        est = shrinkage_proportions(s)
        wins += np.mean((est.p_tilde - truth) ** 2) < np.mean((s.proportions - truth) ** 2)
    secs = time.perf_counter() - t0
    report(capsys, 2, wins >= 190 and secs < 30,
           f"shrunk MSE better in {wins}/200 replicates (need >= 95%), {secs:.1f} s (limit 30 s)")


def test_3_glm_closed_forms(capsys):
    rng = np.random.default_rng(3)
    y = rng.binomial(1, 0.07, 2000)
    fit0 = fit_glm(np.ones((y.size, 1)), y)
    err0 = abs(fit0.coef[0] - np.log(y.mean() / (1 - y.mean())))
    X = np.column_stack([np.ones(2000), rng.normal(size=2000), rng.uniform(size=2000)])
    y = rng.binomial(1, expit(X @ [-1.0, 0.8, -1.5]))
    fit = fit_glm(X, y)
    score = np.max(np.abs(X.T @ (y - predict_glm(fit, X))))
    A = np.array([[1.0, 3.0, -2.0], [0.0, 2.5, 0.0], [0.0, 0.4, -7.0]])
    fit_a = fit_glm(X @ A, y)
    affine = np.max(np.abs(predict_glm(fit_a, X @ A) - predict_glm(fit, X)))
    ok = err0 <= 1e-8 and score <= 1e-8 and affine <= 1e-10
    report(capsys, 3, ok, f"|b0 - log odds| = {err0:.1e} (tol 1e-8), max score residual = "
           f"{score:.1e} (tol 1e-8), affine probability change = {affine:.1e} (tol 1e-10)")


def test_4_gam_recovery(capsys):
    rng = np.random.default_rng(1)
    n = 5000
    x = rng.uniform(0, 1, n)
    y = rng.binomial(1, expit(np.sin(2 * np.pi * x)))
    d = build_design({"x": x}, [TermSpec("x")])
    _, fit = select_smoothing(d, y)
    z, _ = term_values_and_variance(fit, "x", x)
    lo, hi = np.quantile(x, [0.05, 0.95])
    m = (x >= lo) & (x <= hi)
    rmse = float(np.sqrt(np.mean((fit.intercept + z[m] - np.sin(2 * np.pi * x[m])) ** 2)))

    dc = build_design({"x": x}, [TermSpec("x", "cyclic_smooth", period=1.0)])
    _, fitc = select_smoothing(dc, y)
    zc, _ = term_values_and_variance(fitc, "x", np.array([0.0, 1.0]))
    endpoint_equal = bool(zc[0] == zc[1])

    beta = fit.coef + rng.normal(scale=0.3, size=fit.coef.size)
    lam = fit.lambdas
    g = penalized_gradient(d, y, beta, lam)
    h = 1e-5
    fd = np.array([(penalized_loglik(d, y, beta + h * e, lam)
                    - penalized_loglik(d, y, beta - h * e, lam)) / (2 * h) for e in np.eye(d.p)])
    rel = float(np.max(np.abs(g - fd)) / np.max(np.abs(g)))
    ok = rmse < 0.15 and endpoint_equal and rel <= 1e-4
    report(capsys, 4, ok, f"central-90% RMSE = {rmse:.4f} (limit 0.15), cyclic f(0) == f(period): "
           f"{endpoint_equal}, gradient vs finite differences rel = {rel:.1e} (tol 1e-4)")


@pytest.mark.slow
def test_5_pipeline_direction(capsys):
    t0 = time.perf_counter()
    names = ["sWOE+SB", "WOE+SB", "WOE", "GLM"]
    aucs = {m: [] for m in names}
    prevalences = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for r in range(20):
            reps = fraud_comparison(r, names)
            for m in names:
                aucs[m].append(reps[m].auc)
            prevalences.append(reps["GLM"].pi1)
    secs = time.perf_counter() - t0
    mean = {m: float(np.mean(aucs[m])) for m in names}
    ordered = all(mean[a] >= mean[b] for a, b in zip(names, names[1:]))
    gap = mean["sWOE+SB"] - mean["GLM"]
    ok = ordered and gap >= 0.02 and secs < 600
    detail = ", ".join(f"{m} {mean[m]:.4f}" for m in names)
    report(capsys, 5, ok, f"mean held-out AUC over 20 replicates: {detail}; ordering holds: "
           f"{ordered}; sWOE+SB - GLM = {gap:.4f} (need >= 0.02); test prevalence "
           f"{min(prevalences):.3f}-{max(prevalences):.3f}; {secs:.0f} s (limit 600 s)")


def test_6_conditional_reproduction(capsys):
    where = os.environ.get("SPLINEWOE_FRAUD_DIR")
    if not where:
        with capsys.disabled():
            print("\ncriterion 6: WAIVED  original fraud data not available "
                  "(set SPLINEWOE_FRAUD_DIR to run scripts/reproduce_fraud.py checks)")
        return
    import importlib.util
    from pathlib import Path
    path = Path(__file__).resolve().parents[1] / "scripts" / "reproduce_fraud.py"
    spec = importlib.util.spec_from_file_location("reproduce_fraud", path)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    ok = mod.run(Path(where), os.environ.get("SPLINEWOE_FRAUD_RESPONSE", "fraud"))
    report(capsys, 6, ok, "Table-style rows within stated tolerances (see printed table)")


def test_7_metrics(capsys):
    rng = np.random.default_rng(5)
    y = (rng.uniform(size=301) < 0.04).astype(int)
    y[:2] = [0, 1]
    wb = weighted_brier(np.full(y.size, 0.5), y)
    a = auc([0.2, 0.5, 0.5, 0.9], [0, 0, 1, 1])
    s = rng.normal(size=y.size)
    h_sep = h_measure(y + 0.1 * rng.uniform(size=y.size), y)
    h_const = h_measure(np.zeros(y.size), y)
    mono = abs(h_measure(s, y) - h_measure(np.exp(3 * s) + 2, y))
    ref = max(abs(h_measure(REF_S, REF_Y, sr) - h) for sr, h in REF_H)
    ok = wb == 0.5 and a == 0.875 and h_sep == 1.0 and h_const == 0.0 and mono <= 1e-12 \
        and ref <= 1e-3
    report(capsys, 7, ok, f"wbrier(0.5) = {wb!r}, AUC example = {a!r}, H separable = {h_sep!r}, "
           f"H constant = {h_const!r}, H monotone change = {mono:.1e} (tol 1e-12), "
           f"max |H - reference example| = {ref:.1e} (tol 1e-3)")


def test_8_round_trip(capsys, tmp_path):
    cols, y, _ = planted_clusters(8)
    sch = planted_schema("continuous_cyclic period=1")
    ds = to_dataset(cols, y, Schema.parse(sch.to_text()))
    model = fit_pipeline(ds, sch)
    model.save(tmp_path / "m.json")
    loaded = PipelineModel.load(tmp_path / "m.json")
    same_pred = np.array_equal(model.predict(ds), loaded.predict(ds))
    loaded.save(tmp_path / "m2.json")
    same_bytes = (tmp_path / "m.json").read_bytes() == (tmp_path / "m2.json").read_bytes()
    cfg = PipelineConfig()
    a = [r.tsv_row() for r in cross_validate(ds, sch, cfg, folds=3, seed=11)]
    b = [r.tsv_row() for r in cross_validate(ds, sch, cfg, folds=3, seed=11)]
    ok = same_pred and same_bytes and a == b
    report(capsys, 8, ok, f"predict after reload bit-identical: {same_pred}, save-load-save "
           f"byte-identical: {same_bytes}, cv repeat bit-identical: {a == b}")


@pytest.mark.slow
def test_9_tuning_coherence(capsys):
    exact = True
    hits = 0
    ks = []
    for r in range(20):
        k, k0, _, trace = planted_recovery(r)
        exact &= trace.rows[trace.winner].score == min(row.score for row in trace.rows)
        ks.append(k)
        hits += k == k0
    # the grid used contains e^-7
    grid = PipelineConfig().grid.lambda_cat
    has_ref = bool(np.any(np.isclose(grid, np.exp(-7), rtol=1e-12)))
    ok = exact and has_ref and hits >= 16
    report(capsys, 9, ok, f"winner equals trace minimum in all replicates: {exact}; grid contains "
           f"e^-7: {has_ref}; planted 3 clusters recovered in {hits}/20 (need >= 16); "
           f"selected k: {ks}")


def test_9_continuous_winner_exact(capsys):
    cols, y, _ = planted_clusters(9)
    sch = planted_schema()
    model = fit_pipeline(to_dataset(cols, y, sch), sch)
    tr = model.traces[-1]
    ok = tr.stage == "lambda_continuous" and \
        tr.rows[tr.winner].aic == min(r.aic for r in tr.rows) == model.glm.aic
    report(capsys, 9, ok, "(binning stage) winner AIC == trace minimum == final GLM AIC exactly")
