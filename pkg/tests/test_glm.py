import math

import numpy as np
import pytest
from scipy import stats
from scipy.special import expit

from splinewoe.glm import (
    GlmFit,
    RankDeficientError,
    SeparationWarning,
    binomial_deviance,
    coef_table_tsv,
    fit_glm,
    predict_glm,
    wald_tests,
)


def sim(n=800, seed=0, beta=(-0.5, 1.0, -0.7)):
    rng = np.random.default_rng(seed)
    X = np.column_stack([np.ones(n), rng.normal(size=n), rng.uniform(-2, 2, n)])
    y = rng.binomial(1, expit(X @ np.asarray(beta)))
    return X, y


def test_intercept_only_balanced():
    y = np.array([0, 1] * 20)
    fit = fit_glm(np.ones((40, 1)), y)
    assert fit.coef[0] == pytest.approx(0.0, abs=1e-12)


def test_intercept_only_closed_form():
    y = np.array([1] * 30 + [0] * 70)
    fit = fit_glm(np.ones((100, 1)), y)
    assert fit.coef[0] == pytest.approx(math.log(3 / 7), abs=1e-8)
    assert fit.coef[0] == pytest.approx(-0.847298, abs=1e-6)
    assert fit.converged


def test_score_equations_and_deviance():
    X, y = sim()
    fit = fit_glm(X, y)
    assert fit.converged
    score = X.T @ (y - expit(X @ fit.coef))
    assert np.max(np.abs(score)) <= 1e-8
    assert fit.deviance == pytest.approx(-2 * np.sum(y * np.log(expit(X @ fit.coef)) + (1 - y) * np.log(1 - expit(X @ fit.coef))), rel=1e-9)
    assert fit.aic == pytest.approx(fit.deviance + 2 * 3, rel=1e-12)
    np.testing.assert_allclose(fit.cov, fit.cov.T)
    assert np.linalg.eigvalsh(fit.cov).min() > 0


def test_matches_generic_optimizer():
    from scipy.optimize import minimize

    X, y = sim(seed=3)
    fit = fit_glm(X, y)
    res = minimize(lambda b: binomial_deviance(y, X @ b), np.zeros(3),
                   jac=lambda b: -2 * X.T @ (y - expit(X @ b)), method="BFGS", options={"gtol": 1e-10})
    np.testing.assert_allclose(fit.coef, res.x, atol=1e-5)


def test_affine_invariance():
    X, y = sim(seed=1)
    fit = fit_glm(X, y)
    X2 = X.copy()
    X2[:, 1] *= 250.0
    fit2 = fit_glm(X2, y)
    assert fit2.coef[1] == pytest.approx(fit.coef[1] / 250.0, rel=1e-8)
    np.testing.assert_allclose(predict_glm(fit2, X2), predict_glm(fit, X), rtol=0, atol=1e-10)


def test_separation_flagged():
    x = np.linspace(-1, 1, 40)
    y = (x > 0).astype(int)
    X = np.column_stack([np.ones(40), x])
    with pytest.warns(SeparationWarning):
        fit = fit_glm(X, y)
    assert not fit.converged
    assert np.max(np.abs(X @ fit.coef)) <= 30 + 1e-9
    p = predict_glm(fit, X)
    assert np.all((p > 0) & (p < 1))


def test_rank_deficient():
    X, y = sim()
    X = np.column_stack([X, X[:, 1] * 2])
    with pytest.raises(RankDeficientError):
        fit_glm(X, y)


def test_predict_examples():
    fit = GlmFit(["(Intercept)", "a"], np.array([0.0, 1.3]), np.eye(2), 0.0, True, 1, 10)
    assert predict_glm(fit, [[1.0, 0.0]])[0] == 0.5
    fit.coef[0] = -12.55
    assert predict_glm(fit, [[1.0, 0.0]])[0] == pytest.approx(1 / (1 + math.exp(12.55)))
    assert predict_glm(fit, [[1.0, 0.0]])[0] == pytest.approx(3.55e-6, rel=2e-3)
    grid = np.column_stack([np.ones(50), np.linspace(-3, 3, 50)])
    assert np.all(np.diff(predict_glm(fit, grid)) >= 0)
    with pytest.raises(ValueError):
        predict_glm(fit, [[1.0, 2.0, 3.0]])


def test_wald_examples():
    fit = GlmFit(["a", "b"], np.array([0.0, 1.96]), np.eye(2), 0.0, True, 1, 10)
    (_, _, _, z0, p0), (_, _, _, z1, p1) = wald_tests(fit)
    assert z0 == 0.0 and p0 == 1.0
    assert p1 == pytest.approx(0.05, abs=5e-4)
    tsv = coef_table_tsv(fit)
    assert tsv.splitlines()[0] == "name\testimate\tse\tz\tp"
    assert len(tsv.splitlines()) == 3


def test_null_pvalues_uniform():
    rng = np.random.default_rng(77)
    pvals = []
    for _ in range(500):
        n = 200
        X = np.column_stack([np.ones(n), rng.normal(size=n)])
        y = rng.binomial(1, 0.4, size=n)
        pvals.append(wald_tests(fit_glm(X, y))[1][4])
    assert stats.kstest(pvals, "uniform").statistic < 0.1


def test_dict_round_trip():
    X, y = sim()
    fit = fit_glm(X, y, names=["(Intercept)", "u", "v"])
    back = GlmFit.from_dict(fit.to_dict())
    assert np.array_equal(predict_glm(back, X), predict_glm(fit, X))
