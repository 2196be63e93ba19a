"""Logistic regression by iteratively reweighted least squares."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.special import expit

__all__ = [
    "GlmFit",
    "RankDeficientError",
    "SeparationWarning",
    "fit_glm",
    "predict_glm",
    "wald_tests",
    "binomial_deviance",
    "coef_table_tsv",
]

ETA_CAP = 30.0
WEIGHT_FLOOR = 1e-10


class RankDeficientError(np.linalg.LinAlgError):
    pass


class SeparationWarning(RuntimeWarning):
    """Linear predictor hit the cap; coefficients are not a true MLE."""


def binomial_deviance(y, eta) -> float:
    """-2 log-likelihood of Bernoulli responses at logits ``eta``."""
    eta = np.asarray(eta, dtype=float)
    return float(2.0 * np.sum(np.logaddexp(0.0, eta) - y * eta))


def check_rank(X, tol: float = 1e-10) -> None:
    R = np.linalg.qr(X, mode="r")
    d = np.abs(np.diag(R))
    if d.size and d.min() <= tol * d.max():
        raise RankDeficientError("design matrix is not of full column rank")


@dataclass
class GlmFit:
    names: list[str]
    coef: np.ndarray
    cov: np.ndarray
    deviance: float
    converged: bool
    iterations: int
    n: int

    @property
    def aic(self) -> float:
        return self.deviance + 2.0 * self.coef.size

    @property
    def se(self) -> np.ndarray:
        return np.sqrt(np.diag(self.cov))

    def to_dict(self) -> dict:
        return {
            "names": list(self.names),
            "coef": [float(v) for v in self.coef],
            "cov": [[float(v) for v in row] for row in self.cov],
            "deviance": float(self.deviance),
            "converged": bool(self.converged),
            "iterations": int(self.iterations),
            "n": int(self.n),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GlmFit":
        return cls(list(d["names"]), np.asarray(d["coef"], dtype=float),
                   np.asarray(d["cov"], dtype=float), float(d["deviance"]),
                   bool(d["converged"]), int(d["iterations"]), int(d["n"]))


def _truncate_step(eta_old, d_eta, cap):
    """Largest t in (0, 1] keeping |eta_old + t d_eta| <= cap."""
    t = 1.0
    new = eta_old + d_eta
    over = np.abs(new) > cap
    if np.any(over):
        target = np.sign(new[over]) * cap
        with np.errstate(divide="ignore", invalid="ignore"):
            ts = (target - eta_old[over]) / d_eta[over]
        ts = ts[np.isfinite(ts) & (ts >= 0)]
        if ts.size:
            t = min(1.0, float(ts.min()))
    return t


def fit_glm(X, y, names=None, tol: float = 1e-10, max_iter: int = 100,
            score_tol: float = 1e-8) -> GlmFit:
    """Fit a logistic regression; ``X`` must already contain the intercept.

    Iterates Newton/IRLS steps until the relative deviance change falls
    below ``tol`` and the score vector is below ``score_tol``. If the
    linear predictor would leave [-30, 30] the step is shortened, the fit
    is flagged as not converged and a :class:`SeparationWarning` is issued;
    the capped coefficients remain usable for prediction.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    if y.shape != (n,):
        raise ValueError("y must have one entry per row of X")
    if n <= p:
        raise ValueError("need more observations than columns")
    check_rank(X)
    names = list(names) if names is not None else [f"x{j}" for j in range(p)]
    if len(names) != p:
        raise ValueError("names must match the number of columns")

    beta = np.zeros(p)
    ybar = np.clip(y.mean(), 1e-10, 1 - 1e-10)
    if np.allclose(X[:, 0], 1.0):
        beta[0] = np.log(ybar / (1 - ybar))
    eta = X @ beta
    dev = binomial_deviance(y, eta)
    capped = False
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        mu = expit(eta)
        w = np.maximum(mu * (1 - mu), WEIGHT_FLOOR)
        sw = np.sqrt(w)
        z = eta + (y - mu) / w
        delta_full, *_ = np.linalg.lstsq(sw[:, None] * X, sw * z, rcond=None)
        step = delta_full - beta
        d_eta = X @ step
        t = _truncate_step(eta, d_eta, ETA_CAP)
        if t < 1.0:
            capped = True
        # step halving on deviance increase
        for _ in range(30):
            new_beta = beta + t * step
            new_eta = X @ new_beta
            new_dev = binomial_deviance(y, new_eta)
            if new_dev <= dev + 1e-12 * abs(dev):
                break
            t *= 0.5
        change = abs(dev - new_dev) / (abs(new_dev) + 0.1)
        beta, eta, dev = new_beta, new_eta, new_dev
        score = X.T @ (y - expit(eta))
        stalled = np.max(np.abs(t * step)) <= 1e-13 * (1.0 + np.max(np.abs(beta)))
        if change < tol and (np.max(np.abs(score)) <= score_tol or stalled):
            converged = True
            break
        if capped and change < tol:
            break
    mu = expit(eta)
    w = np.maximum(mu * (1 - mu), WEIGHT_FLOOR)
    info = X.T @ (w[:, None] * X)
    cov = np.linalg.inv(info)
    cov = 0.5 * (cov + cov.T)
    if capped:
        converged = False
        warnings.warn("linear predictor reached the cap of 30: the data are "
                      "(quasi-)separated and the fit did not converge", SeparationWarning,
                      stacklevel=2)
    elif not converged:
        warnings.warn(f"IRLS did not converge in {max_iter} iterations", RuntimeWarning,
                      stacklevel=2)
    return GlmFit(names, beta, cov, dev, converged, it, n)


def predict_glm(fit: GlmFit, X_new) -> np.ndarray:
    """Probabilities 1 / (1 + exp(-X beta)); logits are clipped to +-30."""
    X_new = np.atleast_2d(np.asarray(X_new, dtype=float))
    if X_new.shape[1] != fit.coef.size:
        raise ValueError(f"expected {fit.coef.size} columns, got {X_new.shape[1]}")
    return expit(np.clip(X_new @ fit.coef, -ETA_CAP, ETA_CAP))


def wald_tests(fit: GlmFit):
    """Per coefficient (name, estimate, se, z, two-sided normal p-value)."""
    se = fit.se
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, fit.coef / se, np.nan)
    p = 2.0 * stats.norm.sf(np.abs(z))
    return [(nm, float(b), float(s), float(zz), float(pp))
            for nm, b, s, zz, pp in zip(fit.names, fit.coef, se, z, p)]


def coef_table_tsv(fit: GlmFit) -> str:
    lines = ["name\testimate\tse\tz\tp"]
    for nm, b, s, z, p in wald_tests(fit):
        lines.append(f"{nm}\t{b!r}\t{s!r}\t{z!r}\t{p!r}")
    return "\n".join(lines) + "\n"
