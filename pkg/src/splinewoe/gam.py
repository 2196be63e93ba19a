"""Additive logistic models fitted by penalised IRLS.

The linear predictor is an intercept plus linear terms plus centred spline
smooths,

    eta = b0 + sum_j beta_j x_j + sum_s f_s(x_s),

and the coefficients maximise ``loglik - 0.5 * sum_s lam_s * b_s' S_s b_s``.
Each P-IRLS step solves the penalised weighted least-squares problem through
a QR decomposition of the augmented matrix ``[sqrt(W) X; L]`` with
``L'L = S_lambda``, which stays well conditioned for very large lambdas.

Penalties are multiplied by the number of training rows, so lambda is a
per-observation smoothing weight and one fixed grid serves data sets of any
size. Smoothing parameters are chosen by a coordinate-wise grid search on AIC,
with the effective degrees of freedom ``tr((X'WX + S)^-1 X'WX)`` as the
parameter count.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .glm import ETA_CAP, WEIGHT_FLOOR, RankDeficientError, SeparationWarning, binomial_deviance
from .splines import SmoothBasis, build_basis

__all__ = [
    "TermSpec",
    "GamTerm",
    "GamDesign",
    "GamFit",
    "build_design",
    "fit_gam",
    "select_smoothing",
    "term_values_and_variance",
    "term_edf",
    "predict_gam",
    "penalized_loglik",
    "penalized_gradient",
    "DEFAULT_LAMBDA_GRID",
    "LINEAR_EDF_THRESHOLD",
]

DEFAULT_LAMBDA_GRID = tuple(float(np.exp(e)) for e in range(-8, 9))
LINEAR_EDF_THRESHOLD = 1.1
TERM_KINDS = ("linear", "smooth", "cyclic_smooth")


@dataclass(frozen=True)
class TermSpec:
    """Declaration of one additive term."""

    name: str
    kind: str = "smooth"
    q: int = 10
    period: float | None = None

    def __post_init__(self):
        if self.kind not in TERM_KINDS:
            raise ValueError(f"unknown term kind {self.kind!r}")
        if self.kind == "cyclic_smooth" and not (self.period and self.period > 0):
            raise ValueError(f"cyclic term {self.name!r} needs a positive period")


@dataclass
class GamTerm:
    name: str
    kind: str
    cols: slice
    basis: SmoothBasis | None = None
    lam: float = 0.0
    edf: float = 1.0

    @property
    def is_smooth(self) -> bool:
        return self.basis is not None


@dataclass
class GamDesign:
    """Model matrix with fixed bases, reusable across smoothing parameters."""

    terms: list[GamTerm]
    X: np.ndarray
    penalties: list[np.ndarray]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def smooth_names(self) -> list[str]:
        return [t.name for t in self.terms if t.is_smooth]

    def term(self, name: str) -> GamTerm:
        for t in self.terms:
            if t.name == name:
                return t
        raise KeyError(name)

    def penalty_matrix(self, lambdas) -> np.ndarray:
        S = np.zeros((self.p, self.p))
        lam = _lambda_vector(self, lambdas)
        for t, l, Sb in zip(self.smooth_terms, lam, self.penalties):
            S[t.cols, t.cols] += l * Sb
        return S

    @property
    def smooth_terms(self) -> list[GamTerm]:
        return [t for t in self.terms if t.is_smooth]

    def model_matrix(self, columns, n: int | None = None) -> np.ndarray:
        """Design rows for new data using the stored bases."""
        if self.terms:
            n = len(np.asarray(columns[self.terms[0].name]))
        elif n is None:
            raise ValueError("an intercept-only design needs the row count n")
        parts = [np.ones((n, 1))]
        for t in self.terms:
            x = np.asarray(columns[t.name], dtype=float)
            parts.append(x[:, None] if t.basis is None else t.basis.design(x))
        return np.hstack(parts)


def build_design(columns, specs, n: int | None = None) -> GamDesign:
    """Build bases and the model matrix (intercept first) from training columns.

    ``n`` is only needed for an intercept-only design.
    """
    specs = list(specs)
    if len({s.name for s in specs}) != len(specs):
        raise ValueError("term names must be unique")
    parts = []
    terms: list[GamTerm] = []
    penalties = []
    start = 1
    for s in specs:
        x = np.asarray(columns[s.name], dtype=float)
        if n is None:
            n = x.size
        if x.size != n:
            raise ValueError("all columns must have equal length")
        if not np.all(np.isfinite(x)):
            raise ValueError(f"column {s.name!r} has non-finite values")
        if s.kind == "linear":
            parts.append(x[:, None])
            terms.append(GamTerm(s.name, s.kind, slice(start, start + 1)))
            start += 1
        else:
            kind = "cubic" if s.kind == "smooth" else "cyclic"
            basis = build_basis(x, kind=kind, q=s.q, period=s.period)
            B = basis.design(x)
            parts.append(B)
            terms.append(GamTerm(s.name, s.kind, slice(start, start + B.shape[1]), basis))
            # scale by n so a given lambda means the same across sample sizes
            penalties.append(basis.penalty * n)
            start += B.shape[1]
    if n is None:
        raise ValueError("an intercept-only design needs the row count n")
    X = np.hstack([np.ones((n, 1)), *parts])
    return GamDesign(terms, X, penalties)


@dataclass
class GamFit:
    design: GamDesign = field(repr=False)
    coef: np.ndarray
    cov: np.ndarray
    lambdas: np.ndarray
    deviance: float
    edf_total: float
    converged: bool
    iterations: int
    n: int

    @property
    def terms(self) -> list[GamTerm]:
        return self.design.terms

    @property
    def intercept(self) -> float:
        return float(self.coef[0])

    @property
    def aic(self) -> float:
        return self.deviance + 2.0 * self.edf_total

    def eta(self) -> np.ndarray:
        return self.design.X @ self.coef


def _lambda_vector(design: GamDesign, lambdas) -> np.ndarray:
    names = design.smooth_names
    if lambdas is None:
        lam = np.ones(len(names))
    elif isinstance(lambdas, dict):
        lam = np.array([float(lambdas[nm]) for nm in names])
    else:
        lam = np.atleast_1d(np.asarray(lambdas, dtype=float))
        if lam.size == 1 and len(names) != 1:
            lam = np.full(len(names), float(lam[0]))
    if lam.size != len(names):
        raise ValueError("need one smoothing parameter per smooth term")
    if np.any(~np.isfinite(lam)) or np.any(lam < 0):
        raise ValueError("smoothing parameters must be finite and nonnegative")
    return lam


def _penalty_root(S: np.ndarray) -> np.ndarray:
    """L with L'L = S (rows for the positive eigenvalues only)."""
    ev, V = np.linalg.eigh(S)
    keep = ev > 1e-13 * max(ev.max(initial=0.0), 1.0)
    return np.sqrt(ev[keep])[:, None] * V[:, keep].T


def penalized_loglik(design: GamDesign, y, beta, lambdas) -> float:
    """Log-likelihood minus half the weighted roughness penalty."""
    S = design.penalty_matrix(lambdas)
    eta = design.X @ beta
    return -0.5 * binomial_deviance(y, eta) - 0.5 * float(beta @ S @ beta)


def penalized_gradient(design: GamDesign, y, beta, lambdas) -> np.ndarray:
    S = design.penalty_matrix(lambdas)
    eta = design.X @ beta
    return design.X.T @ (np.asarray(y, float) - expit(eta)) - S @ beta


def fit_gam(design: GamDesign, y, lambdas=None, beta0=None, tol: float = 1e-8,
            max_iter: int = 200, grad_tol: float = 1e-6) -> GamFit:
    """Penalised IRLS for fixed smoothing parameters.

    Parameters
    ----------
    design : GamDesign
        From :func:`build_design`.
    y : array of 0/1
    lambdas : dict, sequence or scalar
        One nonnegative smoothing parameter per smooth term (default 1).
    beta0 : array, optional
        Warm start.

    Returns
    -------
    GamFit
        ``converged`` is False if the iteration cap was hit or the linear
        predictor had to be capped at +-30.
    """
    X = design.X
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    if y.shape != (n,):
        raise ValueError("y must have one entry per design row")
    lam = _lambda_vector(design, lambdas)
    S = design.penalty_matrix(lam)
    L = _penalty_root(S)
    R0 = np.linalg.qr(np.vstack([X, L]), mode="r")
    d = np.abs(np.diag(R0))
    if d.min() <= 1e-10 * d.max():
        raise RankDeficientError("penalised design is rank deficient")

    if beta0 is None:
        beta = np.zeros(p)
        ybar = np.clip(y.mean(), 1e-10, 1 - 1e-10)
        beta[0] = np.log(ybar / (1 - ybar))
    else:
        beta = np.array(beta0, dtype=float)
    eta = X @ beta

    def pdev(b, e):
        return binomial_deviance(y, e) + float(b @ S @ b)

    pd = pdev(beta, eta)
    capped = False
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        mu = expit(eta)
        w = np.maximum(mu * (1 - mu), WEIGHT_FLOOR)
        if not np.all(np.isfinite(w)):
            raise FloatingPointError("non-finite working weights")
        sw = np.sqrt(w)
        z = eta + (y - mu) / w
        A = np.vstack([sw[:, None] * X, L])
        rhs = np.concatenate([sw * z, np.zeros(L.shape[0])])
        Q, R = np.linalg.qr(A)
        target = np.linalg.solve(R, Q.T @ rhs)
        step = target - beta
        d_eta = X @ step
        t = 1.0
        new_eta = eta + d_eta
        if np.max(np.abs(new_eta)) > ETA_CAP:
            over = np.abs(new_eta) > ETA_CAP
            with np.errstate(divide="ignore", invalid="ignore"):
                ts = (np.sign(new_eta[over]) * ETA_CAP - eta[over]) / d_eta[over]
            ts = ts[np.isfinite(ts) & (ts >= 0)]
            if ts.size:
                t = min(1.0, float(ts.min()))
            capped = True
        for _ in range(40):
            nb = beta + t * step
            ne = X @ nb
            npd = pdev(nb, ne)
            if npd <= pd + 1e-12 * abs(pd):
                break
            t *= 0.5
        change = abs(pd - npd) / (abs(npd) + 0.1)
        beta, eta, pd = nb, ne, npd
        if change < tol:
            grad = X.T @ (y - expit(eta)) - S @ beta
            stalled = np.max(np.abs(t * step)) <= 1e-12 * (1.0 + np.max(np.abs(beta)))
            if np.max(np.abs(grad)) <= grad_tol or stalled:
                converged = True
                break
            if capped:
                break

    mu = expit(eta)
    w = np.maximum(mu * (1 - mu), WEIGHT_FLOOR)
    XtWX = X.T @ (w[:, None] * X)
    H = XtWX + S
    cov = np.linalg.inv(H)
    cov = 0.5 * (cov + cov.T)
    infl = cov @ XtWX
    diag = np.diag(infl)
    terms = [GamTerm(t.name, t.kind, t.cols, t.basis) for t in design.terms]
    li = 0
    for t in terms:
        t.edf = float(diag[t.cols].sum())
        if t.is_smooth:
            t.lam = float(lam[li])
            li += 1
    fitted_design = GamDesign(terms, design.X, design.penalties)
    if capped:
        converged = False
        warnings.warn("linear predictor reached the cap of 30 in the GAM fit",
                      SeparationWarning, stacklevel=2)
    elif not converged:
        warnings.warn(f"P-IRLS did not converge in {max_iter} iterations",
                      RuntimeWarning, stacklevel=2)
    dev = binomial_deviance(y, eta)
    return GamFit(fitted_design, beta, cov, lam, dev, float(diag.sum()),
                  converged, it, n)


def select_smoothing(design: GamDesign, y, grid=DEFAULT_LAMBDA_GRID, sweeps: int = 2,
                     start: float = 1.0) -> tuple[dict, GamFit]:
    """Coordinate-wise AIC grid search over each smooth's lambda.

    Every smooth starts at ``start`` (snapped to the nearest grid value);
    each sweep visits the smooths in order and, holding the others fixed,
    picks the grid value with the lowest AIC (ties go to the smaller
    lambda). Fits are warm-started from the previous solution.
    """
    grid = np.sort(np.asarray(grid, dtype=float))
    if grid.size == 0:
        raise ValueError("empty lambda grid")
    names = design.smooth_names
    idx0 = int(np.argmin(np.abs(np.log(grid) - np.log(start)))) if np.all(grid > 0) else 0
    cur = {nm: float(grid[idx0]) for nm in names}
    best_fit = _quiet_fit(design, y, cur, None)
    if not names or grid.size == 1:
        return cur, best_fit
    for _ in range(sweeps):
        for nm in names:
            scores = []
            fits = []
            warm = best_fit.coef
            for g in grid:
                trial = dict(cur)
                trial[nm] = float(g)
                f = _quiet_fit(design, y, trial, warm)
                warm = f.coef
                scores.append(f.aic)
                fits.append(f)
            j = int(np.argmin(scores))
            cur[nm] = float(grid[j])
            best_fit = fits[j]
    return cur, best_fit


def _quiet_fit(design, y, lambdas, beta0):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SeparationWarning)
        return fit_gam(design, y, lambdas, beta0=beta0)


def term_values_and_variance(fit: GamFit, name: str, x) -> tuple[np.ndarray, np.ndarray]:
    """Fitted smooth values and their pointwise variances at ``x``.

    ``var`` is the quadratic form of the basis row with the term's block of
    the inverse penalised information matrix. Values are floored at
    ``1e-6 * median`` (and a tiny absolute value) so that inverse-variance
    weights stay finite.
    """
    t = fit.design.term(name)
    if not t.is_smooth:
        raise ValueError(f"term {name!r} is not a smooth")
    B = t.basis.design(np.asarray(x, dtype=float))
    z = B @ fit.coef[t.cols]
    V = fit.cov[t.cols, t.cols]
    var = np.einsum("ij,jk,ik->i", B, V, B)
    pos = var[var > 0]
    floor = max(1e-6 * float(np.median(pos)) if pos.size else 0.0, 1e-300)
    return z, np.maximum(var, floor)


def term_edf(fit: GamFit, name: str) -> float:
    return fit.design.term(name).edf


def is_effectively_linear(fit: GamFit, name: str, threshold: float = LINEAR_EDF_THRESHOLD) -> bool:
    """True for a non-cyclic smooth whose edf is at most ``threshold``.

    Cyclic smooths have no linear null space, so they are never flagged.
    """
    t = fit.design.term(name)
    return t.kind == "smooth" and t.edf <= threshold


def predict_gam(fit: GamFit, columns) -> np.ndarray:
    """Probabilities for new data."""
    X = fit.design.model_matrix(columns, n=fit.n if not fit.terms else None)
    return expit(np.clip(X @ fit.coef, -ETA_CAP, ETA_CAP))
