"""Penalised cubic regression spline bases.

Two kinds are supported:

``cubic``
    natural cubic spline parameterised by its values at ``q`` knots placed at
    evenly spaced quantiles of the unique training values. Outside the
    boundary knots the function continues linearly.
``cyclic``
    cubic spline on a circle of circumference ``period`` with ``q`` evenly
    spaced knots on [0, period); value, slope and curvature match at the
    wrap point.

In both cases the second derivatives at the knots are a linear map ``F`` of
the knot values (``delta = F beta``) and the roughness penalty
``int f''(x)^2 dx`` equals ``beta' D' B^-1 D beta``.

Each basis is made identifiable by absorbing a sum-to-zero constraint over
the training data: columns are rotated by ``Z`` (``q x (q-1)``), chosen
orthogonal to the training column means, so every fitted smooth sums to
zero over the training points.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["SmoothBasis", "build_basis", "evaluate_basis"]


def _cr_matrices(knots):
    """D ((q-2) x q) and B ((q-2) x (q-2)) for a natural cubic spline."""
    h = np.diff(knots)
    q = knots.size
    D = np.zeros((q - 2, q))
    B = np.zeros((q - 2, q - 2))
    for i in range(q - 2):
        D[i, i] = 1.0 / h[i]
        D[i, i + 1] = -1.0 / h[i] - 1.0 / h[i + 1]
        D[i, i + 2] = 1.0 / h[i + 1]
        B[i, i] = (h[i] + h[i + 1]) / 3.0
        if i < q - 3:
            B[i, i + 1] = B[i + 1, i] = h[i + 1] / 6.0
    return D, B


def _cc_matrices(knots, period):
    """Cyclic D and B (both q x q) from knots on [0, period)."""
    q = knots.size
    h = np.diff(np.append(knots, knots[0] + period))
    D = np.zeros((q, q))
    B = np.zeros((q, q))
    for i in range(q):
        hp, hi = h[i - 1], h[i]
        D[i, (i - 1) % q] += 1.0 / hp
        D[i, i] += -1.0 / hp - 1.0 / hi
        D[i, (i + 1) % q] += 1.0 / hi
        B[i, (i - 1) % q] += hp / 6.0
        B[i, i] += (hp + hi) / 3.0
        B[i, (i + 1) % q] += hi / 6.0
    return D, B


def _cubic_rows(x, knots, F):
    """Unconstrained natural-spline basis rows, linear beyond the end knots."""
    q = knots.size
    x = np.asarray(x, dtype=float)
    out = np.zeros((x.size, q))
    lo, hi = knots[0], knots[-1]
    inside = (x >= lo) & (x <= hi)
    xi = x[inside]
    j = np.clip(np.searchsorted(knots, xi, side="right") - 1, 0, q - 2)
    h = knots[j + 1] - knots[j]
    dm = knots[j + 1] - xi
    dp = xi - knots[j]
    am, ap = dm / h, dp / h
    cm = (dm ** 3 / h - h * dm) / 6.0
    cp = (dp ** 3 / h - h * dp) / 6.0
    rows = cm[:, None] * F[j] + cp[:, None] * F[j + 1]
    r = np.arange(xi.size)
    rows[r, j] += am
    rows[r, j + 1] += ap
    out[inside] = rows

    below = x < lo
    if np.any(below):
        h0 = knots[1] - knots[0]
        val = np.zeros(q)
        val[0] = 1.0
        slope = -h0 / 3.0 * F[0] - h0 / 6.0 * F[1]
        slope[0] -= 1.0 / h0
        slope[1] += 1.0 / h0
        out[below] = val + (x[below] - lo)[:, None] * slope
    above = x > hi
    if np.any(above):
        h1 = knots[-1] - knots[-2]
        val = np.zeros(q)
        val[-1] = 1.0
        slope = h1 / 6.0 * F[-2] + h1 / 3.0 * F[-1]
        slope[-2] -= 1.0 / h1
        slope[-1] += 1.0 / h1
        out[above] = val + (x[above] - hi)[:, None] * slope
    return out


def _cyclic_rows(x, knots, F, period):
    q = knots.size
    x = np.mod(np.asarray(x, dtype=float), period)
    ext = np.append(knots, knots[0] + period)
    j = np.clip(np.searchsorted(ext, x, side="right") - 1, 0, q - 1)
    jn = (j + 1) % q
    h = ext[j + 1] - ext[j]
    dm = ext[j + 1] - x
    dp = x - ext[j]
    am, ap = dm / h, dp / h
    cm = (dm ** 3 / h - h * dm) / 6.0
    cp = (dp ** 3 / h - h * dp) / 6.0
    rows = cm[:, None] * F[j] + cp[:, None] * F[jn]
    r = np.arange(x.size)
    rows[r, j] += am
    rows[r, jn] += ap
    return rows


@dataclass
class SmoothBasis:
    """A centred spline basis with its roughness penalty.

    ``penalty`` acts on the constrained (q-1 dimensional) coefficients and
    is already divided by ``penalty_scale``.
    """

    kind: str
    knots: np.ndarray
    Z: np.ndarray
    penalty_scale: float
    period: float | None = None
    F: np.ndarray = field(init=False, repr=False)
    raw_penalty: np.ndarray = field(init=False, repr=False)
    penalty: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.knots = np.asarray(self.knots, dtype=float)
        self.Z = np.asarray(self.Z, dtype=float)
        if self.kind == "cubic":
            D, B = _cr_matrices(self.knots)
            Fm = np.linalg.solve(B, D)
            self.F = np.vstack([np.zeros(self.q), Fm, np.zeros(self.q)])
        elif self.kind == "cyclic":
            D, B = _cc_matrices(self.knots, self.period)
            self.F = np.linalg.solve(B, D)
        else:
            raise ValueError(f"unknown basis kind {self.kind!r}")
        S = D.T @ np.linalg.solve(B, D)
        self.raw_penalty = 0.5 * (S + S.T)
        Sc = self.Z.T @ self.raw_penalty @ self.Z / self.penalty_scale
        self.penalty = 0.5 * (Sc + Sc.T)

    @property
    def q(self) -> int:
        return self.knots.size

    @property
    def dim(self) -> int:
        """Number of columns after the centring constraint."""
        return self.Z.shape[1]

    def raw_design(self, x) -> np.ndarray:
        if self.kind == "cubic":
            return _cubic_rows(x, self.knots, self.F)
        return _cyclic_rows(x, self.knots, self.F, self.period)

    def design(self, x) -> np.ndarray:
        return self.raw_design(np.atleast_1d(x)) @ self.Z

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "knots": [float(v) for v in self.knots],
            "Z": [[float(v) for v in row] for row in self.Z],
            "penalty_scale": float(self.penalty_scale),
            "period": None if self.period is None else float(self.period),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SmoothBasis":
        return cls(kind=d["kind"], knots=np.asarray(d["knots"], dtype=float),
                   Z=np.asarray(d["Z"], dtype=float),
                   penalty_scale=float(d["penalty_scale"]), period=d.get("period"))


def build_basis(x, kind: str = "cubic", q: int = 10, period: float | None = None) -> SmoothBasis:
    """Build a centred basis from training values ``x``."""
    x = np.asarray(x, dtype=float)
    if q < 3:
        raise ValueError("basis dimension q must be at least 3")
    if not np.all(np.isfinite(x)):
        raise ValueError("x must be finite")
    if kind == "cubic":
        ux = np.unique(x)
        if ux.size < q:
            raise ValueError(f"need at least q={q} distinct values, got {ux.size}")
        knots = np.quantile(ux, np.linspace(0.0, 1.0, q))
        if np.any(np.diff(knots) <= 0):
            raise ValueError("degenerate knot placement")
    elif kind == "cyclic":
        if period is None or not period > 0:
            raise ValueError("cyclic basis needs a positive period")
        if np.unique(np.mod(x, period)).size < q:
            raise ValueError(f"need at least q={q} distinct values")
        knots = np.arange(q) * (period / q)
    else:
        raise ValueError(f"unknown basis kind {kind!r}")

    # unconstrained penalty/design first, to derive constraint and scale
    probe = SmoothBasis(kind, knots, np.eye(q), 1.0, period)
    X = probe.raw_design(x)
    means = X.mean(axis=0)
    Q, _ = np.linalg.qr(means.reshape(-1, 1), mode="complete")
    Z = Q[:, 1:]
    # keep lambda on a comparable scale across predictors measured in
    # different units
    scale = np.linalg.norm(probe.raw_penalty, 1) / np.linalg.norm(X, np.inf) ** 2
    return SmoothBasis(kind, knots, Z, float(scale), period)


def evaluate_basis(basis: SmoothBasis, x_new) -> np.ndarray:
    """Design rows for arbitrary x (linear extrapolation / wrap-around)."""
    return basis.design(x_new)
