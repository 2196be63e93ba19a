"""Step-function approximations of fitted smooth effects.

A smooth f evaluated at the training points gives values z_i with pointwise
variances var_i. Binning groups the points so that sum w_i (z_i - zbar_k)^2
is minimal, with w_i proportional to 1/var_i (normalised to sum to n):

* constrained: bins are intervals of x (k-segments ordered by x);
* unconstrained: bins are intervals of z (k-means on z), so points far
  apart in x may share a bin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cluster1d import Partition, choose_k, partition_path

__all__ = ["StepFunction", "binning_weights", "binning_path", "step_from_partition",
           "bin_smooth", "select_step", "apply_step"]

MODES = ("constrained", "unconstrained")


@dataclass(frozen=True)
class StepFunction:
    """Piecewise-constant replacement for one smooth term.

    For ``constrained`` steps, ``cuts`` are ascending x breakpoints and bin
    ``k`` covers ``[cuts[k-1], cuts[k])``. For ``unconstrained`` steps the
    cuts live in z-space and are the midpoints between consecutive bin
    values, so new points go to the nearest bin value.
    """

    term: str
    mode: str
    values: np.ndarray
    cuts: np.ndarray
    period: float | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown binning mode {self.mode!r}")
        if self.cuts.size != self.values.size - 1:
            raise ValueError("need exactly K-1 cuts for K bins")
        if np.any(np.diff(self.cuts) <= 0):
            raise ValueError("cuts must be strictly ascending")

    @property
    def k(self) -> int:
        return int(self.values.size)

    def to_dict(self) -> dict:
        return {
            "term": self.term,
            "mode": self.mode,
            "values": [float(v) for v in self.values],
            "cuts": [float(v) for v in self.cuts],
            "period": None if self.period is None else float(self.period),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StepFunction":
        return cls(d["term"], d["mode"], np.asarray(d["values"], dtype=float),
                   np.asarray(d["cuts"], dtype=float), d.get("period"))


def binning_weights(var) -> np.ndarray:
    """Inverse-variance weights rescaled to sum to the number of points."""
    var = np.asarray(var, dtype=float)
    if np.any(~np.isfinite(var)) or np.any(var <= 0):
        raise ValueError("variances must be positive and finite")
    w = 1.0 / var
    return w * (w.size / w.sum())


def _positions(x, period):
    x = np.asarray(x, dtype=float)
    return np.mod(x, period) if period is not None else x


def binning_path(x, z, var, mode: str, kmax: int, period: float | None = None) -> list[Partition]:
    """Optimal partitions for k = 1..kmax."""
    if mode not in MODES:
        raise ValueError(f"unknown binning mode {mode!r}")
    z = np.asarray(z, dtype=float)
    if np.shape(x) != z.shape or np.shape(var) != z.shape:
        raise ValueError("x, z and var must have equal length")
    w = binning_weights(var)
    if mode == "unconstrained":
        return partition_path(z, w, kmax, "kmeans")
    return partition_path(z, w, kmax, "ksegments", positions=_positions(x, period))


def step_from_partition(part: Partition, x, z, mode: str, term: str = "",
                        period: float | None = None) -> StepFunction:
    """Turn a partition of the training points into a :class:`StepFunction`."""
    z = np.asarray(z, dtype=float)
    centers = part.centers
    if mode == "unconstrained":
        values = centers.copy()
        cuts = 0.5 * (values[1:] + values[:-1])
        return StepFunction(term, mode, values, cuts, period)
    pos = _positions(x, period)
    # adjacent bins with equal means carry no information; fuse them
    keep = np.concatenate([[True], centers[1:] != centers[:-1]])
    values = centers[keep]
    starts = np.flatnonzero(keep)
    cuts = []
    for b in starts[1:]:
        left = pos[part.assignment == b - 1].max()
        right = pos[part.assignment == b].min()
        cuts.append(0.5 * (left + right))
    return StepFunction(term, mode, values, np.asarray(cuts, dtype=float), period)


def bin_smooth(x, z, var, mode: str, k: int, period: float | None = None,
               term: str = "") -> StepFunction:
    """Bin a fitted smooth into at most ``k`` levels.

    The smallest bin count reaching the k-bin WCSS (up to rounding) is used,
    so a constant smooth yields a single bin whatever ``k`` is.
    """
    path = binning_path(x, z, var, mode, k, period)
    wcss = np.array([p.wcss for p in path])
    w = binning_weights(var)
    tol = 1e-12 * (wcss[0] + float(np.sum(w * np.asarray(z, dtype=float) ** 2)))
    k_eff = int(np.flatnonzero(wcss <= wcss[-1] + tol)[0])
    return step_from_partition(path[k_eff], x, z, mode, term, period)


def select_step(path: list[Partition], lam: float, x, z, mode: str, term: str = "",
                period: float | None = None) -> tuple[int, StepFunction]:
    """Bin count minimising WCSS_k + lam * k along a precomputed path."""
    k = choose_k([p.wcss for p in path], lam)
    return k, step_from_partition(path[k - 1], x, z, mode, term, period)


def apply_step(step: StepFunction, x_new=None, z_new=None) -> np.ndarray:
    """Binned values for new data.

    Constrained steps need ``x_new`` (wrapped by the period when cyclic);
    values below the first cut take the first bin and values beyond the
    last cut the last bin. Unconstrained steps need ``z_new``, the stored
    smooth evaluated at the new points; a value exactly between two bin
    values goes to the lower one.
    """
    if step.mode == "constrained":
        if x_new is None:
            raise ValueError("constrained steps are applied to x")
        pos = _positions(np.atleast_1d(np.asarray(x_new, dtype=float)), step.period)
        idx = np.searchsorted(step.cuts, pos, side="right")
    else:
        if z_new is None:
            raise ValueError("unconstrained steps are applied to fitted smooth values z")
        idx = np.searchsorted(step.cuts, np.atleast_1d(np.asarray(z_new, dtype=float)), side="left")
    return step.values[idx]
