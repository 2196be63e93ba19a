"""Exact weighted 1-D clustering by dynamic programming.

Both clustering modes minimise the same weighted within-bin sum of squares

    sum_k sum_{i in B_k} w_i (z_i - zbar_k)^2

over partitions into contiguous runs. In ``by_value`` mode (k-means) the runs
are taken in the order of the values themselves; in ``by_position`` mode
(k-segments) they are runs of an external ordering key.

Segment costs come from prefix sums of w, wz and wz^2, so each candidate
costs O(1). The by-position DP is the plain O(m^2 k) recursion; by-value
runs use divide and conquer on the monotone argmin, O(k m log m).
Points sharing a value (by_value) or a position (by_position) are grouped
first and always land in the same bin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Partition",
    "cluster_sorted",
    "kmeans_weighted",
    "ksegments_weighted",
    "partition_path",
    "select_k",
    "choose_k",
]

# relative tolerance (w.r.t. the total sum of squares) for treating two DP
# candidates as tied
_TIE_RTOL = 1e-12


@dataclass(frozen=True)
class Partition:
    """An optimal contiguous partition.

    ``assignment`` is given in the caller's input order; bins are numbered
    0..K-1 along the ordering (ascending value or ascending position).
    """

    k: int
    assignment: np.ndarray
    centers: np.ndarray
    wcss: float
    ordering: str

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.k)


def _check_inputs(z, weights):
    z = np.asarray(z, dtype=float)
    if z.ndim != 1 or z.size == 0:
        raise ValueError("need a non-empty 1-D array of values")
    if weights is None:
        w = np.ones_like(z)
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != z.shape:
            raise ValueError("weights must have the same length as values")
    if not np.all(np.isfinite(z)):
        raise ValueError("values must be finite")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ValueError("weights must be finite and nonnegative")
    if not w.sum() > 0:
        raise ValueError("all weights are zero")
    return z, w


def _group_sums(keys_sorted, z_sorted, w_sorted):
    """Collapse runs of equal keys; returns group starts and per-group sums."""
    m_new = np.empty(keys_sorted.size, dtype=bool)
    m_new[0] = True
    m_new[1:] = keys_sorted[1:] != keys_sorted[:-1]
    starts = np.flatnonzero(m_new)
    # centre before accumulating squares to limit cancellation
    shift = np.sum(w_sorted * z_sorted) / np.sum(w_sorted)
    zc = z_sorted - shift
    gw = np.add.reduceat(w_sorted, starts)
    gs1 = np.add.reduceat(w_sorted * zc, starts)
    gs2 = np.add.reduceat(w_sorted * zc * zc, starts)
    return starts, gw, gs1, gs2


class _Costs:
    """O(1) segment cost over groups [i, j) from prefix sums."""

    def __init__(self, gw, gs1, gs2):
        self.W = np.concatenate([[0.0], np.cumsum(gw)])
        self.S1 = np.concatenate([[0.0], np.cumsum(gs1)])
        self.S2 = np.concatenate([[0.0], np.cumsum(gs2)])
        self.m = gw.size

    def many(self, i, js):
        """cost(i, j) for ends js > i; i may be a scalar or a matching array."""
        w = self.W[js] - self.W[i]
        s1 = self.S1[js] - self.S1[i]
        s2 = self.S2[js] - self.S2[i]
        with np.errstate(invalid="ignore", divide="ignore"):
            c = s2 - np.where(w > 0, s1 * s1 / np.where(w > 0, w, 1.0), 0.0)
        return np.maximum(c, 0.0)


def _solve_layers(costs: _Costs, kmax: int, monotone: bool):
    """Suffix DP tables F[r][i] = best cost of groups i..m-1 in r bins."""
    m = costs.m
    inf = np.inf
    F = np.full((kmax + 1, m + 1), inf)
    F[0, m] = 0.0
    idx = np.arange(m)
    F[1, :m] = costs.many(idx, np.full(m, m))
    for r in range(2, kmax + 1):
        prev = F[r - 1]
        last_i = m - r  # need at least r groups left
        if last_i < 0:
            break
        if monotone:
            _dc_layer(costs, prev, F[r], 0, last_i, 1, m - r + 1, r)
        else:
            for i in range(last_i + 1):
                js = np.arange(i + 1, m - r + 2)
                F[r, i] = np.min(costs.many(i, js) + prev[js])
    return F


def _dc_layer(costs, prev, out, ilo, ihi, jlo, jhi, r):
    """Fill out[ilo..ihi] using opt(i) monotone nondecreasing in i."""
    m = costs.m
    stack = [(ilo, ihi, jlo, jhi)]
    while stack:
        a, b, lo, hi = stack.pop()
        if a > b:
            continue
        i = (a + b) // 2
        j0 = max(lo, i + 1)
        j1 = min(hi, m - r + 1)
        js = np.arange(j0, j1 + 1)
        vals = costs.many(i, js) + prev[js]
        t = int(np.argmin(vals))
        out[i] = vals[t]
        best = j0 + t
        stack.append((a, i - 1, lo, best))
        stack.append((i + 1, b, best, hi))


def _reconstruct(costs: _Costs, F, k: int, tol: float):
    """Lexicographically earliest optimal break vector for k bins."""
    m = costs.m
    breaks = []
    i = 0
    for r in range(k, 1, -1):
        js = np.arange(i + 1, m - r + 2)
        vals = costs.many(i, js) + F[r - 1][js]
        target = vals.min()
        j = int(js[np.flatnonzero(vals <= target + tol)[0]])
        breaks.append(j)
        i = j
    return breaks


def _finish(order, group_starts, n, breaks_g, z, w, ordering) -> Partition:
    """Map group breaks back to points and recompute centers/WCSS directly."""
    bounds_g = [0, *breaks_g, group_starts.size]
    pt_bounds = [int(group_starts[g]) if g < group_starts.size else n for g in bounds_g]
    labels_sorted = np.empty(n, dtype=np.intp)
    for b in range(len(pt_bounds) - 1):
        labels_sorted[pt_bounds[b]:pt_bounds[b + 1]] = b
    assignment = np.empty(n, dtype=np.intp)
    assignment[order] = labels_sorted
    k = len(pt_bounds) - 1
    centers = np.empty(k)
    wcss = 0.0
    for b in range(k):
        sel = assignment == b
        wb, zb = w[sel], z[sel]
        tot = wb.sum()
        centers[b] = np.sum(wb * zb) / tot if tot > 0 else zb.mean()
        wcss += float(np.sum(wb * (zb - centers[b]) ** 2))
    return Partition(k=k, assignment=assignment, centers=centers, wcss=wcss,
                     ordering=ordering)


def _path(keys, z, w, kmax, ordering) -> list[Partition]:
    if kmax < 1:
        raise ValueError("k must be at least 1")
    order = np.argsort(keys, kind="stable")
    starts, gw, gs1, gs2 = _group_sums(keys[order], z[order], w[order])
    costs = _Costs(gw, gs1, gs2)
    kmax_eff = min(kmax, costs.m)
    F = _solve_layers(costs, kmax_eff, monotone=(ordering == "by_value"))
    tol = _TIE_RTOL * max(float(costs.S2[-1]), np.finfo(float).tiny)
    out = []
    for k in range(1, kmax + 1):
        ke = min(k, kmax_eff)
        if ke < k:
            out.append(out[-1])
            continue
        breaks = _reconstruct(costs, F, ke, tol)
        out.append(_finish(order, starts, z.size, breaks, z, w, ordering))
    return out


def partition_path(z, weights=None, kmax: int = 10, mode: str = "kmeans",
                   positions=None) -> list[Partition]:
    """Optimal partitions for every k in 1..kmax from a single DP run.

    Entry ``k-1`` holds the k-bin solution (with K reduced when fewer
    distinct values/positions exist).
    """
    z, w = _check_inputs(z, weights)
    if mode == "kmeans":
        return _path(z, z, w, kmax, "by_value")
    if mode == "ksegments":
        keys = np.arange(z.size, dtype=float) if positions is None else np.asarray(positions, dtype=float)
        if keys.shape != z.shape:
            raise ValueError("positions must have the same length as values")
        return _path(keys, z, w, kmax, "by_position")
    raise ValueError(f"unknown mode {mode!r}")


def cluster_sorted(values, weights, k: int) -> Partition:
    """Optimal k-bin partition of values that are already sorted ascending."""
    values = np.asarray(values, dtype=float)
    if values.size and np.any(np.diff(values) < 0):
        raise ValueError("values must be sorted ascending")
    if k < 1:
        raise ValueError("k must be at least 1")
    return partition_path(values, weights, k, "kmeans")[-1]


def kmeans_weighted(values, weights, k: int) -> Partition:
    """Exact weighted univariate k-means (Fisher's natural breaks when w=1)."""
    if k < 1:
        raise ValueError("k must be at least 1")
    return partition_path(values, weights, k, "kmeans")[-1]


def ksegments_weighted(positions, z, weights, k: int) -> Partition:
    """Exact weighted k-segments: bins are runs of consecutive positions.

    Points with equal position are never split. Pass ``positions=None`` to
    use the given order.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    return partition_path(z, weights, k, "ksegments", positions)[-1]


def choose_k(wcss, lam: float) -> int:
    """k in 1..len(wcss) minimising wcss_k + lam * k; ties go to smaller k."""
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    wcss = np.asarray(wcss, dtype=float)
    scores = wcss + lam * np.arange(1, wcss.size + 1)
    return int(np.argmin(scores)) + 1


def select_k(values, weights, kmax: int, lam: float, mode: str = "kmeans",
             positions=None) -> tuple[int, Partition]:
    """Penalised choice of the bin count, WCSS_k + lam * k over k <= kmax."""
    if kmax < 1:
        raise ValueError("kmax must be at least 1")
    path = partition_path(values, weights, kmax, mode, positions)
    k_star = choose_k([p.wcss for p in path], lam)
    return k_star, path[k_star - 1]
