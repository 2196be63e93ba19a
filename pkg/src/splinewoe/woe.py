"""Weight-of-evidence encodings of categorical predictors.

Three variants are provided: the raw empirical log-odds per level, log-odds
of shrinkage-estimated proportions, and a clustered map in which levels with
similar log-odds are fused by exact weighted 1-D k-means.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cluster1d import Partition, choose_k, kmeans_weighted, partition_path

__all__ = [
    "CategoricalSummary",
    "ShrinkageEstimate",
    "WoeMap",
    "summarize_categories",
    "woe_raw",
    "shrinkage_proportions",
    "woe_shrunk",
    "woe_clustered",
    "woe_cluster_path",
    "select_woe_clusters",
    "apply_woe",
    "UnseenCategoryError",
]

DEFAULT_OFFSET = 0.01


class UnseenCategoryError(KeyError):
    """A level that was not present when the map was fitted."""

    def __str__(self):
        return str(self.args[0])


def _logit(p):
    p = np.asarray(p, dtype=float)
    return np.log(p) - np.log1p(-p)


@dataclass(frozen=True)
class CategoricalSummary:
    levels: tuple[str, ...]
    counts: np.ndarray
    positives: np.ndarray

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def total_positives(self) -> int:
        return int(self.positives.sum())

    @property
    def total_negatives(self) -> int:
        return self.n - self.total_positives

    @property
    def p_hat(self) -> float:
        return self.total_positives / self.n

    @property
    def proportions(self) -> np.ndarray:
        return self.positives / self.counts


def summarize_categories(x, y) -> CategoricalSummary:
    """Per-level counts and positive counts; levels sorted as strings."""
    x = np.asarray(x, dtype=object)
    y = np.asarray(y)
    if x.size == 0:
        raise ValueError("empty categorical column")
    if x.shape != y.shape:
        raise ValueError("x and y must have equal length")
    levels, inv = np.unique(x.astype(str), return_inverse=True)
    counts = np.bincount(inv, minlength=levels.size).astype(float)
    pos = np.bincount(inv, weights=(y == 1).astype(float), minlength=levels.size)
    return CategoricalSummary(tuple(str(v) for v in levels), counts, pos)


def _offset_proportions(p, n_j, c):
    """Replace boundary proportions 0 and 1 by c/n_j and 1 - c/n_j."""
    p = np.array(p, dtype=float)
    lo = p <= 0.0
    hi = p >= 1.0
    p[lo] = c / n_j[lo]
    p[hi] = 1.0 - c / n_j[hi]
    return p


@dataclass(frozen=True)
class WoeMap:
    variant: str
    levels: tuple[str, ...]
    values: np.ndarray
    unseen_value: float
    offset: float
    clusters: np.ndarray | None = None
    _index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise ValueError("woe values must be finite")
        object.__setattr__(self, "_index", {lv: i for i, lv in enumerate(self.levels)})

    @property
    def k(self) -> int:
        return len(np.unique(self.values))

    def lookup(self, level: str) -> float:
        return float(self.values[self._index[level]])

    def to_dict(self) -> dict:
        d = {
            "variant": self.variant,
            "levels": list(self.levels),
            "values": [float(v) for v in self.values],
            "unseen_value": float(self.unseen_value),
            "offset": float(self.offset),
        }
        if self.clusters is not None:
            d["clusters"] = [int(c) for c in self.clusters]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "WoeMap":
        clusters = d.get("clusters")
        return cls(
            variant=d["variant"],
            levels=tuple(d["levels"]),
            values=np.asarray(d["values"], dtype=float),
            unseen_value=float(d["unseen_value"]),
            offset=float(d["offset"]),
            clusters=None if clusters is None else np.asarray(clusters, dtype=int),
        )


def woe_raw(summary: CategoricalSummary, c: float = DEFAULT_OFFSET) -> WoeMap:
    """Empirical log-odds per level, with the boundary offset ``c``."""
    if not 0 < c < 1:
        raise ValueError("offset c must lie in (0, 1)")
    p = _offset_proportions(summary.proportions, summary.counts, c)
    return WoeMap("raw", summary.levels, _logit(p), float(_logit(summary.p_hat)), c)


@dataclass(frozen=True)
class ShrinkageEstimate:
    b: np.ndarray
    p_tilde: np.ndarray
    v: float
    v_j: np.ndarray
    sigma2: float
    clamped: np.ndarray


def shrinkage_proportions(summary: CategoricalSummary) -> ShrinkageEstimate:
    """Shrink each level's proportion toward the overall proportion.

    The coefficient minimising expected squared error is

        b_j = v_j (1 - n_j/n) / (v_j (1 - 2 n_j/n) + v + sigma^2)

    with pooled-proportion sampling variances ``v = p(1-p)/n`` and
    ``v_j = p(1-p)/n_j`` and a moment estimate of the between-level
    variance ``sigma^2``. The formula assumes n_j/n < 0.5; outside that
    range (or whenever it leaves [0, 1]) ``b_j`` is clamped, and
    ``clamped`` flags the affected levels.
    """
    n_j = summary.counts
    n = float(summary.n)
    J = n_j.size
    p = summary.p_hat
    p_j = summary.proportions
    pq = p * (1.0 - p)
    v = pq / n
    v_j = pq / n_j
    denom = n - np.sum(n_j ** 2) / n
    if J > 1 and denom > 0:
        between = np.sum(n_j * (p_j - p) ** 2) - (J - 1) * pq
        sigma2 = max(0.0, between / denom)
    else:
        sigma2 = 0.0
    frac = n_j / n
    num = v_j * (1.0 - frac)
    den = v_j * (1.0 - 2.0 * frac) + v + sigma2
    with np.errstate(divide="ignore", invalid="ignore"):
        raw_b = np.where(den > 0, num / np.where(den > 0, den, 1.0), 1.0)
    if sigma2 == 0.0:
        # the coefficient is exactly 1 here; avoid leaving rounding noise
        # that would make a fully pooled column look informative
        raw_b = np.where(frac < 0.5, 1.0, raw_b)
    b = np.clip(raw_b, 0.0, 1.0)
    clamped = (frac >= 0.5) | (raw_b != b)
    p_tilde = (1.0 - b) * p_j + b * p
    return ShrinkageEstimate(b, p_tilde, v, v_j, sigma2, clamped)


def woe_shrunk(summary: CategoricalSummary, c: float = DEFAULT_OFFSET) -> WoeMap:
    """Log-odds of the shrunk proportions."""
    if not 0 < c < 1:
        raise ValueError("offset c must lie in (0, 1)")
    est = shrinkage_proportions(summary)
    p = _offset_proportions(est.p_tilde, summary.counts, c)
    return WoeMap("shrunk", summary.levels, _logit(p), float(_logit(summary.p_hat)), c)


def cluster_weights(summary: CategoricalSummary, c: float = DEFAULT_OFFSET) -> np.ndarray:
    """Inverse asymptotic variance of each level's log-odds, n_j p_j (1 - p_j)."""
    p = _offset_proportions(summary.proportions, summary.counts, c)
    return summary.counts * p * (1.0 - p)


def _clustered_map(summary, raw: WoeMap, part: Partition) -> WoeMap:
    values = part.centers[part.assignment]
    return WoeMap("clustered", summary.levels, values, raw.unseen_value, raw.offset,
                  clusters=part.assignment.copy())


def woe_clustered(summary: CategoricalSummary, k: int, c: float = DEFAULT_OFFSET) -> WoeMap:
    """Fuse levels into at most ``k`` groups of similar log-odds.

    One point per level, weighted by ``n_j p_j (1 - p_j)``; every level is
    mapped to the weighted mean log-odds of its group.
    """
    raw = woe_raw(summary, c)
    part = kmeans_weighted(raw.values, cluster_weights(summary, c), k)
    return _clustered_map(summary, raw, part)


def woe_cluster_path(summary: CategoricalSummary, c: float = DEFAULT_OFFSET,
                     kmax: int | None = None) -> list[Partition]:
    """Clusterings for k = 1..kmax (default: number of levels).

    Weights are normalised to sum to one here so that the WCSS, and hence
    the penalty scale used for choosing k, is a weighted variance that does
    not grow with the sample size.
    """
    raw = woe_raw(summary, c)
    w = cluster_weights(summary, c)
    kmax = len(summary.levels) if kmax is None else kmax
    return partition_path(raw.values, w / w.sum(), kmax, "kmeans")


def select_woe_clusters(summary: CategoricalSummary, lam: float,
                        c: float = DEFAULT_OFFSET, path=None) -> tuple[int, WoeMap]:
    """Cluster count minimising WCSS_k + lam*k, and the resulting map."""
    if path is None:
        path = woe_cluster_path(summary, c)
    k = choose_k([p.wcss for p in path], lam)
    return k, _clustered_map(summary, woe_raw(summary, c), path[k - 1])


def apply_woe(x, woe_map: WoeMap, unseen_policy: str = "overall_logodds") -> np.ndarray:
    """Replace each level by its woe value."""
    if unseen_policy not in ("overall_logodds", "error"):
        raise ValueError(f"unknown unseen_policy {unseen_policy!r}")
    x = np.asarray(x, dtype=object)
    out = np.empty(x.shape, dtype=float)
    index = woe_map._index
    for i, level in enumerate(x):
        j = index.get(str(level))
        if j is None:
            if unseen_policy == "error":
                raise UnseenCategoryError(f"unseen category level {level!r}")
            out[i] = woe_map.unseen_value
        else:
            out[i] = woe_map.values[j]
    return out
