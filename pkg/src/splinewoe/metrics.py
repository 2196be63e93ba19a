"""Performance measures for imbalanced binary classification."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import betainc, betaln
from scipy.stats import rankdata

__all__ = ["MetricReport", "auc", "weighted_brier", "h_measure", "roc_points",
           "roc_hull", "evaluate"]


def _classes(y):
    y = np.asarray(y)
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("y must be binary 0/1")
    n1 = int(np.sum(y == 1))
    n0 = y.size - n1
    if n0 == 0 or n1 == 0:
        raise ValueError("both classes must be present")
    return y.astype(bool), n0, n1


def auc(scores, y) -> float:
    """Area under the ROC curve (Mann-Whitney, ties count one half)."""
    pos, n0, n1 = _classes(y)
    scores = np.asarray(scores, dtype=float)
    r = rankdata(scores)
    u = r[pos].sum() - n1 * (n1 + 1) / 2.0
    return float(u / (n0 * n1))


def weighted_brier(p, y) -> float:
    """Brier score with case weights 1/pi_0 and 1/pi_1.

    Algebraically this is the sum of the two per-class mean squared errors,
    which is how it is computed.
    """
    pos, _, _ = _classes(y)
    p = np.asarray(p, dtype=float)
    if np.any((p < 0) | (p > 1)):
        raise ValueError("probabilities must lie in [0, 1]")
    return float(np.mean((p[pos] - 1.0) ** 2) + np.mean(p[~pos] ** 2))


def roc_points(scores, y):
    """ROC vertices (fpr, tpr) from (0, 0) to (1, 1), one per distinct score."""
    pos, n0, n1 = _classes(y)
    scores = np.asarray(scores, dtype=float)
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    tp = np.cumsum(pos[order])
    fp = np.cumsum(~pos[order])
    last = np.concatenate([s[1:] != s[:-1], [True]])
    fpr = np.concatenate([[0.0], fp[last] / n0])
    tpr = np.concatenate([[0.0], tp[last] / n1])
    return fpr, tpr


def roc_hull(fpr, tpr):
    """Vertices of the upper convex hull of ROC points, by ascending fpr."""
    pts = sorted(set(zip(np.asarray(fpr, float).tolist(), np.asarray(tpr, float).tolist())) |
                 {(0.0, 0.0), (1.0, 1.0)})
    hull: list[tuple[float, float]] = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop the middle point unless it lies strictly above the chord
            if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) >= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    h = np.asarray(hull)
    return h[:, 0], h[:, 1]


def _severity_params(pi0, pi1, severity_ratio):
    sr = pi1 / pi0 if severity_ratio is None else float(severity_ratio)
    if sr > 0:
        return 2.0, 1.0 + 1.0 / sr
    if sr < 0:
        return pi1 + 1.0, pi0 + 1.0
    raise ValueError("severity ratio must be nonzero")


def _partial_moments(lo, hi, a, b):
    """int_lo^hi c u(c) dc and int_lo^hi (1 - c) u(c) dc for u = Beta(a, b)."""
    m1 = np.exp(betaln(a + 1, b) - betaln(a, b))
    m0 = np.exp(betaln(a, b + 1) - betaln(a, b))
    ic = m1 * (betainc(a + 1, b, hi) - betainc(a + 1, b, lo))
    i1c = m0 * (betainc(a, b + 1, hi) - betainc(a, b + 1, lo))
    return ic, i1c


def h_measure(scores, y, severity_ratio: float | None = None) -> float:
    """H-measure: 1 - L / L_max.

    For a cost c in [0, 1] the loss at ROC point (f, t) is
    ``c pi0 f + (1 - c) pi1 (1 - t)``; L averages its minimum over the ROC
    convex hull against a Beta severity density, and L_max does the same
    for the trivial classifiers (the points (0, 0) and (1, 1)).

    The density follows the reference implementation: with severity ratio
    SR (default pi1/pi0) it is Beta(2, 1 + 1/SR) for SR > 0, and
    Beta(pi1 + 1, pi0 + 1) for SR < 0.
    """
    _, n0, n1 = _classes(y)
    pi0, pi1 = n0 / (n0 + n1), n1 / (n0 + n1)
    a, b = _severity_params(pi0, pi1, severity_ratio)
    f, t = roc_hull(*roc_points(scores, y))
    # vertex v is optimal for c between the crossovers with its neighbours
    df, dt = np.diff(f), np.diff(t)
    cross = pi1 * dt / (pi1 * dt + pi0 * df)
    upper = np.concatenate([[1.0], cross])
    lower = np.concatenate([cross, [0.0]])
    ic, i1c = _partial_moments(lower, upper, a, b)
    L = float(np.sum(pi0 * f * ic + pi1 * (1.0 - t) * i1c))
    ic0, _ = _partial_moments(0.0, pi1, a, b)
    _, i1c1 = _partial_moments(pi1, 1.0, a, b)
    Lmax = float(pi0 * ic0 + pi1 * i1c1)
    h = 1.0 - L / Lmax
    if -1e-12 < h < 0:
        h = 0.0
    return float(min(h, 1.0))


@dataclass(frozen=True)
class MetricReport:
    auc: float
    wbrier: float
    h: float
    pi0: float
    pi1: float
    severity_ratio: float
    n: int
    positives: int

    FIELDS = ("auc", "wbrier", "h", "pi0", "pi1", "severity_ratio", "n", "positives")

    def as_dict(self) -> dict:
        return asdict(self)

    def tsv_row(self) -> str:
        return "\t".join(repr(getattr(self, k)) for k in self.FIELDS)

    @classmethod
    def tsv_header(cls) -> str:
        return "\t".join(cls.FIELDS)


def evaluate(p, y, severity_ratio: float | None = None) -> MetricReport:
    """AUC, weighted Brier and H-measure of predicted probabilities."""
    _, n0, n1 = _classes(y)
    n = n0 + n1
    sr = n1 / n0 if severity_ratio is None else float(severity_ratio)
    return MetricReport(auc(p, y), weighted_brier(p, y), h_measure(p, y, sr),
                        n0 / n, n1 / n, sr, n, n1)
