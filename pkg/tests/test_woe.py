import math

import numpy as np
import pytest

from splinewoe.woe import (
    CategoricalSummary,
    UnseenCategoryError,
    apply_woe,
    select_woe_clusters,
    shrinkage_proportions,
    summarize_categories,
    woe_cluster_path,
    woe_clustered,
    woe_raw,
    woe_shrunk,
)


def make_summary(counts, positives, levels=None):
    levels = levels or tuple(f"L{i:02d}" for i in range(len(counts)))
    return CategoricalSummary(tuple(levels), np.asarray(counts, float), np.asarray(positives, float))


def test_summarize_counts():
    s = summarize_categories(["a", "a", "b"], [1, 0, 1])
    assert s.levels == ("a", "b")
    assert list(s.counts) == [2, 1]
    assert list(s.positives) == [1, 1]
    assert s.p_hat == pytest.approx(2 / 3)


def test_summarize_single_level():
    s = summarize_categories(["x"] * 5, [0, 1, 1, 0, 0])
    assert s.proportions[0] == s.p_hat


def test_summarize_matches_generator_bookkeeping():
    rng = np.random.default_rng(11)
    levels = np.array([f"c{i}" for i in range(7)])
    x = rng.choice(levels, size=1000)
    y = rng.integers(0, 2, size=1000)
    s = summarize_categories(x, y)
    assert s.n == 1000
    for lv, n_j, p_j in zip(s.levels, s.counts, s.positives):
        assert n_j == np.sum(x == lv)
        assert p_j == np.sum(y[x == lv])


def test_summarize_empty():
    with pytest.raises(ValueError):
        summarize_categories([], [])


def test_raw_woe_values():
    s = make_summary([10, 5, 8], [3, 0, 4])
    m = woe_raw(s, 0.01)
    assert m.values[0] == pytest.approx(-0.847298, abs=1e-6)
    assert m.values[1] == pytest.approx(math.log(0.002 / 0.998), abs=1e-12)
    assert m.values[1] == pytest.approx(-6.212606, abs=1e-6)
    assert m.values[2] == 0.0
    assert m.unseen_value == pytest.approx(math.log(7 / 16))


def test_raw_woe_all_positive_level():
    s = make_summary([4, 6], [4, 1])
    m = woe_raw(s, 0.01)
    assert m.values[0] == pytest.approx(math.log((1 - 0.0025) / 0.0025))


def test_constant_shift_against_counts_definition():
    s = make_summary([40, 25, 60, 13], [7, 9, 11, 2])
    raw = woe_raw(s).values
    P, F = s.total_positives, s.total_negatives
    neg = s.counts - s.positives
    ratio_form = np.log((s.positives / P) / (neg / F))
    np.testing.assert_allclose(raw - ratio_form, math.log(P / F), rtol=0, atol=1e-12)


def test_offset_vanishes_slowly():
    small = woe_raw(make_summary([10, 10], [0, 5])).values[0]
    large = woe_raw(make_summary([1000, 10], [0, 5])).values[0]
    assert small > large


def test_shrinkage_single_level_is_identity():
    s = make_summary([30], [6])
    est = shrinkage_proportions(s)
    assert est.p_tilde[0] == pytest.approx(0.2)


def test_shrinkage_equal_proportions():
    s = make_summary([20, 40, 60], [4, 8, 12])
    est = shrinkage_proportions(s)
    assert est.sigma2 == 0.0
    np.testing.assert_allclose(est.p_tilde, 0.2, rtol=1e-14)


def test_shrinkage_two_level_hand_evaluation():
    s = make_summary([90, 10], [9, 5])
    est = shrinkage_proportions(s)
    # hand evaluation of the stated estimators
    n, p = 100.0, 0.14
    pq = p * (1 - p)
    v = pq / n
    v1, v2 = pq / 90, pq / 10
    between = 90 * (0.1 - p) ** 2 + 10 * (0.5 - p) ** 2 - 1 * pq
    sigma2 = between / (n - (90 ** 2 + 10 ** 2) / n)
    b1 = v1 * (1 - 0.9) / (v1 * (1 - 1.8) + v + sigma2)
    b2 = v2 * (1 - 0.1) / (v2 * (1 - 0.2) + v + sigma2)
    assert est.v == pytest.approx(v)
    assert est.sigma2 == pytest.approx(sigma2)
    assert sigma2 == pytest.approx(0.0733111, rel=1e-5)
    np.testing.assert_allclose(est.b, [b1, b2], rtol=1e-12)
    np.testing.assert_allclose(est.p_tilde, [(1 - b1) * 0.1 + b1 * p, (1 - b2) * 0.5 + b2 * p], rtol=1e-12)
    assert est.b[1] > 10 * est.b[0]
    assert est.clamped[0] and not est.clamped[1]
    sw = woe_shrunk(s)
    np.testing.assert_allclose(sw.values, np.log(est.p_tilde / (1 - est.p_tilde)), rtol=1e-12)


def test_shrinkage_coefficients_in_unit_interval():
    rng = np.random.default_rng(5)
    for _ in range(50):
        J = rng.integers(1, 15)
        counts = rng.integers(1, 40, size=J)
        pos = rng.binomial(counts, rng.uniform(0.05, 0.6))
        if pos.sum() == 0:
            pos[0] = 1
        est = shrinkage_proportions(make_summary(counts, pos))
        assert np.all((est.b >= 0) & (est.b <= 1))
        assert est.sigma2 >= 0
        p_j = pos / counts
        np.testing.assert_allclose(est.p_tilde, (1 - est.b) * p_j + est.b * (pos.sum() / counts.sum()))


def test_shrinkage_reduces_mse_on_average():
    rng = np.random.default_rng(2024)
    raw_mse, shrunk_mse = [], []
    for _ in range(200):
        J = 30
        n_j = rng.integers(3, 21, size=J)
        p_true = rng.beta(2, 8, size=J)
        pos = rng.binomial(n_j, p_true)
        est = shrinkage_proportions(make_summary(n_j, pos))
        raw_mse.append(np.mean((pos / n_j - p_true) ** 2))
        shrunk_mse.append(np.mean((est.p_tilde - p_true) ** 2))
    assert np.mean(shrunk_mse) < np.mean(raw_mse)


def test_woe_shrunk_limits(monkeypatch):
    s = make_summary([20, 30, 50], [2, 9, 10])
    import splinewoe.woe as w

    base = w.shrinkage_proportions(s)
    zero = w.ShrinkageEstimate(np.zeros(3), s.proportions, base.v, base.v_j, base.sigma2, base.clamped)
    monkeypatch.setattr(w, "shrinkage_proportions", lambda _s: zero)
    np.testing.assert_allclose(w.woe_shrunk(s).values, woe_raw(s).values)
    one = w.ShrinkageEstimate(np.ones(3), np.full(3, s.p_hat), base.v, base.v_j, base.sigma2, base.clamped)
    monkeypatch.setattr(w, "shrinkage_proportions", lambda _s: one)
    np.testing.assert_allclose(w.woe_shrunk(s).values, math.log(s.p_hat / (1 - s.p_hat)))


def test_clustered_identity_and_single():
    s = make_summary([50, 60, 70, 80], [5, 20, 40, 70])
    raw = woe_raw(s).values
    full = woe_clustered(s, 4)
    np.testing.assert_allclose(full.values, raw)
    one = woe_clustered(s, 1)
    w = s.counts * s.proportions * (1 - s.proportions)
    assert np.allclose(one.values, np.sum(w * raw) / w.sum())


def test_clustered_merges_close_levels():
    s = make_summary([1000, 1000, 1000], [269, 289, 881])
    raw = woe_raw(s).values
    np.testing.assert_allclose(raw, [-1.0, -0.9, 2.0], atol=0.01)
    m = woe_clustered(s, 2)
    assert m.clusters[0] == m.clusters[1] != m.clusters[2]
    assert m.values[2] == raw[2]
    assert m.k == 2


def test_clustered_is_coarsening():
    rng = np.random.default_rng(9)
    counts = rng.integers(5, 80, size=12)
    pos = rng.binomial(counts, 0.3)
    s = make_summary(counts, pos)
    for k in range(1, 15):
        m = woe_clustered(s, k)
        assert len(np.unique(m.values)) <= min(k, 12)
        for c in np.unique(m.clusters):
            assert len(np.unique(m.values[m.clusters == c])) == 1


def test_select_clusters_by_penalty():
    s = make_summary([1000, 1000, 1000], [269, 289, 881])
    path = woe_cluster_path(s)
    assert len(path) == 3
    k_small, _ = select_woe_clusters(s, 1e-12)
    k_big, m = select_woe_clusters(s, 1e6)
    assert k_small == 3 and k_big == 1
    assert m.k == 1


def test_apply_woe_policies():
    s = summarize_categories(["a", "b", "a", "c"], [1, 0, 0, 1])
    m = woe_raw(s)
    out = apply_woe(["c", "a", "b"], m)
    np.testing.assert_array_equal(out, [m.lookup("c"), m.lookup("a"), m.lookup("b")])
    assert apply_woe(["zz"], m)[0] == m.unseen_value
    with pytest.raises(UnseenCategoryError, match="zz"):
        apply_woe(["a", "zz"], m, unseen_policy="error")


def test_woe_map_round_trip():
    s = make_summary([10, 20], [3, 5])
    m = woe_clustered(s, 1)
    back = type(m).from_dict(m.to_dict())
    assert back.levels == m.levels
    np.testing.assert_array_equal(back.values, m.values)
    np.testing.assert_array_equal(back.clusters, m.clusters)
