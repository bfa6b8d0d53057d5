import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from atsgraph import (MetricWeights, SamplerConfig, SamplerState, ScoreTable, density_scores,
                      fuse, kmeans, percentile, select, weight_schedule)
from atsgraph.sampler import beta1_sample


def brute_percentile(values):
    n = len(values)
    return np.array([sum(1 for j in range(n) if j != i and values[j] < values[i]) / n
                     for i in range(n)])


def test_percentile_worked_example():
    assert percentile([1, 2, 3, 4, 5]).tolist() == [0, 0.2, 0.4, 0.6, 0.8]
    assert percentile([42.0]).tolist() == [0.0]
    np.testing.assert_array_equal(percentile([3, 3, 7]), [0, 0, 2 / 3])


def test_percentile_errors():
    with pytest.raises(ValueError):
        percentile([])
    with pytest.raises(ValueError):
        percentile([1.0, np.nan])


@given(arrays(np.float64, st.integers(1, 40), elements=st.floats(-1e6, 1e6)))
def test_percentile_matches_pairwise_count(values):
    p = percentile(values)
    np.testing.assert_array_equal(p, brute_percentile(values))
    assert p.min() >= 0 and p.max() <= 1 - 1 / values.size
    assert p[np.argmax(values)] == p.max()


def test_kmeans_two_clouds():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(40, 3)) * 0.1
    b = rng.normal(size=(30, 3)) * 0.1 + 10
    res = kmeans(np.vstack([a, b]), 2, rng)
    cents = sorted(map(tuple, res.centroids))
    np.testing.assert_allclose(cents[0], a.mean(axis=0), atol=1e-12)
    np.testing.assert_allclose(cents[1], b.mean(axis=0), atol=1e-12)


def test_kmeans_degenerate_and_single():
    pts = np.tile([1.0, 2.0], (6, 1))
    labels, cents = kmeans(pts, 3, np.random.default_rng(0))
    assert cents.shape == (1, 2)
    np.testing.assert_array_equal(cents[0], [1.0, 2.0])
    rng = np.random.default_rng(1)
    x = rng.normal(size=(25, 4))
    _, c = kmeans(x, 1, rng)
    np.testing.assert_allclose(c[0], x.mean(axis=0))
    _, c = kmeans(x[:2], 5, rng)
    assert c.shape[0] == 2


def test_kmeans_rejects_nonfinite():
    with pytest.raises(ValueError):
        kmeans(np.array([[0.0], [np.inf]]), 1, np.random.default_rng(0))


def test_kmeans_objective_non_increasing():
    rng = np.random.default_rng(3)
    for _ in range(20):
        x = rng.normal(size=(int(rng.integers(5, 80)), 3))
        res = kmeans(x, int(rng.integers(1, 8)), rng, tol=0.0, max_iter=50)
        h = np.array(res.inertia_history)
        assert np.all(np.diff(h) <= 1e-9 * max(1.0, h[0]))


def test_density_values():
    z = np.array([[0.0, 0.0], [3.0, 0.0]])
    # one cluster: centroid (1.5, 0), both points at distance 1.5
    np.testing.assert_allclose(density_scores(z, 1, np.random.default_rng(0)), [0.4, 0.4])
    np.testing.assert_allclose(density_scores(z, 2, np.random.default_rng(0)), [1.0, 1.0])
    z = np.array([[0.0], [6.0]])
    np.testing.assert_allclose(density_scores(z, 1, np.random.default_rng(0)), [0.25, 0.25])
    z = np.array([[0.0], [2.0]])
    np.testing.assert_allclose(density_scores(z, 1, np.random.default_rng(0)), [0.5, 0.5])


def test_weight_schedule_threshold_branch():
    cfg = SamplerConfig(epsilon=10, threshold=5)
    rng = np.random.default_rng(0)
    for n_e in range(6):
        w = weight_schedule(n_e, cfg, rng)
        assert (w.alpha, w.beta, w.gamma) == (0.0, 0.0, 1.0)
    w = weight_schedule(6, cfg, rng)
    assert w.alpha == w.beta and abs(w.alpha + w.beta + w.gamma - 1) <= 1e-12


@pytest.mark.parametrize("n_t", [0.5, 1.0, 3.0, 9.0])
def test_weight_schedule_beta_mean(n_t):
    cfg = SamplerConfig(epsilon=100, threshold=0)
    rng = np.random.default_rng(int(n_t * 10))
    g = [weight_schedule(int(n_t * 100), cfg, rng).gamma for _ in range(10_000)]
    assert abs(np.mean(g) - 1 / (1 + n_t)) <= 0.02


def test_beta_sampler_distribution():
    from scipy import stats
    rng = np.random.default_rng(0)
    for b in (0.3, 1.0, 4.0):
        x = beta1_sample(b, rng, size=20_000)
        assert stats.kstest(x, stats.beta(1, b).cdf).pvalue > 1e-3


def test_beta_mean_non_increasing_in_epoch():
    cfg = SamplerConfig(epsilon=50, threshold=10)
    means = []
    for n_e in (11, 30, 60, 110, 210, 510):
        rng = np.random.default_rng(0)
        means.append(np.mean([weight_schedule(n_e, cfg, rng).gamma for _ in range(10_000)]))
    assert all(b <= a + 0.02 for a, b in zip(means, means[1:]))


def test_metric_weights_validation():
    with pytest.raises(ValueError):
        MetricWeights(0.5, 0.5, 0.5)
    with pytest.raises(ValueError):
        MetricWeights(-0.1, 0.6, 0.5)
    w = MetricWeights.from_gamma(0.37)
    assert w.alpha == w.beta


def test_restricted_weights():
    w = MetricWeights(0.25, 0.25, 0.5)
    r = w.restricted(("entropy", "centrality"))
    assert r.beta == 0 and r.alpha == pytest.approx(1 / 3) and r.gamma == pytest.approx(2 / 3)
    r = MetricWeights(0.0, 0.0, 1.0).restricted(("entropy", "density"))
    assert (r.alpha, r.beta, r.gamma) == (0.5, 0.5, 0.0)
    assert MetricWeights(0.25, 0.25, 0.5).restricted(("density",)).beta == 1.0


def make_table(e, d, c):
    return ScoreTable(np.arange(len(e)), np.asarray(e, float), np.asarray(d, float),
                      np.asarray(c, float))


def test_fuse_arithmetic():
    t = make_table([0, 1, 2, 3, 4], [0, 1, 2, 3, 4], [0, 1, 2, 3, 4])
    t.p_entropy = np.array([0.8])
    t.p_density = np.array([0.5])
    t.p_centrality = np.array([0.2])
    assert fuse(t, MetricWeights(0.25, 0.25, 0.5))[0] == pytest.approx(0.425)
    t = make_table([5, 1, 3], [2, 2, 9], [7, 8, 1])
    np.testing.assert_array_equal(fuse(t, MetricWeights(0, 0, 1)), t.p_centrality)
    t = make_table([1, 2, 3], [1, 2, 3], [1, 2, 3])
    np.testing.assert_allclose(fuse(t, MetricWeights(1 / 3, 1 / 3, 1 / 3)), t.p_entropy)


def test_select_cases():
    rng = np.random.default_rng(0)
    assert select([0.1, 0.9, 0.4], 1, rng).tolist() == [1]
    assert sorted(select([0.1, 0.9, 0.4], 2, rng).tolist()) == [1, 2]
    assert sorted(select([0.1, 0.9, 0.4], 5, rng).tolist()) == [0, 1, 2]
    with pytest.raises(ValueError):
        select([], 1, rng)


def test_select_ties_random_but_seeded():
    picks = {int(select([0.5, 0.9, 0.9, 0.9], 1, np.random.default_rng(s))[0])
             for s in range(50)}
    assert picks == {1, 2, 3}
    a = select([0.5, 0.9, 0.9], 1, np.random.default_rng(7))
    assert a.tolist() == select([0.5, 0.9, 0.9], 1, np.random.default_rng(7)).tolist()


def brute_argmax(e, d, c, w):
    n = len(e)
    def pct(v, i):
        return sum(v[j] < v[i] for j in range(n)) / n
    s = [w.alpha * pct(e, i) + w.beta * pct(d, i) + w.gamma * pct(c, i) for i in range(n)]
    best = max(s)
    return {i for i in range(n) if abs(s[i] - best) < 1e-12}


def test_select_matches_brute_force_small():
    rng = np.random.default_rng(4)
    for _ in range(200):
        n = int(rng.integers(1, 9))
        e, d, c = (rng.integers(0, 5, n).astype(float) for _ in range(3))
        w = MetricWeights.from_gamma(float(rng.random()))
        t = make_table(e, d, c)
        fuse(t, w)
        assert int(select(t.score, 1, rng)[0]) in brute_argmax(e, d, c, w)


@settings(max_examples=50)
@given(st.integers(2, 30), st.integers(0, 2**31 - 1))
def test_monotone_rescaling_invariance(n, seed):
    rng = np.random.default_rng(seed)
    e, d, c = rng.random(n), rng.random(n), rng.random(n) * 1e-3
    w = MetricWeights.from_gamma(float(rng.random()))
    t1 = make_table(e, d, c)
    t2 = make_table(np.exp(3 * e) - 7, np.log1p(d) * 100, c ** 3)
    np.testing.assert_array_equal(t1.percentiles(), t2.percentiles())
    np.testing.assert_array_equal(fuse(t1, w), fuse(t2, w))
    assert select(t1.score, 1, np.random.default_rng(1)).tolist() == \
        select(t2.score, 1, np.random.default_rng(1)).tolist()


def test_sampler_state_partition():
    st_ = SamplerState(np.arange(10), [3], SamplerConfig(), np.random.default_rng(0))
    st_.check()
    st_.move([0, 5])
    st_.check()
    assert st_.labeled.tolist() == [0, 3, 5]
    with pytest.raises(ValueError):
        st_.move([3])
    with pytest.raises(ValueError):
        SamplerState(np.arange(3), [7], SamplerConfig(), np.random.default_rng(0))


def test_sampler_config():
    assert SamplerConfig().batch_size(99) == 1
    assert SamplerConfig(epsilon=100).batch_size(1000) == 10
    assert SamplerConfig(batch_per_epoch=3).batch_size(1000) == 3
    for bad in (dict(epsilon=0), dict(n_clusters=0), dict(batch_per_epoch=0)):
        with pytest.raises(ValueError):
            SamplerConfig(**bad)
