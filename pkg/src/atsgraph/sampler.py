"""Candidate scoring and selection for active training-set growth.

Three raw metrics are computed for every candidate node: the model's
supervised loss (uncertainty), the closeness of its structure embedding to a
K-means centroid (density), and a precomputed structural centrality. Each is
turned into a within-candidate percentile, the percentiles are mixed with
weights whose centrality share is drawn from ``Beta(1, n_t)``, and the top
scoring candidates are moved into the training set.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

METRICS = ("entropy", "density", "centrality")


@dataclass(frozen=True)
class SamplerConfig:
    epsilon: float = 1500.0
    threshold: int = 0
    n_clusters: int = 10
    batch_per_epoch: int | None = None
    pagerank_damping: float = 0.85
    kmeans_max_iter: int = 100
    kmeans_tol: float = 1e-6

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.n_clusters < 1:
            raise ValueError("n_clusters must be >= 1")
        if self.batch_per_epoch is not None and self.batch_per_epoch < 1:
            raise ValueError("batch_per_epoch must be >= 1")
        if self.threshold < 0:
            raise ValueError("threshold must be >= 0")

    def batch_size(self, n_candidates: int) -> int:
        """Nodes moved per step; by default enough to empty the pool within epsilon steps."""
        if self.batch_per_epoch is not None:
            return self.batch_per_epoch
        return max(1, int(np.ceil(n_candidates / self.epsilon)))


@dataclass(frozen=True)
class MetricWeights:
    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        w = (self.alpha, self.beta, self.gamma)
        if any(not 0.0 <= v <= 1.0 for v in w):
            raise ValueError(f"weights must lie in [0, 1], got {w}")
        if abs(sum(w) - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {sum(w)!r}")

    @classmethod
    def from_gamma(cls, gamma: float) -> "MetricWeights":
        half = (1.0 - gamma) / 2.0
        return cls(half, half, 1.0 - 2.0 * half)

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, self.gamma])

    def restricted(self, metrics) -> "MetricWeights":
        """Zero the weights of metrics not in ``metrics`` and renormalize.

        When every kept weight is zero the kept metrics share equally.
        """
        keep = np.array([m in metrics for m in METRICS])
        if not keep.any():
            raise ValueError("need at least one metric")
        w = np.where(keep, self.as_array(), 0.0)
        w = w / w.sum() if w.sum() > 0 else keep / keep.sum()
        # absorb rounding into the last kept weight so the sum is exact
        last = np.flatnonzero(keep)[-1]
        w[last] = 1.0 - (w.sum() - w[last])
        return MetricWeights(*(float(v) for v in np.clip(w, 0.0, 1.0)))


@dataclass
class ScoreTable:
    """Raw metrics, percentiles and fused score for each candidate node."""

    nodes: np.ndarray
    entropy: np.ndarray
    density: np.ndarray
    centrality: np.ndarray
    p_entropy: np.ndarray = field(init=False)
    p_density: np.ndarray = field(init=False)
    p_centrality: np.ndarray = field(init=False)
    score: np.ndarray | None = None

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=np.int64)
        self.p_entropy = percentile(self.entropy)
        self.p_density = percentile(self.density)
        self.p_centrality = percentile(self.centrality)

    def percentiles(self) -> np.ndarray:
        return np.column_stack([self.p_entropy, self.p_density, self.p_centrality])


@dataclass
class KMeansResult:
    labels: np.ndarray
    centroids: np.ndarray
    inertia_history: list = field(default_factory=list)

    def __iter__(self):
        return iter((self.labels, self.centroids))


def _sq_dists(points, centroids):
    d = (points * points).sum(1)[:, None] - 2.0 * points @ centroids.T \
        + (centroids * centroids).sum(1)[None, :]
    return np.maximum(d, 0.0)


def _kmeans_pp(points, k, rng):
    m = points.shape[0]
    centers = [int(rng.integers(m))]
    closest = _sq_dists(points, points[centers])[:, 0]
    for _ in range(1, k):
        total = closest.sum()
        if total <= 0:
            break
        nxt = int(rng.choice(m, p=closest / total))
        centers.append(nxt)
        closest = np.minimum(closest, _sq_dists(points, points[[nxt]])[:, 0])
    return points[centers].copy()


def kmeans(points, k: int, rng, max_iter: int = 100, tol: float = 1e-6) -> KMeansResult:
    """Lloyd's algorithm with k-means++ seeding.

    ``k`` is clamped to the number of distinct points. A cluster that loses
    all its points is re-seeded at the point farthest from its current
    centroid. Stops when no centroid moves more than ``tol``.
    """
    x = np.asarray(points, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ValueError("kmeans needs a non-empty 2-D point array")
    if not np.all(np.isfinite(x)):
        raise ValueError("kmeans input contains non-finite values")
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(rng)
    k = int(min(k, np.unique(x, axis=0).shape[0]))
    centroids = _kmeans_pp(x, k, rng)
    k = centroids.shape[0]
    history = []
    labels = np.zeros(x.shape[0], dtype=np.int64)
    for _ in range(max_iter):
        d = _sq_dists(x, centroids)
        labels = d.argmin(axis=1)
        history.append(float(d[np.arange(x.shape[0]), labels].sum()))
        new = centroids.copy()
        counts = np.bincount(labels, minlength=k)
        for c in np.flatnonzero(counts):
            new[c] = x[labels == c].mean(axis=0)
        for c in np.flatnonzero(counts == 0):
            far = int(d[np.arange(x.shape[0]), labels].argmax())
            new[c] = x[far]
            labels[far] = c
        shift = np.sqrt(((new - centroids) ** 2).sum(axis=1)).max()
        centroids = new
        if shift < tol:
            break
    d = _sq_dists(x, centroids)
    labels = d.argmin(axis=1)
    history.append(float(d[np.arange(x.shape[0]), labels].sum()))
    return KMeansResult(labels, centroids, history)


def density_scores(embeddings, k: int, rng, max_iter: int = 100, tol: float = 1e-6) -> np.ndarray:
    """``1 / (1 + ||z - centroid(z)||)`` for every embedding row."""
    z = np.asarray(embeddings, dtype=np.float64)
    res = kmeans(z, k, rng, max_iter=max_iter, tol=tol)
    dist = np.linalg.norm(z - res.centroids[res.labels], axis=1)
    return 1.0 / (1.0 + dist)


def percentile(values) -> np.ndarray:
    """Fraction of entries strictly smaller than each entry.

    >>> percentile([1, 2, 3, 4, 5]).tolist()
    [0.0, 0.2, 0.4, 0.6, 0.8]
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        raise ValueError("percentile needs at least one value")
    if np.isnan(v).any():
        raise ValueError("percentile input contains NaN")
    below = np.searchsorted(np.sort(v), v, side="left")
    return below / v.size


def weight_schedule(n_e: int, config: SamplerConfig, rng) -> MetricWeights:
    """Metric weights for epoch ``n_e``.

    Up to ``threshold`` only centrality counts. Afterwards the centrality
    weight is drawn from ``Beta(1, n_t)`` with ``n_t = (n_e - threshold)/epsilon``
    using the inverse CDF ``1 - U**(1/n_t)``, and the rest is split evenly
    between uncertainty and density.
    """
    if n_e < 0:
        raise ValueError("epoch must be non-negative")
    if n_e <= config.threshold:
        return MetricWeights(0.0, 0.0, 1.0)
    n_t = (n_e - config.threshold) / config.epsilon
    return MetricWeights.from_gamma(beta1_sample(n_t, rng))


def beta1_sample(b: float, rng, size=None):
    """Draw from ``Beta(1, b)`` by inverting its CDF ``1 - (1 - x)**b``."""
    u = rng.random(size)
    return 1.0 - u ** (1.0 / b)


def fuse(table: ScoreTable, weights: MetricWeights) -> np.ndarray:
    s = table.percentiles() @ weights.as_array()
    table.score = np.clip(s, 0.0, 1.0)
    return table.score


def select(scores, batch: int, rng) -> np.ndarray:
    """Positions of the ``batch`` highest scores; ties broken at random."""
    s = np.asarray(scores, dtype=np.float64)
    if s.size == 0:
        raise ValueError("no candidates left to select from")
    tiebreak = rng.random(s.size)
    order = np.lexsort((tiebreak, -s))
    return order[:min(batch, s.size)]


class SamplerState:
    """Labeled / candidate partition of the training pool plus the epoch counter."""

    def __init__(self, pool, labeled, config: SamplerConfig, rng):
        self.pool = np.sort(np.asarray(pool, dtype=np.int64))
        lab = np.asarray(labeled, dtype=np.int64)
        if not np.isin(lab, self.pool).all():
            raise ValueError("initial labeled nodes must come from the pool")
        self.labeled = np.sort(lab)
        self.candidates = np.setdiff1d(self.pool, self.labeled)
        self.config = config
        self.rng = rng
        self.epoch = 0

    def move(self, chosen) -> None:
        chosen = np.asarray(chosen, dtype=np.int64)
        if not np.isin(chosen, self.candidates).all():
            raise ValueError("can only move current candidates")
        self.labeled = np.union1d(self.labeled, chosen)
        self.candidates = np.setdiff1d(self.candidates, chosen)

    def check(self) -> None:
        assert np.intersect1d(self.labeled, self.candidates).size == 0
        assert np.array_equal(np.union1d(self.labeled, self.candidates), self.pool)
