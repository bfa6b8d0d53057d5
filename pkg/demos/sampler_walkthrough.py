"""
One sampling step by hand
=========================

Score a handful of candidates on the three metrics, turn each into a
within-candidate percentile, mix them and pick the best.
"""

import numpy as np

from atsgraph import MetricWeights, SamplerConfig, ScoreTable, fuse, percentile, select
from atsgraph.sampler import weight_schedule

print("percentile([1, 2, 3, 4, 5]) =", percentile([1, 2, 3, 4, 5]))

rng = np.random.default_rng(0)
nodes = np.arange(6)
entropy = np.array([0.9, 0.2, 0.5, 0.7, 0.1, 0.3])       # model loss, higher = less sure
density = np.array([0.4, 0.8, 0.6, 0.5, 0.9, 0.7])       # 1 / (1 + distance to centroid)
central = np.array([0.10, 0.30, 0.05, 0.20, 0.25, 0.10])  # pagerank
table = ScoreTable(nodes, entropy, density, central)
print("percentiles (E, D, C):\n", table.percentiles())

# early on the weights lean on centrality, later on the model-derived metrics
cfg = SamplerConfig(epsilon=100, threshold=10)
for epoch in (5, 20, 200, 2000):
    w = weight_schedule(epoch, cfg, rng)
    pick = nodes[select(fuse(table, w), 1, rng)]
    print("epoch %4d  alpha=beta=%.3f gamma=%.3f  -> node %d"
          % (epoch, w.alpha, w.gamma, pick[0]))

# rescaling a metric monotonically changes nothing
t2 = ScoreTable(nodes, np.exp(5 * entropy), density, central)
w = MetricWeights.from_gamma(0.3)
print("scores unchanged under exp rescaling:", np.array_equal(fuse(table, w), fuse(t2, w)))
