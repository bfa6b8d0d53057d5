"""
Structural centrality on a toy graph
====================================

Compare the five centrality measures on a barbell: two triangles joined
through a single bridge node.
"""

import numpy as np

from atsgraph import from_edges
from atsgraph.centrality import KINDS, compute

edges = [(0, 1), (1, 2), (0, 2),   # left triangle
         (2, 3), (3, 4),           # bridge through node 3
         (4, 5), (5, 6), (4, 6)]   # right triangle
g = from_edges(7, edges)

np.set_printoptions(precision=3, suppress=True)
for kind in KINDS:
    print("%-12s" % kind, compute(g, kind).values)

# the bridge carries every left-right shortest path
bc = compute(g, "betweenness").values
print("bridge betweenness:", bc[3], "(3 left x 3 right pairs)")

# pagerank is a probability vector, and damping controls how flat it is
for rho in (0.5, 0.85, 0.99):
    pr = compute(g, "pagerank", rho=rho).values
    print("rho=%.2f  sum=%.12f  max/min=%.3f" % (rho, pr.sum(), pr.max() / pr.min()))
