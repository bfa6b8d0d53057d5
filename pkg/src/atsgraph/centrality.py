"""Structural centrality measures over an undirected :class:`Graph`.

All scores are computed once over the whole graph; the sampler only looks at
their ranking within the candidate set.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import shortest_path

from .graph import Graph

KINDS = ("pagerank", "degree", "closeness", "betweenness", "eigenvector")
BETWEENNESS_MAX_NODES = 20_000


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (last residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class CentralityVector:
    kind: str
    values: np.ndarray

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown centrality kind {self.kind!r}")
        v = np.asarray(self.values, dtype=np.float64)
        if not np.all(np.isfinite(v)) or (v < 0).any():
            raise ValueError("centrality values must be finite and non-negative")
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size


def pagerank(graph: Graph, rho: float = 0.85, tol: float = 1e-12,
             max_iter: int = 1000) -> CentralityVector:
    """PageRank by power iteration.

    Iterates ``phi = rho * P phi + (1 - rho)/N`` with ``P = A D^-1`` until the
    L1 change drops below ``tol``. Nodes without neighbours spread their mass
    uniformly over all nodes.
    """
    if not 0.0 < rho < 1.0:
        raise ValueError("damping must lie in (0, 1)")
    n = graph.n_nodes
    deg = graph.degrees.astype(np.float64)
    dangling = deg == 0
    inv_deg = np.divide(1.0, deg, out=np.zeros(n), where=~dangling)
    # column-stochastic transition restricted to non-dangling columns
    p = sp.csr_matrix(graph.adjacency @ sp.diags(inv_deg))
    phi = np.full(n, 1.0 / n)
    residual = np.inf
    for _ in range(max_iter):
        new = rho * (p @ phi + phi[dangling].sum() / n) + (1.0 - rho) / n
        new /= new.sum()
        residual = np.abs(new - phi).sum()
        phi = new
        if residual < tol:
            return CentralityVector("pagerank", phi)
    raise ConvergenceError(f"pagerank did not converge in {max_iter} iterations", residual)


def degree_centrality(graph: Graph) -> CentralityVector:
    n = graph.n_nodes
    if n == 1:
        return CentralityVector("degree", np.zeros(1))
    return CentralityVector("degree", graph.degrees / (n - 1))


def closeness_centrality(graph: Graph) -> CentralityVector:
    """Closeness scaled by the reachable fraction of the graph.

    ``c_i = ((r_i - 1)/(N - 1)) * ((r_i - 1)/s_i)`` where ``r_i`` counts the
    nodes reachable from ``i`` (itself included) and ``s_i`` is the sum of
    their shortest-path distances. Isolated nodes score 0.
    """
    n = graph.n_nodes
    if n == 1:
        return CentralityVector("closeness", np.zeros(1))
    dist = shortest_path(graph.adjacency, method="D", unweighted=True, directed=False)
    finite = np.isfinite(dist)
    reach = finite.sum(axis=1)
    s = np.where(finite, dist, 0.0).sum(axis=1)
    c = np.zeros(n)
    ok = s > 0
    c[ok] = ((reach[ok] - 1) / (n - 1)) * ((reach[ok] - 1) / s[ok])
    return CentralityVector("closeness", c)


def betweenness_centrality(graph: Graph) -> CentralityVector:
    """Unnormalized betweenness via Brandes' accumulation.

    Each unordered pair of endpoints contributes once, and endpoints are not
    credited for their own paths.
    """
    n = graph.n_nodes
    if n > BETWEENNESS_MAX_NODES:
        raise ValueError(
            f"betweenness refused for N={n} > {BETWEENNESS_MAX_NODES} (O(N*E) cost)")
    indptr, indices = graph.adjacency.indptr, graph.adjacency.indices
    cb = np.zeros(n)
    for s in range(n):
        stack = []
        preds: list[list[int]] = [[] for _ in range(n)]
        sigma = np.zeros(n)
        sigma[s] = 1.0
        dist = np.full(n, -1, dtype=np.int64)
        dist[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            stack.append(v)
            for w in indices[indptr[v]:indptr[v + 1]]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = np.zeros(n)
        while stack:
            w = stack.pop()
            for v in preds[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != s:
                cb[w] += delta[w]
    # every unordered pair was visited from both ends
    return CentralityVector("betweenness", cb / 2.0)


def eigenvector_centrality(graph: Graph, tol: float = 1e-10,
                           max_iter: int = 1000) -> CentralityVector:
    """Dominant eigenvector of ``A`` by power iteration, unit L2 norm.

    Iterates on ``A + I`` (same eigenvectors, no oscillation on bipartite
    graphs). An edgeless graph returns the uniform vector.
    """
    n = graph.n_nodes
    a = graph.adjacency + sp.identity(n, format="csr")
    x = np.full(n, 1.0 / np.sqrt(n))
    residual = np.inf
    for _ in range(max_iter):
        new = a @ x
        new /= np.linalg.norm(new)
        residual = np.abs(new - x).max()
        x = new
        if residual < tol:
            return CentralityVector("eigenvector", x)
    raise ConvergenceError(
        f"eigenvector centrality did not converge in {max_iter} iterations", residual)


def compute(graph: Graph, kind: str = "pagerank", **kwargs) -> CentralityVector:
    """Dispatch to the centrality function named by ``kind``."""
    funcs = {
        "pagerank": pagerank,
        "degree": degree_centrality,
        "closeness": closeness_centrality,
        "betweenness": betweenness_centrality,
        "eigenvector": eigenvector_centrality,
    }
    if kind not in funcs:
        raise ValueError(f"unknown centrality kind {kind!r}; expected one of {KINDS}")
    return funcs[kind](graph, **kwargs)
