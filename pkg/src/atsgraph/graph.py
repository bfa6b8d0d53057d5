"""Graph container, file loaders, dataset splitting and synthetic SBM graphs."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.sparse as sp


class GraphFormatError(ValueError):
    """Raised when an edge, attribute or label file cannot be parsed."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected graph with a CSR adjacency and a 0/1 attribute matrix.

    ``attributes`` is ``None`` for a structure-only graph (as returned by
    :func:`load_edge_list`). ``node_names`` keeps the original identifiers
    from the edge file, in first-appearance order.
    """

    adjacency: sp.csr_matrix
    attributes: np.ndarray | None = None
    node_names: tuple[str, ...] | None = None
    labels: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        adj = sp.csr_matrix(self.adjacency, dtype=np.float64)
        adj.sum_duplicates()
        adj.eliminate_zeros()
        if adj.shape[0] != adj.shape[1]:
            raise ValueError(f"adjacency must be square, got {adj.shape}")
        if adj.nnz and not np.all(adj.data == 1.0):
            raise ValueError("adjacency entries must be 0 or 1")
        if adj.diagonal().any():
            raise ValueError("raw adjacency must not contain self-loops")
        if (adj != adj.T).nnz:
            raise ValueError("adjacency must be symmetric")
        object.__setattr__(self, "adjacency", adj)
        if self.attributes is not None:
            x = np.asarray(self.attributes)
            if x.ndim != 2 or x.shape[0] != adj.shape[0]:
                raise ValueError(
                    f"attribute matrix must be ({adj.shape[0]}, F), got {x.shape}")
            if not np.isin(x, (0, 1)).all():
                raise ValueError("attribute entries must be exactly 0 or 1")
            x = x.astype(np.float64)
            x.setflags(write=False)
            object.__setattr__(self, "attributes", x)
        if self.labels is not None:
            y = np.asarray(self.labels)
            if y.shape != (adj.shape[0],):
                raise ValueError("labels must have one entry per node")
            object.__setattr__(self, "labels", y)

    @property
    def n_nodes(self) -> int:
        return self.adjacency.shape[0]

    @property
    def n_attr_dims(self) -> int:
        return 0 if self.attributes is None else self.attributes.shape[1]

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.diff(self.adjacency.indptr).astype(np.int64)

    @cached_property
    def normalized_adjacency(self) -> sp.csr_matrix:
        return normalize_adjacency(self)

    def neighbors(self, i: int) -> np.ndarray:
        a = self.adjacency
        return a.indices[a.indptr[i]:a.indptr[i + 1]]

    def with_attributes(self, attributes: np.ndarray) -> "Graph":
        return Graph(self.adjacency, attributes, self.node_names, self.labels)

    def with_labels(self, labels: np.ndarray) -> "Graph":
        return Graph(self.adjacency, self.attributes, self.node_names, labels)

    def add_edge(self, i: int, j: int) -> "Graph":
        a = self.adjacency.tolil(copy=True)
        if i != j:
            a[i, j] = 1.0
            a[j, i] = 1.0
        return Graph(a.tocsr(), self.attributes, self.node_names, self.labels)


def from_edges(n_nodes: int, edges, attributes=None, labels=None) -> Graph:
    """Build a graph from an iterable of ``(u, v)`` pairs.

    Duplicate edges are collapsed and self-loops dropped.
    """
    e = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
    e = e[e[:, 0] != e[:, 1]]
    if e.size and (e.min() < 0 or e.max() >= n_nodes):
        raise IndexError("edge endpoint out of range")
    rows = np.concatenate([e[:, 0], e[:, 1]])
    cols = np.concatenate([e[:, 1], e[:, 0]])
    adj = sp.coo_matrix((np.ones(rows.size), (rows, cols)), shape=(n_nodes, n_nodes)).tocsr()
    adj.data[:] = 1.0
    return Graph(adj, attributes, labels=labels)


def load_edge_list(path) -> Graph:
    """Read a whitespace-separated ``src dst`` edge file.

    Lines starting with ``#`` and blank lines are skipped. Ids that already
    form the dense range ``0..N-1`` are kept; anything else (strings, sparse
    integer ids) is remapped to ``0..N-1`` in first-appearance order.
    """
    index: dict[str, int] = {}
    edges = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) != 2:
                raise GraphFormatError(f"{path}:{lineno}: expected 'src dst', got {s!r}")
            ids = []
            for p in parts:
                if p not in index:
                    index[p] = len(index)
                ids.append(index[p])
            edges.append(ids)
    if not index:
        raise GraphFormatError(f"{path}: no edges found")
    names = tuple(index)
    if all(t.isdigit() for t in names) and {int(t) for t in names} == set(range(len(names))):
        # already dense 0-based integer ids: keep them as-is
        perm = np.array([int(t) for t in names])
        edges = perm[np.asarray(edges, dtype=np.int64)]
        names = tuple(str(i) for i in range(len(names)))
    g = from_edges(len(index), edges)
    return Graph(g.adjacency, node_names=names)


def _node_lookup(graph: Graph):
    if graph.node_names is None:
        return lambda tok: int(tok)
    names = {name: i for i, name in enumerate(graph.node_names)}

    def lookup(tok):
        if tok in names:
            return names[tok]
        raise IndexError(f"unknown node id {tok!r}")
    return lookup


def load_attributes(path, graph: Graph) -> Graph:
    """Attach a 0/1 attribute matrix read from ``path``.

    Two layouts are accepted: sparse ``node dim value`` triplets (whitespace
    separated) or a dense comma-separated matrix with one row per node and an
    optional non-numeric header row. Files whose first data line contains a
    comma are treated as dense.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise GraphFormatError(f"{path}: empty attribute file")
    n = graph.n_nodes
    if "," in lines[0]:
        rows = list(csv.reader(lines))
        try:
            [float(v) for v in rows[0]]
        except ValueError:
            rows = rows[1:]
        if len(rows) != n:
            raise GraphFormatError(f"{path}: expected {n} rows, got {len(rows)}")
        try:
            x = np.array([[float(v) for v in r] for r in rows])
        except ValueError as exc:
            raise GraphFormatError(f"{path}: {exc}") from None
        if x.shape[1] == 0:
            raise GraphFormatError(f"{path}: zero attribute columns")
    else:
        lookup = _node_lookup(graph)
        trip = []
        for lineno, line in enumerate(lines, 1):
            parts = line.split()
            if len(parts) != 3:
                raise GraphFormatError(f"{path}:{lineno}: expected 'node dim value'")
            try:
                node = lookup(parts[0])
                dim, val = int(parts[1]), float(parts[2])
            except ValueError as exc:
                raise GraphFormatError(f"{path}:{lineno}: {exc}") from None
            if not 0 <= node < n:
                raise IndexError(f"{path}:{lineno}: node id {node} >= N={n}")
            if dim < 0:
                raise GraphFormatError(f"{path}:{lineno}: negative dimension")
            trip.append((node, dim, val))
        f = max(t[1] for t in trip) + 1
        x = np.zeros((n, f))
        for node, dim, val in trip:
            x[node, dim] = val
    if not np.isin(x, (0.0, 1.0)).all():
        raise ValueError(f"{path}: attribute values must be 0 or 1")
    return graph.with_attributes(x)


def load_labels(path, graph: Graph) -> Graph:
    """Attach class labels from ``node_id label`` lines."""
    lookup = _node_lookup(graph)
    labels = np.full(graph.n_nodes, -1, dtype=np.int64)
    classes: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) != 2:
                raise GraphFormatError(f"{path}:{lineno}: expected 'node_id label'")
            node = lookup(parts[0])
            if not 0 <= node < graph.n_nodes:
                raise IndexError(f"{path}:{lineno}: node id {node} out of range")
            labels[node] = classes.setdefault(parts[1], len(classes))
    if (labels < 0).any():
        raise GraphFormatError(f"{path}: {int((labels < 0).sum())} nodes have no label")
    return graph.with_labels(labels)


@dataclass(frozen=True)
class DataSplit:
    """Train pool / validation / test partition of the node set."""

    train_pool: np.ndarray
    validation: np.ndarray
    test: np.ndarray
    seed: int


def split_dataset(graph: Graph, seed: int, train_frac: float = 0.4,
                  val_frac: float = 0.1) -> DataSplit:
    """Random 40/10/50 split of the nodes (deterministic given ``seed``)."""
    n = graph.n_nodes
    if n < 10:
        raise ValueError(f"need at least 10 nodes to split, got {n}")
    perm = np.random.default_rng(seed).permutation(n)
    n_train = int(round(train_frac * n))
    n_val = int(round(val_frac * n))
    return DataSplit(
        train_pool=np.sort(perm[:n_train]),
        validation=np.sort(perm[n_train:n_train + n_val]),
        test=np.sort(perm[n_train + n_val:]),
        seed=seed,
    )


def generate_sbm(blocks: int, nodes_per_block: int, p_in: float, p_out: float,
                 attr_dims_per_block: int, flip_noise: float, seed: int) -> Graph:
    """Stochastic block model graph with block-banded binary attributes.

    Block ``b`` owns attribute dimensions
    ``b*attr_dims_per_block .. (b+1)*attr_dims_per_block - 1``; its members get
    ones there and zeros elsewhere, then every bit is flipped independently
    with probability ``flip_noise``. Block ids are stored as ``labels``.
    """
    if blocks < 1 or nodes_per_block < 1:
        raise ValueError("blocks and nodes_per_block must be positive")
    if attr_dims_per_block < 1:
        raise ValueError("attr_dims_per_block must be positive")
    if not 0.0 <= p_out <= p_in <= 1.0:
        raise ValueError("require 0 <= p_out <= p_in <= 1")
    if not 0.0 <= flip_noise < 0.5:
        raise ValueError("flip_noise must lie in [0, 0.5)")
    rng = np.random.default_rng(seed)
    n = blocks * nodes_per_block
    labels = np.repeat(np.arange(blocks), nodes_per_block)
    iu, ju = np.triu_indices(n, k=1)
    prob = np.where(labels[iu] == labels[ju], p_in, p_out)
    keep = rng.random(iu.size) < prob
    g = from_edges(n, np.column_stack([iu[keep], ju[keep]]))

    f = blocks * attr_dims_per_block
    x = np.zeros((n, f))
    for b in range(blocks):
        x[labels == b, b * attr_dims_per_block:(b + 1) * attr_dims_per_block] = 1.0
    flips = rng.random((n, f)) < flip_noise
    x = np.where(flips, 1.0 - x, x)
    return Graph(g.adjacency, x, labels=labels)


def normalize_adjacency(graph: Graph) -> sp.csr_matrix:
    """Symmetric GCN normalization ``D^-1/2 (A + I) D^-1/2``."""
    a_hat = graph.adjacency + sp.identity(graph.n_nodes, format="csr")
    d_inv_sqrt = 1.0 / np.sqrt(np.asarray(a_hat.sum(axis=1)).ravel())
    d = sp.diags(d_inv_sqrt)
    return sp.csr_matrix(d @ a_hat @ d)
