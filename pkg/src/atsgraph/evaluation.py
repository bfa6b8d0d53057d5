"""Profiling metrics, degree-level breakdown and downstream node classification."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .graph import DataSplit, Graph

PROFILE_KS = (10, 20, 50)


def _top_k(scores: np.ndarray, k: int) -> np.ndarray:
    # stable sort on -score: ties go to the lower dimension index
    return np.argsort(-np.asarray(scores, dtype=np.float64), kind="stable")[:k]


def recall_at_k(scores, truth, k: int, clamp: bool = False) -> float:
    """Fraction of positive dimensions found in the top ``k``.

    With ``clamp`` the denominator is ``min(k, #positives)`` instead of
    ``#positives``; that variant is not monotone in ``k``. Returns NaN when
    ``truth`` has no positives (callers skip such nodes).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    truth = np.asarray(truth)
    n_pos = int(np.count_nonzero(truth))
    if n_pos == 0:
        return float("nan")
    hits = np.count_nonzero(truth[_top_k(scores, k)])
    return hits / (min(k, n_pos) if clamp else n_pos)


def ndcg_at_k(scores, truth, k: int) -> float:
    """Binary-relevance NDCG over the top ``k`` dimensions."""
    if k < 1:
        raise ValueError("k must be >= 1")
    truth = np.asarray(truth)
    n_pos = int(np.count_nonzero(truth))
    if n_pos == 0:
        return float("nan")
    top = _top_k(scores, k)
    discounts = 1.0 / np.log2(np.arange(2, top.size + 2))
    # same sequential summation on both sides so a perfect ranking gives exactly 1
    dcg = float(np.cumsum((truth[top] != 0) * discounts)[-1])
    idcg = float(np.cumsum(discounts)[min(k, n_pos, top.size) - 1])
    return dcg / idcg


def _batch_metrics(probs: np.ndarray, truth: np.ndarray, ks, clamp: bool = False) -> dict:
    """Recall@k and NDCG@k averaged over rows with at least one positive."""
    truth = truth != 0
    n_pos = truth.sum(axis=1)
    keep = n_pos > 0
    probs, truth, n_pos = probs[keep], truth[keep], n_pos[keep]
    out = {"n_evaluated": int(keep.sum()), "n_skipped": int((~keep).sum())}
    if not keep.any():
        for k in ks:
            out[f"recall@{k}"] = out[f"ndcg@{k}"] = float("nan")
        return out
    kmax = min(max(ks), probs.shape[1])
    order = np.argsort(-probs, axis=1, kind="stable")[:, :kmax]
    rel = np.take_along_axis(truth, order, axis=1)
    discounts = 1.0 / np.log2(np.arange(2, kmax + 2))
    for k in ks:
        kk = min(k, kmax)
        hits = rel[:, :kk].sum(axis=1)
        denom = np.minimum(k, n_pos) if clamp else n_pos
        out[f"recall@{k}"] = float(np.mean(hits / denom))
        dcg = np.cumsum(rel[:, :kk] * discounts[:kk], axis=1)[:, -1]
        cum = np.concatenate([[0.0], np.cumsum(discounts)])
        idcg = cum[np.minimum(np.minimum(k, n_pos), kmax)]
        out[f"ndcg@{k}"] = float(np.mean(dcg / idcg))
    return out


def profile_nodes(model, graph: Graph, observed, nodes, ks=PROFILE_KS) -> dict:
    """Profiling metrics for ``nodes`` with the encoder fed ``observed``."""
    nodes = np.asarray(nodes, dtype=np.int64)
    probs = model.reconstruct(graph, observed)
    return _batch_metrics(probs[nodes], graph.attributes[nodes], ks)


@dataclass(frozen=True)
class ProfilingReport:
    recall: dict
    ndcg: dict
    n_evaluated: int
    n_skipped: int

    def as_row(self) -> dict:
        row = {f"recall@{k}": v for k, v in self.recall.items()}
        row.update({f"ndcg@{k}": v for k, v in self.ndcg.items()})
        return row


def profile(model, graph: Graph, split: DataSplit, ks=PROFILE_KS) -> ProfilingReport:
    """Score reconstructed test-node attributes; the whole train pool is visible."""
    m = profile_nodes(model, graph, split.train_pool, split.test, ks)
    return ProfilingReport(
        recall={k: m[f"recall@{k}"] for k in ks},
        ndcg={k: m[f"ndcg@{k}"] for k in ks},
        n_evaluated=m["n_evaluated"], n_skipped=m["n_skipped"],
    )


def degree_level_report(model, graph: Graph, split: DataSplit, k: int = 20,
                        levels: int = 5) -> list[dict]:
    """Recall@k on test nodes split into degree levels (ascending).

    Test nodes are sorted by degree (ties by node id) and cut into ``levels``
    equal parts, the remainder going to the last one.
    """
    test = np.asarray(split.test, dtype=np.int64)
    order = test[np.lexsort((test, graph.degrees[test]))]
    size = order.size // levels
    probs = model.reconstruct(graph, split.train_pool)
    out = []
    for i in range(levels):
        part = order[i * size:(i + 1) * size] if i < levels - 1 else order[i * size:]
        m = _batch_metrics(probs[part], graph.attributes[part], (k,)) if part.size else \
            {f"recall@{k}": float("nan")}
        out.append({"level": i + 1, "n_nodes": int(part.size),
                    "min_degree": int(graph.degrees[part].min()) if part.size else 0,
                    "max_degree": int(graph.degrees[part].max()) if part.size else 0,
                    f"recall@{k}": m[f"recall@{k}"]})
    return out


@dataclass(frozen=True)
class ClassificationReport:
    mean_accuracy: float
    std_accuracy: float
    fold_accuracies: tuple


def classify(features, labels, seed: int = 0, n_splits: int = 5, n_repeats: int = 10,
             hidden: int = 64, epochs: int = 200) -> ClassificationReport:
    """Two-layer MLP accuracy under repeated stratified k-fold CV."""
    from sklearn.exceptions import ConvergenceWarning
    from sklearn.model_selection import RepeatedStratifiedKFold
    from sklearn.neural_network import MLPClassifier

    if labels is None:
        raise ValueError("node labels are required for classification")
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels)
    if x.shape[0] != y.shape[0]:
        raise ValueError("features and labels disagree on node count")
    cv = RepeatedStratifiedKFold(n_splits=n_splits, n_repeats=n_repeats, random_state=seed)
    accs = []
    for i, (tr, te) in enumerate(cv.split(x, y)):
        clf = MLPClassifier(hidden_layer_sizes=(hidden,), activation="relu", solver="adam",
                            max_iter=epochs, random_state=seed + i)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            clf.fit(x[tr], y[tr])
        accs.append(float((clf.predict(x[te]) == y[te]).mean()))
    return ClassificationReport(float(np.mean(accs)), float(np.std(accs)), tuple(accs))


def classify_restored(model, graph: Graph, split: DataSplit, seed: int = 0, **kwargs):
    """Classify test nodes from their reconstructed attribute probabilities."""
    probs = model.reconstruct(graph, split.train_pool)
    return classify(probs[split.test], graph.labels[split.test] if graph.labels is not None
                    else None, seed=seed, **kwargs)
