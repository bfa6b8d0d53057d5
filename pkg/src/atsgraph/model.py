"""Reconstruction models that the active sampler can drive.

The sampler only needs four things from a model: one training epoch on a
node set, per-node supervised losses, per-node structure embeddings and
attribute reconstructions. :class:`PrimaryModel` spells that out;
:class:`GcnAutoencoder` is a small two-layer GCN encoder with a sigmoid
decoder, trained with Adam on hand-derived gradients.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Protocol, runtime_checkable

import numpy as np

from .graph import Graph

PROB_EPS = 1e-7
PARAM_NAMES = ("W1", "W2", "W3", "b")
CHECKPOINT_VERSION = 1


@runtime_checkable
class PrimaryModel(Protocol):
    def forward(self, graph: Graph, observed) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(embeddings, reconstruction probabilities)`` for all nodes."""

    def train_epoch(self, graph: Graph, train_nodes) -> float: ...

    def node_losses(self, graph: Graph, nodes, observed) -> np.ndarray: ...

    def structure_embeddings(self, graph: Graph, observed) -> np.ndarray: ...

    def reconstruct(self, graph: Graph, observed) -> np.ndarray: ...


def node_bce(probs: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Mean binary cross-entropy over attribute dimensions, one value per row."""
    p = np.clip(probs, PROB_EPS, 1.0 - PROB_EPS)
    loss = -(targets * np.log(p) + (1.0 - targets) * np.log1p(-p))
    return loss.mean(axis=1)


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _glorot(rng, fan_in, fan_out):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def _as_index(nodes) -> np.ndarray:
    return np.asarray(sorted(nodes) if isinstance(nodes, (set, frozenset)) else nodes,
                      dtype=np.int64).ravel()


@dataclass(frozen=True)
class ModelConfig:
    hidden1: int = 128
    hidden2: int = 64
    lr: float = 0.005
    weight_decay: float = 5e-4
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8


class GcnAutoencoder:
    """Two-layer GCN encoder with a linear+sigmoid attribute decoder.

    ``Z = A_hat relu(A_hat X_in W1) W2`` and ``X_hat = sigmoid(Z W3 + b)``
    where ``X_in`` is the attribute matrix with every row outside the
    observed set zeroed.
    """

    def __init__(self, n_features: int, config: ModelConfig | None = None, seed: int = 0):
        cfg = config or ModelConfig()
        if cfg.hidden1 <= 0 or cfg.hidden2 <= 0:
            raise ValueError("hidden sizes must be positive")
        self.n_features = n_features
        self.config = cfg
        rng = np.random.default_rng(seed)
        self.params = {
            "W1": _glorot(rng, n_features, cfg.hidden1),
            "W2": _glorot(rng, cfg.hidden1, cfg.hidden2),
            "W3": _glorot(rng, cfg.hidden2, n_features),
            "b": np.zeros(n_features),
        }
        self._m = {k: np.zeros_like(v) for k, v in self.params.items()}
        self._v = {k: np.zeros_like(v) for k, v in self.params.items()}
        self.step = 0

    # -- forward -----------------------------------------------------------
    def _masked_input(self, graph: Graph, observed) -> np.ndarray:
        if graph.attributes is None:
            raise ValueError("graph has no attributes")
        if graph.n_attr_dims != self.n_features:
            raise ValueError(
                f"model expects {self.n_features} attribute dims, graph has {graph.n_attr_dims}")
        x_in = np.zeros_like(graph.attributes)
        idx = _as_index(observed)
        x_in[idx] = graph.attributes[idx]
        return x_in

    def _forward_cache(self, graph: Graph, observed) -> dict:
        a = graph.normalized_adjacency
        x_in = self._masked_input(graph, observed)
        ax = a @ x_in
        h1_pre = ax @ self.params["W1"]
        h1 = np.maximum(h1_pre, 0.0)
        ah1 = a @ h1
        z = ah1 @ self.params["W2"]
        logits = z @ self.params["W3"] + self.params["b"]
        return {"ax": ax, "h1_pre": h1_pre, "ah1": ah1, "z": z, "probs": _sigmoid(logits)}

    def forward(self, graph: Graph, observed) -> tuple[np.ndarray, np.ndarray]:
        c = self._forward_cache(graph, observed)
        return c["z"], c["probs"]

    # -- loss and gradients -------------------------------------------------
    def loss_and_grads(self, graph: Graph, train_nodes, observed=None):
        """Mean BCE over ``train_nodes`` and its gradient for every parameter.

        ``observed`` defaults to ``train_nodes`` (the encoder sees exactly the
        nodes it is trained on).
        """
        idx = _as_index(train_nodes)
        if idx.size == 0:
            raise ValueError("training set is empty")
        obs = idx if observed is None else observed
        c = self._forward_cache(graph, obs)
        a = graph.normalized_adjacency
        p = c["probs"][idx]
        x = graph.attributes[idx]
        loss = float(node_bce(p, x).mean())

        # d loss / d logits; zero where the clamp is active
        g_rows = (p - x) / (idx.size * self.n_features)
        g_rows[(p < PROB_EPS) | (p > 1.0 - PROB_EPS)] = 0.0
        g_logits = np.zeros_like(c["probs"])
        np.add.at(g_logits, idx, g_rows)

        W2, W3 = self.params["W2"], self.params["W3"]
        grads = {"W3": c["z"].T @ g_logits, "b": g_logits.sum(axis=0)}
        g_z = g_logits @ W3.T
        grads["W2"] = c["ah1"].T @ g_z
        g_h1 = a.T @ (g_z @ W2.T)
        g_h1_pre = g_h1 * (c["h1_pre"] > 0)
        grads["W1"] = c["ax"].T @ g_h1_pre
        return loss, grads

    def loss(self, graph: Graph, train_nodes, observed=None) -> float:
        idx = _as_index(train_nodes)
        obs = idx if observed is None else observed
        _, probs = self.forward(graph, obs)
        return float(node_bce(probs[idx], graph.attributes[idx]).mean())

    def train_epoch(self, graph: Graph, train_nodes) -> float:
        """One full-batch Adam step on ``train_nodes``; returns the pre-update loss."""
        loss, grads = self.loss_and_grads(graph, train_nodes)
        cfg = self.config
        self.step += 1
        t = self.step
        for k, p in self.params.items():
            g = grads[k] + cfg.weight_decay * p
            self._m[k] = cfg.beta1 * self._m[k] + (1 - cfg.beta1) * g
            self._v[k] = cfg.beta2 * self._v[k] + (1 - cfg.beta2) * g * g
            m_hat = self._m[k] / (1 - cfg.beta1 ** t)
            v_hat = self._v[k] / (1 - cfg.beta2 ** t)
            p -= cfg.lr * m_hat / (np.sqrt(v_hat) + cfg.adam_eps)
            if not np.all(np.isfinite(p)):
                raise FloatingPointError(f"parameter {k} became non-finite at step {t}")
        return loss

    # -- read-only queries ---------------------------------------------------
    def node_losses(self, graph: Graph, nodes, observed) -> np.ndarray:
        """Per-node mean BCE for ``nodes`` with the encoder fed only ``observed``."""
        idx = _as_index(nodes)
        if graph.attributes is None:
            raise ValueError("node losses need ground-truth attributes")
        _, probs = self.forward(graph, observed)
        return node_bce(probs[idx], graph.attributes[idx])

    def structure_embeddings(self, graph: Graph, observed) -> np.ndarray:
        return self.forward(graph, observed)[0]

    def reconstruct(self, graph: Graph, observed) -> np.ndarray:
        return self.forward(graph, observed)[1]

    # -- state -------------------------------------------------------------
    def get_state(self) -> dict:
        state = {k: v.copy() for k, v in self.params.items()}
        state.update({f"m_{k}": v.copy() for k, v in self._m.items()})
        state.update({f"v_{k}": v.copy() for k, v in self._v.items()})
        state["step"] = self.step
        return state

    def set_state(self, state: dict) -> None:
        for k in PARAM_NAMES:
            self.params[k] = np.array(state[k], dtype=np.float64)
            self._m[k] = np.array(state[f"m_{k}"], dtype=np.float64)
            self._v[k] = np.array(state[f"v_{k}"], dtype=np.float64)
        self.step = int(state["step"])

    def save(self, path) -> None:
        """Write parameters, optimizer moments and hyperparameters to ``.npz``."""
        meta = {"version": CHECKPOINT_VERSION, "n_features": self.n_features,
                "config": asdict(self.config)}
        state = self.get_state()
        state["step"] = np.array(state["step"])
        with open(path, "wb") as fh:
            np.savez(fh, meta=np.array(json.dumps(meta)), **state)

    @classmethod
    def load(cls, path) -> "GcnAutoencoder":
        with np.load(Path(path), allow_pickle=False) as data:
            meta = json.loads(str(data["meta"]))
            if meta.get("version") != CHECKPOINT_VERSION:
                raise ValueError(f"unsupported checkpoint version {meta.get('version')}")
            model = cls(meta["n_features"], ModelConfig(**meta["config"]))
            model.set_state({k: data[k] for k in data.files if k != "meta"})
        return model
