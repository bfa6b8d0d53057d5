"""Alternating train / sample loop and the comparison schemes."""
from __future__ import annotations

import csv
import io
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import centrality as cent
from .evaluation import profile_nodes
from .graph import DataSplit, Graph
from .model import PrimaryModel, node_bce
from .sampler import (METRICS, MetricWeights, SamplerConfig, SamplerState, ScoreTable,
                      density_scores, fuse, select, weight_schedule)

log = logging.getLogger(__name__)

SCHEMES = ("beta", "uniform", "fixed", "linear", "all-at-once")
RECORD_COLUMNS = ("epoch", "loss", "n_labeled", "n_candidates", "alpha", "beta", "gamma",
                  "val_recall10", "selected")
TIMING_COLUMNS = ("epoch", "t_train", "t_forward", "t_uncertainty",
                  "t_representativeness", "t_epoch")


@dataclass
class Scheme:
    """How candidates are ranked and how metric weights evolve.

    ``kind`` is one of ``beta`` (the Beta-distributed schedule), ``uniform``
    (random candidate order), ``fixed`` (constant ``gamma``), ``linear``
    (``gamma`` moves from ``start`` to ``end`` over the sampling steps) or
    ``all-at-once`` (whole pool used from the first epoch).
    """

    kind: str = "beta"
    gamma: float = 1.0 / 3.0
    start: float = 1.0
    end: float = 0.0
    metrics: tuple = METRICS

    def __post_init__(self):
        if self.kind not in SCHEMES:
            raise ValueError(f"unknown scheme {self.kind!r}; expected one of {SCHEMES}")
        bad = set(self.metrics) - set(METRICS)
        if bad or not self.metrics:
            raise ValueError(f"metrics must be a non-empty subset of {METRICS}")
        self.metrics = tuple(m for m in METRICS if m in self.metrics)

    def weights(self, n_e: int, step: int, n_steps: int, config: SamplerConfig, rng):
        if self.kind == "fixed":
            w = MetricWeights.from_gamma(self.gamma)
        elif self.kind == "linear":
            frac = step / n_steps if n_steps > 0 else 0.0
            w = MetricWeights.from_gamma(self.start + (self.end - self.start) * frac)
        else:
            w = weight_schedule(n_e, config, rng)
        if self.metrics != METRICS:
            w = w.restricted(self.metrics)
        return w


@dataclass
class RunRecord:
    rows: list = field(default_factory=list)
    timings: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    emptied_at: int | None = None
    best_epoch: int = 0
    best_val_recall10: float = float("nan")
    stopped_at: int = 0
    curve: list = field(default_factory=list)

    def to_csv(self) -> str:
        """Deterministic per-epoch log; wall-clock lives in :meth:`timing_csv`."""
        return _csv(RECORD_COLUMNS, self.rows)

    def timing_csv(self) -> str:
        return _csv(TIMING_COLUMNS, self.timings)

    def mean_timing(self, sampling_only: bool = True) -> dict:
        rows = [t for t, r in zip(self.timings, self.rows) if r["selected"] or not sampling_only]
        if not rows:
            rows = self.timings
        return {k: float(np.mean([t[k] for t in rows])) for k in TIMING_COLUMNS[1:]}


def _fmt(v):
    if isinstance(v, float):
        return "" if np.isnan(v) else repr(v)
    return str(v)


def _csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def _initial_labeled(pool: np.ndarray, rng, fraction: float = 0.01) -> np.ndarray:
    n0 = max(1, int(round(fraction * pool.size)))
    return np.sort(rng.choice(pool, size=n0, replace=False))


def _run(graph: Graph, split: DataSplit, model: PrimaryModel, config: SamplerConfig,
         total_epochs: int, seed: int, scheme: Scheme, centrality_kind: str = "pagerank",
         eval_every: int = 10, patience: int = 200, select_best: bool = True,
         trace=None, curve_k: int | None = None):
    init_rng, sample_rng = (np.random.default_rng(s)
                            for s in np.random.SeedSequence(seed).spawn(2))
    pool = np.asarray(split.train_pool, dtype=np.int64)
    if scheme.kind == "all-at-once":
        labeled = pool
    else:
        labeled = _initial_labeled(pool, init_rng)
    state = SamplerState(pool, labeled, config, sample_rng)
    batch = config.batch_size(state.candidates.size)
    n_steps = int(np.ceil(state.candidates.size / batch))
    if total_epochs < n_steps:
        msg = (f"total_epochs={total_epochs} too small to empty the candidate set "
               f"({n_steps} sampling steps needed)")
        log.warning(msg)

    phi_c = None
    if "centrality" in scheme.metrics and scheme.kind != "uniform" and n_steps:
        kw = {"rho": config.pagerank_damping} if centrality_kind == "pagerank" else {}
        phi_c = cent.compute(graph, centrality_kind, **kw).values

    record = RunRecord()
    if total_epochs < n_steps:
        record.warnings.append(msg)
    best_state, best_score, since_best = None, -np.inf, 0
    curve = []
    step = 0
    epoch = 0
    for epoch in range(1, total_epochs + 1):
        state.epoch = epoch
        t0 = time.perf_counter()
        loss = model.train_epoch(graph, state.labeled)
        t1 = time.perf_counter()
        t_fwd = t_unc = t_rep = 0.0
        weights = None
        chosen = np.empty(0, dtype=np.int64)
        if state.candidates.size:
            cands = state.candidates
            if scheme.kind == "uniform":
                t2 = t1
                chosen = cands[select(np.zeros(cands.size), batch, state.rng)]
                t_rep = time.perf_counter() - t2
            else:
                z, probs = model.forward(graph, state.labeled)
                t2 = time.perf_counter()
                entropy = node_bce(probs[cands], graph.attributes[cands])
                t3 = time.perf_counter()
                if "density" in scheme.metrics:
                    density = density_scores(z[cands], config.n_clusters, state.rng,
                                             config.kmeans_max_iter, config.kmeans_tol)
                else:
                    density = np.zeros(cands.size)
                table = ScoreTable(cands, entropy, density,
                                   phi_c[cands] if phi_c is not None else np.zeros(cands.size))
                weights = scheme.weights(epoch, step, n_steps, config, state.rng)
                fuse(table, weights)
                pos = select(table.score, batch, state.rng)
                chosen = cands[pos]
                t4 = time.perf_counter()
                t_fwd, t_unc, t_rep = t2 - t1, t3 - t2, t4 - t3
                if trace is not None:
                    flag = np.zeros(cands.size, dtype=bool)
                    flag[pos] = True
                    trace.append((epoch, table, weights, flag))
            state.move(chosen)
            step += 1
            if not state.candidates.size:
                record.emptied_at = epoch
        t_end = time.perf_counter()

        val = float("nan")
        if epoch % eval_every == 0 or epoch == total_epochs:
            val = profile_nodes(model, graph, pool, split.validation, ks=(10,))["recall@10"]
            if val > best_score:
                best_score, since_best = val, 0
                record.best_epoch = epoch
                if select_best:
                    best_state = model.get_state()
            else:
                since_best += eval_every
        if curve_k is not None and (epoch % eval_every == 0 or epoch == total_epochs):
            r = profile_nodes(model, graph, pool, split.test, ks=(curve_k,))
            curve.append((epoch, r[f"recall@{curve_k}"]))

        w = weights.as_array() if weights is not None else (np.nan,) * 3
        record.rows.append({
            "epoch": epoch, "loss": float(loss), "n_labeled": int(state.labeled.size),
            "n_candidates": int(state.candidates.size),
            "alpha": float(w[0]), "beta": float(w[1]), "gamma": float(w[2]),
            "val_recall10": val, "selected": " ".join(map(str, chosen.tolist())),
        })
        record.timings.append({
            "epoch": epoch, "t_train": t1 - t0, "t_forward": t_fwd, "t_uncertainty": t_unc,
            "t_representativeness": t_rep, "t_epoch": t_end - t0,
        })
        if not state.candidates.size and since_best >= patience:
            break
    record.stopped_at = epoch
    record.best_val_recall10 = float(best_score)
    if select_best and best_state is not None:
        model.set_state(best_state)
    record.curve = curve
    return model, record


def run_ats(graph: Graph, split: DataSplit, model: PrimaryModel, sampler_config: SamplerConfig,
            total_epochs: int, seed: int, **kwargs):
    """Grow the training set with the Beta-weighted active sampler.

    Every epoch trains ``model`` once on the labeled set and, while candidates
    remain, moves the best-scoring ones into it. Training then continues on
    the full pool until ``total_epochs`` (or 200 epochs without validation
    Recall@10 improvement). The model is restored to its best validation
    checkpoint before returning.
    """
    return _run(graph, split, model, sampler_config, total_epochs, seed, Scheme("beta"), **kwargs)


def run_baseline(graph: Graph, split: DataSplit, model: PrimaryModel, scheme,
                 sampler_config: SamplerConfig | None = None, total_epochs: int = 500,
                 seed: int = 0, **kwargs):
    """Same loop as :func:`run_ats` with a different selection / weighting scheme.

    ``scheme`` is a :class:`Scheme` or one of its kind names.
    """
    if isinstance(scheme, str):
        scheme = Scheme(scheme)
    return _run(graph, split, model, sampler_config or SamplerConfig(), total_epochs, seed,
                scheme, **kwargs)
