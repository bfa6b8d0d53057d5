"""Experiment orchestration: config parsing, seeded runs, ablations and reports.

Every command writes CSV (the canonical artifact) and, for the ablations, a
small SVG chart. Outputs contain no timestamps, so rerunning a command with
the same config reproduces them byte for byte; wall-clock timings are kept
in separate ``timing*.csv`` files.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np

from . import centrality as cent
from . import svg
from .evaluation import classify_restored, degree_level_report, profile
from .graph import generate_sbm, load_attributes, load_edge_list, load_labels, split_dataset
from .model import GcnAutoencoder, ModelConfig
from .sampler import METRICS, SamplerConfig
from .trainer import Scheme, run_baseline

log = logging.getLogger(__name__)

TRACE_COLUMNS = ("epoch", "node_id", "entropy", "density", "centrality", "P_entropy",
                 "P_density", "P_centrality", "alpha", "beta", "gamma", "S", "selected")
PROFILE_COLUMNS = ("seed", "recall@10", "recall@20", "recall@50",
                   "ndcg@10", "ndcg@20", "ndcg@50")
METRIC_ABBREV = {"entropy": "E", "density": "D", "centrality": "C"}


class ConfigError(ValueError):
    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


@dataclass
class ExperimentConfig:
    dataset: str = "sbm"
    edges: str = ""
    attributes: str = ""
    labels: str = ""
    sbm_blocks: int = 3
    sbm_nodes_per_block: int = 100
    sbm_p_in: float = 0.1
    sbm_p_out: float = 0.01
    sbm_attr_dims: int = 10
    sbm_flip_noise: float = 0.2
    epsilon: float = 150.0
    threshold: int = 0
    n_clusters: int = 3
    batch: str = "1"
    rho: float = 0.85
    hidden1: int = 128
    hidden2: int = 64
    lr: float = 0.005
    weight_decay: float = 5e-4
    total_epochs: int = 400
    patience: int = 200
    eval_every: int = 10
    seeds: list = field(default_factory=lambda: [0])
    scheme: str = "beta"
    gamma: float = 1.0 / 3.0
    linear_from: float = 1.0
    linear_to: float = 0.0
    centrality: str = "pagerank"
    metrics: list = field(default_factory=lambda: list(METRICS))
    classify: bool = True
    cv_repeats: int = 10
    clusters_grid: list = field(default_factory=lambda: [2, 3, 5, 10])
    out: str = "out"
    trace: bool = False
    jobs: int = 1

    def validate(self) -> None:
        if self.dataset not in ("sbm", "files"):
            raise ConfigError(f"dataset must be 'sbm' or 'files', got {self.dataset!r}", "dataset")
        if self.dataset == "files":
            for key in ("edges", "attributes"):
                path = getattr(self, key)
                if not path or not Path(path).is_file():
                    raise ConfigError(f"{key}: file not found: {path!r}", key)
            if self.labels and not Path(self.labels).is_file():
                raise ConfigError(f"labels: file not found: {self.labels!r}", "labels")
        if not self.seeds:
            raise ConfigError("seeds must be non-empty", "seeds")
        if not self.epsilon > 0:
            raise ConfigError("epsilon must be positive", "epsilon")
        if self.batch != "auto":
            try:
                if int(self.batch) < 1:
                    raise ValueError
            except ValueError:
                raise ConfigError("batch must be a positive integer or 'auto'", "batch") from None
        if self.centrality not in cent.KINDS:
            raise ConfigError(f"centrality must be one of {cent.KINDS}", "centrality")
        try:
            self.scheme_obj()
        except ValueError as exc:
            raise ConfigError(str(exc), "scheme") from None

    def sampler_config(self, n_clusters: int | None = None) -> SamplerConfig:
        return SamplerConfig(
            epsilon=self.epsilon, threshold=self.threshold,
            n_clusters=n_clusters or self.n_clusters,
            batch_per_epoch=None if self.batch == "auto" else int(self.batch),
            pagerank_damping=self.rho)

    def model_config(self) -> ModelConfig:
        return ModelConfig(hidden1=self.hidden1, hidden2=self.hidden2, lr=self.lr,
                           weight_decay=self.weight_decay)

    def scheme_obj(self, **overrides) -> Scheme:
        kw = dict(kind=self.scheme, gamma=self.gamma, start=self.linear_from,
                  end=self.linear_to, metrics=tuple(self.metrics))
        kw.update(overrides)
        return Scheme(**kw)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        for k in ("out", "jobs", "trace"):
            d.pop(k)
        return d


def _coerce(name: str, raw: str, default):
    raw = raw.strip()
    try:
        if isinstance(default, bool):
            if raw.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return raw.lower() in ("true", "1", "yes")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            if "/" in raw:
                num, den = raw.split("/")
                return float(num) / float(den)
            return float(raw)
        if isinstance(default, list):
            items = [s.strip() for s in raw.split(",") if s.strip()]
            if name in ("seeds", "clusters_grid"):
                return [int(s) for s in items]
            return items
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {raw!r}", name) from None
    return raw


def parse_config(text: str = "", overrides=()) -> ExperimentConfig:
    """Build a config from flat ``key = value`` lines plus ``key=value`` overrides."""
    cfg = ExperimentConfig()
    defaults = {f.name: getattr(cfg, f.name) for f in dataclasses.fields(cfg)}
    pairs = []
    for lineno, line in enumerate(text.splitlines(), 1):
        s = line.split("#", 1)[0].strip()
        if not s:
            continue
        if "=" not in s:
            raise ConfigError(f"line {lineno}: expected key = value")
        pairs.append(s.split("=", 1))
    for ov in overrides:
        if "=" not in ov:
            raise ConfigError(f"override {ov!r}: expected key=value")
        pairs.append(ov.split("=", 1))
    for key, value in pairs:
        key = key.strip().replace("-", "_")
        if key not in defaults:
            raise ConfigError(f"unknown config key {key!r}", key)
        setattr(cfg, key, _coerce(key, value, defaults[key]))
    return cfg


def load_config(path=None, overrides=()) -> ExperimentConfig:
    text = ""
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {path}", "config")
        text = p.read_text(encoding="utf-8")
    return parse_config(text, overrides)


def build_graph(cfg: ExperimentConfig, seed: int):
    if cfg.dataset == "sbm":
        return generate_sbm(cfg.sbm_blocks, cfg.sbm_nodes_per_block, cfg.sbm_p_in,
                            cfg.sbm_p_out, cfg.sbm_attr_dims, cfg.sbm_flip_noise, seed)
    g = load_attributes(cfg.attributes, load_edge_list(cfg.edges))
    if cfg.labels:
        g = load_labels(cfg.labels, g)
    return g


def run_seed(cfg: ExperimentConfig, seed: int, scheme: Scheme | None = None,
             n_clusters: int | None = None, centrality_kind: str | None = None,
             curve_k: int | None = None, classify: bool | None = None,
             out_dir=None) -> dict:
    """One seeded run; returns deterministic metrics and writes per-seed files."""
    graph = build_graph(cfg, seed)
    split = split_dataset(graph, seed)
    model = GcnAutoencoder(graph.n_attr_dims, cfg.model_config(), seed=seed)
    trace = [] if (cfg.trace and out_dir is not None) else None
    model, record = run_baseline(
        graph, split, model, scheme or cfg.scheme_obj(), cfg.sampler_config(n_clusters),
        total_epochs=cfg.total_epochs, seed=seed,
        centrality_kind=centrality_kind or cfg.centrality, eval_every=cfg.eval_every,
        patience=cfg.patience, trace=trace, curve_k=curve_k)
    rep = profile(model, graph, split)
    result = {"seed": seed, **rep.as_row(), "n_test_skipped": rep.n_skipped,
              "best_epoch": record.best_epoch, "stopped_at": record.stopped_at,
              "emptied_at": record.emptied_at, "warnings": record.warnings,
              "degree_levels": degree_level_report(model, graph, split),
              "curve": [[e, r] for e, r in record.curve]}
    do_classify = cfg.classify if classify is None else classify
    if do_classify and graph.labels is not None:
        c = classify_restored(model, graph, split, seed=seed, n_repeats=cfg.cv_repeats)
        result["accuracy_mean"], result["accuracy_std"] = c.mean_accuracy, c.std_accuracy
    result["timing"] = record.mean_timing()
    if out_dir is not None:
        d = Path(out_dir)
        d.mkdir(parents=True, exist_ok=True)
        (d / "runrecord.csv").write_text(record.to_csv())
        (d / "timing.csv").write_text(record.timing_csv())
        if trace is not None:
            _write_trace(d / "trace.csv", trace, graph)
        model.save(d / "model.npz")
        det = {k: v for k, v in result.items() if k != "timing"}
        (d / "result.json").write_text(json.dumps(det, indent=2, sort_keys=True) + "\n")
        (d / "timing.json").write_text(json.dumps(result["timing"], indent=2) + "\n")
    return result


def _write_trace(path, trace, graph):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for epoch, table, weights, flag in trace:
            for i, node in enumerate(table.nodes):
                name = graph.node_names[node] if graph.node_names else int(node)
                w.writerow([epoch, name, repr(float(table.entropy[i])),
                            repr(float(table.density[i])), repr(float(table.centrality[i])),
                            repr(float(table.p_entropy[i])), repr(float(table.p_density[i])),
                            repr(float(table.p_centrality[i])), repr(weights.alpha),
                            repr(weights.beta), repr(weights.gamma),
                            repr(float(table.score[i])), int(flag[i])])


def _job(args):
    cfg, seed, kwargs = args
    return run_seed(cfg, seed, **kwargs)


def _run_seeds(cfg: ExperimentConfig, out: Path, tag: str, **kwargs) -> list[dict]:
    """Run every seed (resuming finished ones) for one experimental arm."""
    results, todo = {}, []
    for seed in cfg.seeds:
        d = out / tag / f"seed_{seed}"
        done = d / "result.json"
        if done.is_file() and (d / "timing.json").is_file():
            r = json.loads(done.read_text())
            r["timing"] = json.loads((d / "timing.json").read_text())
            results[seed] = r
        else:
            todo.append((cfg, seed, {**kwargs, "out_dir": d}))
    if cfg.jobs > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            for (c, seed, _), r in zip(todo, pool.map(_job, todo)):
                results[seed] = r
    else:
        for t in todo:
            results[t[1]] = _job(t)
    return [results[s] for s in cfg.seeds]


def _write_csv(path: Path, columns, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(r.get(c, "")) for c in columns])


def _cell(v):
    if isinstance(v, float):
        return "" if np.isnan(v) else f"{v:.6f}"
    return v


def _mean(rows, key):
    vals = [r[key] for r in rows if key in r and r[key] is not None]
    return float(np.mean(vals)) if vals else float("nan")


def _write_profiling(path, results):
    _write_csv(path, PROFILE_COLUMNS, results + [
        {"seed": "mean", **{c: _mean(results, c) for c in PROFILE_COLUMNS[1:]}}])


def cmd_run(cfg: ExperimentConfig) -> dict:
    """Main experiment: the configured scheme over every seed."""
    cfg.validate()
    out = Path(cfg.out)
    results = _run_seeds(cfg, out, "runs")
    _write_profiling(out / "profiling.csv", results)
    if any("accuracy_mean" in r for r in results):
        _write_csv(out / "classification.csv", ("seed", "accuracy_mean", "accuracy_std"),
                   results + [{"seed": "mean", "accuracy_mean": _mean(results, "accuracy_mean"),
                               "accuracy_std": _mean(results, "accuracy_std")}])
    levels = [{"seed": r["seed"], **lv} for r in results for lv in r["degree_levels"]]
    _write_csv(out / "degree_levels.csv",
               ("seed", "level", "n_nodes", "min_degree", "max_degree", "recall@20"), levels)
    for r in results:
        src = out / "runs" / f"seed_{r['seed']}" / "runrecord.csv"
        if src.is_file():
            (out / f"runrecord_seed{r['seed']}.csv").write_text(src.read_text())
    summary = {
        "command": "run", "config": cfg.to_dict(),
        "per_seed": [{k: v for k, v in r.items() if k not in ("timing", "curve")}
                     for r in results],
        "mean": {c: _mean(results, c) for c in PROFILE_COLUMNS[1:]
                 + ("accuracy_mean", "accuracy_std")},
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


WEIGHT_ARMS = (
    ("beta", dict(kind="beta")),
    ("fixed-0.2", dict(kind="fixed", gamma=0.2)),
    ("fixed-1/3", dict(kind="fixed", gamma=1.0 / 3.0)),
    ("fixed-0.6", dict(kind="fixed", gamma=0.6)),
    ("linear-1-0.5", dict(kind="linear", start=1.0, end=0.5)),
    ("linear-1-0", dict(kind="linear", start=1.0, end=0.0)),
    ("all-at-once", dict(kind="all-at-once")),
)


def cmd_ablate_weights(cfg: ExperimentConfig) -> dict:
    """Weighting-scheme comparison with test Recall@20 learning curves."""
    cfg.validate()
    out = Path(cfg.out)
    curves, finals = {}, []
    for name, kw in WEIGHT_ARMS:
        res = _run_seeds(cfg, out, f"weights/{name.replace('/', '_')}",
                         scheme=cfg.scheme_obj(**kw), curve_k=20, classify=False)
        epochs = [e for e, _ in res[0]["curve"]]
        curves[name] = (epochs, np.mean([[v for _, v in r["curve"]] for r in res], axis=0))
        finals.append({"scheme": name, "recall@20": _mean(res, "recall@20"),
                       "ndcg@20": _mean(res, "ndcg@20")})
    names = [n for n, _ in WEIGHT_ARMS]
    epochs = sorted({e for ep, _ in curves.values() for e in ep})
    rows = []
    for e in epochs:
        row = {"epoch": e}
        for n in names:
            ep, vals = curves[n]
            if e in ep:
                row[n] = float(vals[ep.index(e)])
        rows.append(row)
    _write_csv(out / "weights_curves.csv", ("epoch",) + tuple(names), rows)
    _write_csv(out / "weights_final.csv", ("scheme", "recall@20", "ndcg@20"), finals)
    (out / "weights_curves.svg").write_text(svg.line_chart(
        {n: (curves[n][0], list(curves[n][1])) for n in names},
        title="Test Recall@20 by weighting scheme", xlabel="epoch", ylabel="Recall@20"))
    return {"final": finals}


def cmd_ablate_centrality(cfg: ExperimentConfig) -> dict:
    cfg.validate()
    out = Path(cfg.out)
    rows = []
    for kind in cent.KINDS:
        res = _run_seeds(cfg, out, f"centrality/{kind}", centrality_kind=kind, classify=False)
        rows.append({"centrality": kind, "recall@20": _mean(res, "recall@20"),
                     "ndcg@20": _mean(res, "ndcg@20")})
    _write_csv(out / "centrality_ablation.csv", ("centrality", "recall@20", "ndcg@20"), rows)
    (out / "centrality_ablation.svg").write_text(svg.bar_chart(
        [r["centrality"] for r in rows], [r["recall@20"] for r in rows],
        title="Recall@20 by centrality measure", ylabel="Recall@20"))
    return {"rows": rows}


def metric_subsets():
    for r in (1, 2, 3):
        yield from combinations(METRICS, r)


def cmd_ablate_metrics(cfg: ExperimentConfig) -> dict:
    cfg.validate()
    out = Path(cfg.out)
    rows = []
    for subset in metric_subsets():
        label = "+".join(METRIC_ABBREV[m] for m in subset)
        res = _run_seeds(cfg, out, f"metrics/{label.replace('+', '')}",
                         scheme=cfg.scheme_obj(kind="beta", metrics=subset), classify=False)
        rows.append({"metrics": label, "recall@20": _mean(res, "recall@20"),
                     "ndcg@20": _mean(res, "ndcg@20")})
    _write_csv(out / "metrics_ablation.csv", ("metrics", "recall@20", "ndcg@20"), rows)
    (out / "metrics_ablation.svg").write_text(svg.bar_chart(
        [r["metrics"] for r in rows], [r["recall@20"] for r in rows],
        title="Recall@20 by metric combination", ylabel="Recall@20"))
    return {"rows": rows}


def cmd_ablate_clusters(cfg: ExperimentConfig) -> dict:
    cfg.validate()
    out = Path(cfg.out)
    rows = []
    for k in cfg.clusters_grid:
        res = _run_seeds(cfg, out, f"clusters/k{k}", n_clusters=k)
        rows.append({"n_clusters": k, "recall@20": _mean(res, "recall@20"),
                     "accuracy_mean": _mean(res, "accuracy_mean")})
    _write_csv(out / "clusters_ablation.csv", ("n_clusters", "recall@20", "accuracy_mean"), rows)
    (out / "clusters_ablation.svg").write_text(svg.bar_chart(
        [str(r["n_clusters"]) for r in rows], [r["recall@20"] for r in rows],
        title="Recall@20 by cluster count", ylabel="Recall@20"))
    return {"rows": rows}


TIMING_COMPONENTS = ("t_train", "t_forward", "t_uncertainty", "t_representativeness")


def cmd_timing(cfg: ExperimentConfig) -> dict:
    """Mean per-epoch wall-clock split over the sampling epochs (CPU, not GPU)."""
    cfg.validate()
    out = Path(cfg.out)
    res = _run_seeds(cfg, out, "timing", classify=False)
    mean = {k: _mean([r["timing"] for r in res], k) for k in TIMING_COMPONENTS + ("t_epoch",)}
    sampling = mean["t_forward"] + mean["t_uncertainty"] + mean["t_representativeness"]
    covered = sum(mean[k] for k in TIMING_COMPONENTS)
    report = {
        "clock": "cpu monotonic wall-clock (seconds per epoch)",
        **{k[2:]: mean[k] for k in TIMING_COMPONENTS},
        "epoch": mean["t_epoch"],
        "sampling_over_train": sampling / mean["t_train"],
        "component_coverage": covered / mean["t_epoch"],
    }
    _write_csv(out / "timing.csv", ("component", "seconds_per_epoch"),
               [{"component": k[2:], "seconds_per_epoch": mean[k]}
                for k in TIMING_COMPONENTS + ("t_epoch",)])
    (out / "timing_summary.json").write_text(json.dumps(report, indent=2) + "\n")
    return report


def cmd_centrality(graph_path, kind: str, out_path) -> None:
    g = load_edge_list(graph_path)
    vec = cent.compute(g, kind)
    names = g.node_names or [str(i) for i in range(g.n_nodes)]
    Path(out_path).parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("node_id", "score"))
        for name, v in zip(names, vec.values):
            w.writerow((name, repr(float(v))))


COMMANDS = {
    "run": cmd_run,
    "ablate-weights": cmd_ablate_weights,
    "ablate-centrality": cmd_ablate_centrality,
    "ablate-metrics": cmd_ablate_metrics,
    "ablate-clusters": cmd_ablate_clusters,
    "timing": cmd_timing,
}
