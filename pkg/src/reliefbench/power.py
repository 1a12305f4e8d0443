"""Replicate orchestration and percentile power analysis.

A replicate succeeds at percentile p when the lowest-ranked relevant
feature sits within the top ``ceil(p * a / 100)`` ranks. Percentile 0 is
the strict "optimal" condition: every relevant feature scores strictly
above every irrelevant one. A replicate that is optimal counts as a
success at every percentile, which keeps curves monotone.
"""
from __future__ import annotations

import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import simulate
from .data import DEFAULT_DISCRETE_CUTOFF, prepare
from .distance import pairwise_distances
from .errors import ConfigError, NotApplicableError
from .filters import run_filter
from .relief import NeighborSpec, parse_algorithm, score

log = logging.getLogger(__name__)

PERCENTILES = tuple(range(101))
CONTROL_LABEL = "random_shuffle"
DEFAULT_REPLICATES = 30
ABSENT_METHODS = ("extratrees", "rfe_extratrees")


@dataclass(frozen=True)
class RankedList:
    """Feature indices by descending weight, ties by ascending index."""

    order: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if sorted(self.order.tolist()) != list(range(len(self.order))):
            raise ValueError("ranked list must be a permutation of feature indices")

    @property
    def a(self):
        return len(self.order)

    def rank_of(self, feature):
        """1-based rank."""
        return int(np.flatnonzero(self.order == feature)[0]) + 1


def rank_features(weights, names=None):
    """Stable descending sort. Accepts a WeightVector or a plain array;
    NaN weights rank last."""
    w = np.asarray(getattr(weights, "weights", weights), dtype=np.float64)
    key = np.where(np.isnan(w), np.inf, -w)
    return RankedList(np.argsort(key, kind="stable"), w)


def is_optimal(rl, relevant):
    relevant = set(relevant)
    if not relevant:
        raise ValueError("relevant set is empty")
    irr = [j for j in range(rl.a) if j not in relevant]
    if not irr:
        return True
    w = rl.weights
    return bool(min(w[j] for j in relevant) > max(w[j] for j in irr))


def success_at_percentile(rl, relevant, pct):
    if not 0 <= pct <= 100:
        raise ValueError(f"percentile must be in [0, 100], got {pct}")
    if is_optimal(rl, relevant):
        return True
    if pct == 0:
        return False
    worst = max(rl.rank_of(j) for j in relevant)
    return worst <= math.ceil(pct * rl.a / 100)


def success_vector(rl, relevant, percentiles=PERCENTILES):
    return np.array([success_at_percentile(rl, relevant, p) for p in percentiles])


@dataclass(frozen=True)
class PowerCurve:
    label: str
    percentiles: tuple
    power: np.ndarray
    replicates: int

    def at(self, pct):
        return float(self.power[self.percentiles.index(pct)])

    @property
    def optimal(self):
        return self.at(0)


def power_curve(successes, label="", percentiles=PERCENTILES):
    """Per-percentile mean over a (replicates, percentiles) boolean array."""
    s = np.asarray(successes, dtype=bool)
    if s.ndim != 2 or s.shape[0] < 1:
        raise ValueError("need at least one replicate row")
    return PowerCurve(label, tuple(percentiles), s.mean(axis=0), s.shape[0])


def shuffle_ranking(a, rng):
    """Random permutation posing as a ranked list (distinct weights)."""
    order = rng.permutation(a)
    w = np.empty(a)
    w[order] = np.arange(a, 0, -1, dtype=np.float64)
    return RankedList(order, w)


# ---------------------------------------------------------------------------
# orchestration


@dataclass
class BenchmarkConfig:
    name: str
    generator: dict
    algorithms: list
    seed: int
    replicates: int = DEFAULT_REPLICATES
    threads: int | None = None
    jobs: int = 1
    discrete_cutoff: int = DEFAULT_DISCRETE_CUTOFF

    @classmethod
    def from_dict(cls, cfg, seed=None):
        try:
            name = cfg["name"]
            gen = cfg["generator"]
            algs = list(cfg["algorithms"])
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"benchmark config missing {exc}") from None
        seed = cfg.get("seed") if seed is None else seed
        if seed is None:
            raise ConfigError("benchmark needs a seed")
        for a in algs:
            parse_algorithm(a)
        reps = int(cfg.get("replicates", DEFAULT_REPLICATES))
        if reps < 1:
            raise ConfigError("replicates must be >= 1")
        return cls(name, gen, algs, int(seed), reps, cfg.get("threads"),
                   int(cfg.get("jobs", 1)),
                   int(cfg.get("discrete_cutoff", DEFAULT_DISCRETE_CUTOFF)))

    @classmethod
    def load(cls, path, seed=None):
        try:
            cfg = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(cfg, seed)

    def to_dict(self):
        return {"name": self.name, "generator": self.generator,
                "algorithms": self.algorithms, "seed": self.seed,
                "replicates": self.replicates}


@dataclass
class ReplicateResult:
    replicate: int
    successes: dict
    runtimes: dict
    not_applicable: dict
    distance_time: float
    weights: dict = field(default_factory=dict)


def score_any(alg, data, summary, dm=None, threads=None):
    """WeightVector for a Relief spec or a filter name."""
    spec = parse_algorithm(alg) if isinstance(alg, str) else alg
    if isinstance(spec, NeighborSpec):
        return score(data, summary, spec, dm=dm, threads=threads)
    return run_filter(spec, data, summary)


def run_replicate(cfg, r):
    seed = simulate.replicate_seed(cfg.seed, r)
    sim = simulate.generate(cfg.generator, seed)
    data, summary = prepare(sim.data, cfg.discrete_cutoff)

    dm = None
    dist_time = 0.0
    if any(isinstance(parse_algorithm(a), NeighborSpec) for a in cfg.algorithms):
        t0 = time.perf_counter()
        dm = pairwise_distances(data, summary, cfg.threads)
        dist_time = time.perf_counter() - t0

    successes, runtimes, na, weights = {}, {}, {}, {}
    for alg in cfg.algorithms:
        t0 = time.perf_counter()
        try:
            w = score_any(alg, data, summary, dm, cfg.threads)
        except NotApplicableError as exc:
            na[alg] = str(exc)
            continue
        elapsed = time.perf_counter() - t0
        if isinstance(parse_algorithm(alg), NeighborSpec):
            elapsed += dist_time
        runtimes[alg] = elapsed
        weights[alg] = w.weights
        successes[alg] = success_vector(rank_features(w), sim.relevant)

    rng = np.random.default_rng([seed, 99])
    successes[CONTROL_LABEL] = success_vector(shuffle_ranking(data.a, rng), sim.relevant)
    return ReplicateResult(r, successes, runtimes, na, dist_time, weights)


@dataclass
class BenchmarkReport:
    config: BenchmarkConfig
    curves: dict
    control: PowerCurve
    runtimes: dict
    not_applicable: dict
    results: list

    def write(self, out_dir):
        """Write ``<name>.power.tsv`` and ``<name>.summary``; returns both paths."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        tsv = out / f"{self.config.name}.power.tsv"
        lines = ["algorithm\tpercentile\tpower"]
        for label, curve in list(self.curves.items()) + [(CONTROL_LABEL, self.control)]:
            for p, v in zip(curve.percentiles, curve.power):
                lines.append(f"{label}\t{p}\t{v:.6g}")
        tsv.write_text("\n".join(lines) + "\n")
        summary = out / f"{self.config.name}.summary"
        summary.write_text(json.dumps(self.summary(), indent=2) + "\n")
        return tsv, summary

    def summary(self):
        algs = {}
        for alg in self.config.algorithms:
            if alg in self.not_applicable:
                algs[alg] = {"applicable": False, "reason": self.not_applicable[alg]}
                continue
            rt = self.runtimes[alg]
            algs[alg] = {
                "applicable": True,
                "power_optimal": self.curves[alg].optimal,
                "mean_runtime_s": float(np.mean(rt)),
                "runtimes_s": [float(t) for t in rt],
            }
        return {
            "config": self.config.to_dict(),
            "replicates": self.config.replicates,
            "algorithms": algs,
            "control": {"label": CONTROL_LABEL, "power_optimal": self.control.optimal},
            "absent": list(ABSENT_METHODS),
        }


def run_benchmark(config, seed=None):
    """Generate every replicate, score it with each algorithm plus the
    shuffle control and assemble a BenchmarkReport.

    `config` is a BenchmarkConfig, a mapping or a path to a JSON file.
    Replicates run in worker processes when ``jobs > 1``; results are
    reduced in replicate order so reports do not depend on scheduling.
    """
    if isinstance(config, (str, Path)):
        config = BenchmarkConfig.load(config, seed)
    elif isinstance(config, dict):
        config = BenchmarkConfig.from_dict(config, seed)
    reps = range(config.replicates)
    if config.jobs > 1:
        with ProcessPoolExecutor(config.jobs) as pool:
            results = list(pool.map(run_replicate, [config] * len(reps), reps))
    else:
        results = [run_replicate(config, r) for r in reps]
    results.sort(key=lambda res: res.replicate)

    na = {}
    for res in results:
        na.update(res.not_applicable)
    curves, runtimes = {}, {}
    for alg in config.algorithms:
        if alg in na:
            log.info("%s: not applicable (%s)", alg, na[alg])
            continue
        curves[alg] = power_curve([res.successes[alg] for res in results], alg)
        runtimes[alg] = [res.runtimes[alg] for res in results]
    control = power_curve([res.successes[CONTROL_LABEL] for res in results], CONTROL_LABEL)
    return BenchmarkReport(config, curves, control, runtimes, na, results)
