"""Neighbor selection and feature weighting for the core Relief variants.

Five variants share one scoring engine:

* ``relieff``: k nearest hits and k nearest misses of every other class.
* ``surf``: every instance closer than the mean pairwise distance.
* ``surfstar``: SURF near set plus "far" scoring of everything else, with
  inverted signs on far differences.
* ``multisurfstar``: target-centric threshold T_i with a dead-band of one
  standard deviation; far instances score on *same* values.
* ``multisurf``: the MultiSURF* near set only.

Weight updates are normalized by n and by per-target hit/miss counts, so
class imbalance and variable neighborhood sizes are absorbed per target.
Multi-class misses of class C carry the factor m_C / m.
"""
from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .distance import all_target_stats, global_threshold, pairwise_distances
from .errors import UsageError

log = logging.getLogger(__name__)

RBA_NAMES = ("relieff", "surf", "surfstar", "multisurfstar", "multisurf")
FILTER_NAMES = ("chi2", "anova_f", "mutual_info")
VALID_ALGORITHMS = (
    "relieff:k=K",
    "relieff:pct=P",
    "surf",
    "surfstar",
    "multisurfstar",
    "multisurf",
    "chi2",
    "anova_f",
    "mutual_info",
)

_VARIANT_CODE = {
    "relieff": K.RELIEFF,
    "surf": K.SURF,
    "surfstar": K.SURFSTAR,
    "multisurfstar": K.MULTISURFSTAR,
    "multisurf": K.MULTISURF,
}


@dataclass(frozen=True)
class NeighborSpec:
    """Algorithm variant plus its parameters.

    For ``relieff`` exactly one of `k` (neighbors per class) or `pct`
    (fraction of n; k = floor(pct * n / 2)) is set.
    """

    variant: str
    k: int | None = None
    pct: float | None = None

    def __post_init__(self):
        if self.variant not in _VARIANT_CODE:
            raise UsageError(f"unknown Relief variant {self.variant!r}")
        if self.variant == "relieff":
            if (self.k is None) == (self.pct is None):
                raise UsageError("relieff needs exactly one of k or pct")
            if self.k is not None and self.k < 1:
                raise UsageError(f"relieff k must be >= 1, got {self.k}")
            if self.pct is not None and not 0 < self.pct <= 1:
                raise UsageError(f"relieff pct must be in (0, 1], got {self.pct}")
        elif self.k is not None or self.pct is not None:
            raise UsageError(f"{self.variant} takes no parameters")

    @property
    def code(self):
        return _VARIANT_CODE[self.variant]

    @property
    def has_far(self):
        return self.variant in ("surfstar", "multisurfstar")

    def neighbors_for(self, n):
        """Resolve k for a dataset of n instances (0 for threshold variants)."""
        if self.variant != "relieff":
            return 0
        k = self.k if self.k is not None else math.floor(self.pct * n / 2)
        if k < 1:
            raise UsageError(f"relieff pct={self.pct} gives k < 1 at n={n}")
        if k > n - 1:
            raise UsageError(f"relieff k={k} exceeds n-1={n - 1}")
        return k

    @property
    def label(self):
        if self.variant == "relieff":
            if self.k is not None:
                return f"relieff:k={self.k}"
            return f"relieff:pct={self.pct:g}"
        return self.variant


def parse_algorithm(text):
    """Parse ``name`` or ``name:key=value`` into a NeighborSpec, or return
    the filter name (``chi2``, ``anova_f``, ``mutual_info[:bins=B]``)."""
    text = text.strip().lower()
    name, _, rest = text.partition(":")
    params = {}
    if rest:
        for part in rest.split(","):
            m = re.fullmatch(r"\s*(\w+)\s*=\s*([^\s]+)\s*", part)
            if not m:
                raise _bad_algorithm(text)
            params[m.group(1)] = m.group(2)
    try:
        if name == "relieff":
            if set(params) == {"k"}:
                return NeighborSpec("relieff", k=int(params["k"]))
            if set(params) == {"pct"}:
                pct = float(params["pct"])
                if pct > 1:
                    pct /= 100.0
                return NeighborSpec("relieff", pct=pct)
            raise _bad_algorithm(text)
        if name in _VARIANT_CODE and not params:
            return NeighborSpec(name)
        if name in ("chi2", "anova_f") and not params:
            return name
        if name == "mutual_info" and set(params) <= {"bins"}:
            return text if params else name
    except ValueError:
        raise _bad_algorithm(text) from None
    raise _bad_algorithm(text)


def _bad_algorithm(text):
    return UsageError(
        f"invalid algorithm {text!r}; valid: {', '.join(VALID_ALGORITHMS)}"
    )


@dataclass
class NeighborSet:
    target: int
    near_hits: list
    near_misses: list
    far_hits: list = field(default_factory=list)
    far_misses: list = field(default_factory=list)
    miss_class_counts: dict = field(default_factory=dict)
    far_miss_class_counts: dict = field(default_factory=dict)
    shortfall: bool = False

    @property
    def h(self):
        return len(self.near_hits)

    @property
    def m(self):
        return len(self.near_misses)


@dataclass
class WeightVector:
    """Per-feature weights plus valid hit/miss pair counts (missing-data
    accounting)."""

    weights: np.ndarray
    hit_pairs: np.ndarray
    miss_pairs: np.ndarray
    feature_names: tuple = ()
    shortfall_targets: int = 0

    @classmethod
    def zeros(cls, a, feature_names=()):
        return cls(np.zeros(a), np.zeros(a, np.int64), np.zeros(a, np.int64),
                   tuple(feature_names))


# ---------------------------------------------------------------------------
# endpoint handling


@dataclass(frozen=True)
class _Endpoint:
    codes: np.ndarray
    values: np.ndarray
    continuous: bool
    sigma: float
    n_classes: int


def _endpoint(data, summary):
    ek = summary.endpoint_kind
    if ek.is_continuous:
        return _Endpoint(np.zeros(data.n, np.int64), np.asarray(data.y, np.float64),
                         True, float(ek.sigma), 1)
    codes = summary.class_codes(data.y)
    return _Endpoint(codes, np.zeros(data.n), False, 0.0, ek.n_classes)


def hit_or_miss(i, j, data, summary):
    """Return ``"hit"`` or ``("miss", class_of_j)``.

    Continuous endpoints use the standard-deviation rule: hit iff
    |y_i - y_j| < sigma_E.
    """
    ep = _endpoint(data, summary)
    if K.is_hit(i, j, ep.codes, ep.values, ep.continuous, ep.sigma):
        return "hit"
    return ("miss", data.y[j])


def _stats(spec, dm, threads=None):
    if spec.variant in ("surf", "surfstar"):
        return global_threshold(dm), np.zeros(dm.n), np.zeros(dm.n)
    if spec.variant in ("multisurfstar", "multisurf"):
        means, sds = all_target_stats(dm, threads)
        return 0.0, means, sds
    return 0.0, np.zeros(dm.n), np.zeros(dm.n)


def select_neighbors(spec, target, dm, data, summary, _stats_cache=None):
    """Neighbor set of one target under `spec`."""
    ep = _endpoint(data, summary)
    T, Ti, Si = _stats_cache or _stats(spec, dm)
    roles = np.zeros(dm.n, np.int8)
    short = K.select_roles(target, dm.row(target), ep.codes, ep.values,
                           ep.continuous, ep.sigma, spec.code,
                           spec.neighbors_for(dm.n), T, Ti, Si, ep.n_classes, roles)
    idx = np.arange(dm.n)
    ns = NeighborSet(
        target,
        near_hits=idx[roles == K.NEAR_HIT].tolist(),
        near_misses=idx[roles == K.NEAR_MISS].tolist(),
        far_hits=idx[roles == K.FAR_HIT].tolist(),
        far_misses=idx[roles == K.FAR_MISS].tolist(),
        shortfall=bool(short),
    )
    labels = data.y
    for j in ns.near_misses:
        ns.miss_class_counts[labels[j]] = ns.miss_class_counts.get(labels[j], 0) + 1
    for j in ns.far_misses:
        ns.far_miss_class_counts[labels[j]] = ns.far_miss_class_counts.get(labels[j], 0) + 1
    return ns


def update_weights(w, target, ns, data, summary, spec):
    """Add one target's contribution to the accumulator `w` (in place)."""
    ep = _endpoint(data, summary)
    roles = np.zeros(data.n, np.int8)
    roles[ns.near_hits] = K.NEAR_HIT
    roles[ns.near_misses] = K.NEAR_MISS
    roles[ns.far_hits] = K.FAR_HIT
    roles[ns.far_misses] = K.FAR_MISS
    out = np.zeros(data.a)
    hp = np.zeros(data.a, np.int64)
    mp = np.zeros(data.a, np.int64)
    K.accumulate(target, roles, np.ascontiguousarray(data.X), summary.continuous_mask,
                 ep.codes, ep.continuous, ep.n_classes, spec.code, out, hp, mp)
    w.weights += out
    w.hit_pairs += hp
    w.miss_pairs += mp
    w.shortfall_targets += int(ns.shortfall)
    return w


def score(data, summary, spec, dm=None, threads=None):
    """Score every feature of normalized `data`; every instance is a target
    exactly once.

    Pass a precomputed DistanceMatrix `dm` to share it across variants.
    """
    if isinstance(spec, str):
        spec = parse_algorithm(spec)
    if dm is None:
        dm = pairwise_distances(data, summary, threads)
    K.set_threads(threads)
    n, a = data.n, data.a
    k = spec.neighbors_for(n)
    ep = _endpoint(data, summary)
    T, Ti, Si = _stats(spec, dm, threads)
    out = np.zeros((n, a))
    hp = np.zeros((n, a), np.int64)
    mp = np.zeros((n, a), np.int64)
    short = np.zeros(n, np.bool_)
    K.score_kernel(np.ascontiguousarray(data.X), summary.continuous_mask,
                   dm.distances, ep.codes, ep.values, ep.continuous, ep.sigma,
                   spec.code, k, T, Ti, Si, ep.n_classes, out, hp, mp, short)
    nshort = int(short.sum())
    if nshort:
        log.debug("%s: %d targets lacked k=%d neighbors in some class",
                  spec.label, nshort, k)
    return WeightVector(out.sum(axis=0), hp.sum(axis=0), mp.sum(axis=0),
                        data.feature_names, nshort)
