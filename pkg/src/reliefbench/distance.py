"""Per-feature diff, missing-aware Manhattan distances and per-target
distance statistics.

Distances live in condensed upper-triangular form: pair (i, j) with i < j
sits at ``n*i - i*(i+1)//2 + (j - i - 1)``, the same layout as
``scipy.spatial.distance.squareform``.
"""
from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels as K
from .errors import DataError

SKIP = None
"""Returned by `diff` when either value is missing."""

CACHE_MAGIC = b"RBDM\x01\x00\x00\x00"


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    distances: np.ndarray
    valid_counts: np.ndarray
    n: int

    def __post_init__(self):
        m = self.n * (self.n - 1) // 2
        if self.distances.shape != (m,) or self.valid_counts.shape != (m,):
            raise ValueError(f"condensed arrays must have length {m}")

    def index(self, i, j):
        if i == j:
            raise IndexError("diagonal is not stored")
        if i > j:
            i, j = j, i
        return self.n * i - i * (i + 1) // 2 + (j - i - 1)

    def __call__(self, i, j):
        if i == j:
            return 0.0
        return float(self.distances[self.index(i, j)])

    def valid(self, i, j):
        return int(self.valid_counts[self.index(i, j)])

    def row(self, i):
        out = np.empty(self.n)
        K.fill_row(self.distances, self.n, i, out)
        return out

    def square(self):
        sq = np.zeros((self.n, self.n))
        iu = np.triu_indices(self.n, 1)
        sq[iu] = self.distances
        sq.T[iu] = self.distances
        return sq


@dataclass(frozen=True)
class TargetStats:
    mean: float
    sd: float

    @property
    def near_bound(self):
        return self.mean - self.sd / 2.0

    @property
    def far_bound(self):
        return self.mean + self.sd / 2.0


def diff(feature, i, j, data, summary):
    """Difference of one feature between two instances, in [0, 1], or SKIP."""
    vi = data.X[i, feature]
    vj = data.X[j, feature]
    if math.isnan(vi) or math.isnan(vj):
        return SKIP
    fk = summary.feature_kinds[feature]
    if fk.is_continuous:
        return abs(vi - vj) / (fk.observed_max - fk.observed_min)
    return 0.0 if vi == vj else 1.0


def pairwise_distances(data, summary, threads=None):
    """Condensed Manhattan distance matrix over normalized data.

    Pairs with missing cells sum diffs over the shared features only and
    are rescaled by a / valid_count.
    """
    K.set_threads(threads)
    n = data.n
    m = n * (n - 1) // 2
    dist = np.empty(m)
    valid = np.empty(m, dtype=np.int64)
    cont = summary.continuous_mask
    K.pairwise_kernel(np.ascontiguousarray(data.X), cont, dist, valid)
    bad = np.flatnonzero(valid == 0)
    if bad.size:
        i, j = _pair_of(bad[0], n)
        raise DataError(
            f"instances {i} and {j} share no observed feature; distance undefined"
        )
    dist.flags.writeable = False
    valid.flags.writeable = False
    return DistanceMatrix(dist, valid, n)


def _pair_of(idx, n):
    i = 0
    while idx >= n - i - 1:
        idx -= n - i - 1
        i += 1
    return i, i + 1 + idx


def target_stats(dm, i):
    """Mean and population standard deviation of d(i, j) over j != i."""
    mean, sd = K.row_stats(dm.row(i), i)
    return TargetStats(mean, sd)


def all_target_stats(dm, threads=None):
    K.set_threads(threads)
    means = np.empty(dm.n)
    sds = np.empty(dm.n)
    K.target_stats_kernel(dm.distances, dm.n, means, sds)
    return means, sds


def global_threshold(dm):
    """Mean of all stored pair distances."""
    return float(K.sequential_mean(dm.distances))


# ---------------------------------------------------------------------------
# binary cache


def cache_key(data, summary=None):
    h = hashlib.sha256()
    h.update("\x1f".join(data.feature_names).encode())
    h.update(np.ascontiguousarray(data.X, dtype="<f8").tobytes())
    if summary is not None:
        h.update(summary.continuous_mask.tobytes())
    return h.hexdigest()[:32]


def save_distances(dm, path, a):
    """Write magic, n, a (little-endian uint64), the condensed distances as
    little-endian float64, then the valid counts as little-endian uint32."""
    with open(path, "wb") as fh:
        fh.write(CACHE_MAGIC)
        fh.write(struct.pack("<QQ", dm.n, a))
        fh.write(np.asarray(dm.distances, dtype="<f8").tobytes())
        fh.write(np.asarray(dm.valid_counts, dtype="<u4").tobytes())


def load_distances(path):
    """Returns (DistanceMatrix, a)."""
    raw = Path(path).read_bytes()
    if raw[:8] != CACHE_MAGIC:
        raise DataError(f"{path}: not a distance cache file")
    if len(raw) < 24:
        raise DataError(f"{path}: truncated header")
    n, a = struct.unpack("<QQ", raw[8:24])
    m = n * (n - 1) // 2
    if len(raw) != 24 + 12 * m:
        raise DataError(f"{path}: truncated or oversized payload")
    off = 24
    dist = np.frombuffer(raw, dtype="<f8", count=m, offset=off).astype(np.float64)
    off += 8 * m
    valid = np.frombuffer(raw, dtype="<u4", count=m, offset=off).astype(np.int64)
    return DistanceMatrix(dist, valid, int(n)), int(a)


def cached_pairwise_distances(data, summary, cache_dir, threads=None):
    path = Path(cache_dir) / f"{cache_key(data, summary)}.rbdm"
    if path.exists():
        dm, a = load_distances(path)
        if dm.n == data.n and a == data.a:
            return dm
    dm = pairwise_distances(data, summary, threads)
    path.parent.mkdir(parents=True, exist_ok=True)
    save_distances(dm, path, data.a)
    return dm
