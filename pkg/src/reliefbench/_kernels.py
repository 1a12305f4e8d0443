"""Numba kernels for the O(n^2 * a) stages.

Every kernel parallelizes over target instances (or distance-matrix rows)
and writes each output element exactly once, so results are bitwise
identical for any thread count. Reductions over features and neighbors
run in ascending index order.
"""
import math

import numba
import numpy as np
from numba import njit, prange

# workqueue is always available; probing TBB/OpenMP only produces warnings
numba.config.THREADING_LAYER = "workqueue"

RELIEFF = 0
SURF = 1
SURFSTAR = 2
MULTISURFSTAR = 3
MULTISURF = 4

NONE = 0
NEAR_HIT = 1
NEAR_MISS = 2
FAR_HIT = 3
FAR_MISS = 4


def set_threads(threads):
    """Set the numba worker count, clamped to the configured maximum.

    Returns the count actually in effect.
    """
    if threads is None:
        return numba.get_num_threads()
    threads = max(1, min(int(threads), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(threads)
    return threads


@njit(cache=True, inline="always")
def cond_index(i, j, n):
    i = np.int64(i)
    j = np.int64(j)
    n = np.int64(n)
    if i > j:
        i, j = j, i
    return n * i - (i * (i + 1)) // 2 + (j - i - 1)


@njit(parallel=True, cache=True)
def pairwise_kernel(X, cont, dist, valid):
    n, a = X.shape
    for i in prange(n - 1):
        base = n * i - (i * (i + 1)) // 2 - i - 1
        for j in range(i + 1, n):
            s = 0.0
            v = 0
            for f in range(a):
                xi = X[i, f]
                xj = X[j, f]
                if math.isnan(xi) or math.isnan(xj):
                    continue
                v += 1
                if cont[f]:
                    s += abs(xi - xj)
                elif xi != xj:
                    s += 1.0
            idx = base + j
            valid[idx] = v
            if v == a:
                dist[idx] = s
            elif v > 0:
                # missing-data comparability rescale
                dist[idx] = s * a / v
            else:
                dist[idx] = np.nan


@njit(cache=True)
def fill_row(dist, n, i, row):
    for j in range(n):
        if j == i:
            row[j] = 0.0
        else:
            row[j] = dist[cond_index(i, j, n)]


@njit(cache=True)
def row_stats(row, i):
    n = row.shape[0]
    s = 0.0
    for j in range(n):
        if j != i:
            s += row[j]
    mean = s / (n - 1)
    q = 0.0
    for j in range(n):
        if j != i:
            dv = row[j] - mean
            q += dv * dv
    return mean, math.sqrt(q / (n - 1))


@njit(parallel=True, cache=True)
def target_stats_kernel(dist, n, means, sds):
    for i in prange(n):
        row = np.empty(n)
        fill_row(dist, n, i, row)
        m, s = row_stats(row, i)
        means[i] = m
        sds[i] = s


@njit(cache=True)
def sequential_mean(values):
    s = 0.0
    for v in values:
        s += v
    return s / values.shape[0]


@njit(cache=True, inline="always")
def is_hit(i, j, ycode, yval, cont_ep, sigma):
    if cont_ep:
        return abs(yval[i] - yval[j]) < sigma
    return ycode[i] == ycode[j]


@njit(cache=True)
def select_roles(i, row, ycode, yval, cont_ep, sigma, variant, k,
                 T, Ti, Si, n_classes, roles):
    """Fill roles[j] with NONE / NEAR_HIT / NEAR_MISS / FAR_HIT / FAR_MISS.

    Returns True if a ReliefF target had fewer than k hits or misses of
    some class available.
    """
    n = row.shape[0]
    for j in range(n):
        roles[j] = NONE
    if variant == RELIEFF:
        order = np.argsort(row, kind="mergesort")
        hits = 0
        per_class = np.zeros(n_classes, np.int64)
        for t in range(n):
            j = order[t]
            if j == i:
                continue
            if is_hit(i, j, ycode, yval, cont_ep, sigma):
                if hits < k:
                    roles[j] = NEAR_HIT
                    hits += 1
            else:
                c = 0 if cont_ep else ycode[j]
                if per_class[c] < k:
                    roles[j] = NEAR_MISS
                    per_class[c] += 1
        short = hits < k
        if cont_ep:
            short = short or per_class[0] < k
        else:
            for c in range(n_classes):
                if c != ycode[i] and per_class[c] < k:
                    short = True
        return short

    if variant == SURF or variant == SURFSTAR:
        near_lim = T
        far_lim = T
    else:
        near_lim = Ti[i] - Si[i] / 2.0
        far_lim = Ti[i] + Si[i] / 2.0
    for j in range(n):
        if j == i:
            continue
        d = row[j]
        hit = is_hit(i, j, ycode, yval, cont_ep, sigma)
        if d < near_lim:
            roles[j] = NEAR_HIT if hit else NEAR_MISS
        elif variant == SURFSTAR or (variant == MULTISURFSTAR and d > far_lim):
            roles[j] = FAR_HIT if hit else FAR_MISS
    return False


@njit(cache=True)
def accumulate(i, roles, X, cont, ycode, cont_ep, n_classes, variant, out,
               hit_pairs, miss_pairs):
    """Per-feature weight contribution of target i given its neighbor roles.

    Hits are normalized by the per-feature count of valid hit pairs; misses
    of class C carry the factor m_C / m and are normalized per class
    (ReliefF) or pooled over classes (threshold variants).
    """
    n, a = X.shape
    nh = np.zeros(a)
    kh = np.zeros(a, np.int64)
    nm = np.zeros((n_classes, a))
    km = np.zeros((n_classes, a), np.int64)
    mc = np.zeros(n_classes, np.int64)
    nfh = np.zeros(a)
    kfh = np.zeros(a, np.int64)
    nfm = np.zeros((n_classes, a))
    kfm = np.zeros((n_classes, a), np.int64)
    fmc = np.zeros(n_classes, np.int64)
    far_same = variant == MULTISURFSTAR

    for j in range(n):
        r = roles[j]
        if r == NONE:
            continue
        c = 0 if cont_ep else ycode[j]
        if r == NEAR_MISS:
            mc[c] += 1
        elif r == FAR_MISS:
            fmc[c] += 1
        for f in range(a):
            xi = X[i, f]
            xj = X[j, f]
            if math.isnan(xi) or math.isnan(xj):
                continue
            if cont[f]:
                d = abs(xi - xj)
            elif xi != xj:
                d = 1.0
            else:
                d = 0.0
            if r == NEAR_HIT:
                nh[f] += d
                kh[f] += 1
            elif r == NEAR_MISS:
                nm[c, f] += d
                km[c, f] += 1
            else:
                if far_same:
                    d = 1.0 - d
                if r == FAR_HIT:
                    nfh[f] += d
                    kfh[f] += 1
                else:
                    nfm[c, f] += d
                    kfm[c, f] += 1

    m = 0
    fm = 0
    for c in range(n_classes):
        m += mc[c]
        fm += fmc[c]
    pooled = variant != RELIEFF
    # far hits: SURF* adds differences, MultiSURF* subtracts sameness;
    # far misses take the opposite sign.
    far_sign = -1.0 if far_same else 1.0

    for f in range(a):
        val = 0.0
        if kh[f] > 0:
            val -= nh[f] / (n * kh[f])
        if m > 0:
            val += _miss_term(nm, km, mc, m, f, n, n_classes, pooled)
        if kfh[f] > 0:
            val += far_sign * (nfh[f] / (n * kfh[f]))
        if fm > 0:
            val -= far_sign * _miss_term(nfm, kfm, fmc, fm, f, n, n_classes, pooled)
        out[f] = val
        hit_pairs[f] = kh[f]
        tot = 0
        for c in range(n_classes):
            tot += km[c, f]
        miss_pairs[f] = tot


@njit(cache=True)
def _miss_term(num, cnt, counts, total, f, n, n_classes, pooled):
    if pooled:
        s = 0.0
        k = 0
        for c in range(n_classes):
            if counts[c] > 0:
                s += (counts[c] / total) * num[c, f]
                k += cnt[c, f]
        if k == 0:
            return 0.0
        return s / (n * k)
    s = 0.0
    for c in range(n_classes):
        if cnt[c, f] > 0:
            s += (counts[c] / total) * num[c, f] / (n * cnt[c, f])
    return s


@njit(parallel=True, cache=True)
def score_kernel(X, cont, dist, ycode, yval, cont_ep, sigma, variant, k,
                 T, Ti, Si, n_classes, out, hit_pairs, miss_pairs, short):
    n = X.shape[0]
    for i in prange(n):
        row = np.empty(n)
        fill_row(dist, n, i, row)
        roles = np.zeros(n, np.int8)
        short[i] = select_roles(i, row, ycode, yval, cont_ep, sigma, variant,
                                k, T, Ti, Si, n_classes, roles)
        accumulate(i, roles, X, cont, ycode, cont_ep, n_classes, variant,
                   out[i], hit_pairs[i], miss_pairs[i])
