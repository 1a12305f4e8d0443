"""Myopic univariate filters: Pearson chi-square, one-way ANOVA F and
plug-in mutual information.

Each returns a WeightVector of raw statistics (no p-values); only the
ranking matters downstream. Rows with a missing value are dropped per
feature.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotApplicableError
from .relief import WeightVector

DEFAULT_BINS = 10


@dataclass(frozen=True)
class ContingencyTable:
    """Feature level x class counts."""

    counts: np.ndarray

    def __post_init__(self):
        if self.counts.sum() <= 0:
            raise ValueError("contingency table is empty")

    @classmethod
    def from_codes(cls, feature_codes, class_codes, n_levels=None, n_classes=None):
        r = n_levels or int(feature_codes.max()) + 1
        c = n_classes or int(class_codes.max()) + 1
        counts = np.zeros((r, c), dtype=np.int64)
        np.add.at(counts, (feature_codes, class_codes), 1)
        return cls(counts)

    def chi_square(self):
        obs = self.counts.astype(np.float64)
        obs = obs[obs.sum(axis=1) > 0][:, obs.sum(axis=0) > 0]
        total = obs.sum()
        expected = np.outer(obs.sum(axis=1), obs.sum(axis=0)) / total
        return float(((obs - expected) ** 2 / expected).sum())

    def mutual_information(self):
        """Plug-in estimate in nats."""
        p = self.counts / self.counts.sum()
        pr = p.sum(axis=1, keepdims=True)
        pc = p.sum(axis=0, keepdims=True)
        nz = p > 0
        return float((p[nz] * np.log(p[nz] / (pr @ pc)[nz])).sum())


def _require_discrete_endpoint(summary, method):
    if summary.endpoint_kind.is_continuous:
        raise NotApplicableError(f"{method} is not applicable to a continuous endpoint")


def discretize(col, continuous, bins=DEFAULT_BINS):
    """Integer level codes for the observed values of one column.

    Continuous columns get equal-width bins over their observed range; the
    maximum falls into the last bin.
    """
    if continuous:
        lo, hi = col.min(), col.max()
        if hi == lo:
            return np.zeros(col.shape, dtype=np.int64)
        codes = np.floor((col - lo) / (hi - lo) * bins).astype(np.int64)
        return np.minimum(codes, bins - 1)
    _, codes = np.unique(col, return_inverse=True)
    return codes.astype(np.int64)


def _tables(data, summary, bins):
    classes = summary.class_codes(data.y)
    n_classes = summary.endpoint_kind.n_classes
    cont = summary.continuous_mask
    for j in range(data.a):
        col = data.X[:, j]
        ok = ~np.isnan(col)
        if not ok.any():
            yield None
            continue
        codes = discretize(col[ok], cont[j], bins)
        yield ContingencyTable.from_codes(codes, classes[ok], n_classes=n_classes)


def _vector(data, scores):
    a = data.a
    return WeightVector(np.asarray(scores, dtype=np.float64),
                        np.zeros(a, np.int64), np.zeros(a, np.int64),
                        data.feature_names)


def chi_square_scores(data, summary, bins=DEFAULT_BINS):
    """Pearson chi-square statistic of each feature against class."""
    _require_discrete_endpoint(summary, "chi-square")
    return _vector(data, [0.0 if t is None else t.chi_square()
                          for t in _tables(data, summary, bins)])


def mutual_info_scores(data, summary, bins=DEFAULT_BINS):
    _require_discrete_endpoint(summary, "mutual information")
    return _vector(data, [0.0 if t is None else t.mutual_information()
                          for t in _tables(data, summary, bins)])


def f_statistic(values, groups):
    """One-way ANOVA F. Returns +inf when groups separate perfectly
    (zero within-group variance, nonzero between-group variance) and 0
    when both variances are zero."""
    labels = np.unique(groups)
    k = len(labels)
    n = len(values)
    if k < 2 or n <= k:
        return 0.0
    grand = values.mean()
    ss_between = 0.0
    ss_within = 0.0
    for g in labels:
        v = values[groups == g]
        mu = v.mean()
        ss_between += len(v) * (mu - grand) ** 2
        ss_within += ((v - mu) ** 2).sum()
    if ss_within == 0.0:
        return float("inf") if ss_between > 0.0 else 0.0
    return float((ss_between / (k - 1)) / (ss_within / (n - k)))


def anova_f_scores(data, summary):
    _require_discrete_endpoint(summary, "ANOVA F")
    classes = summary.class_codes(data.y)
    scores = []
    for j in range(data.a):
        col = data.X[:, j]
        ok = ~np.isnan(col)
        scores.append(f_statistic(col[ok], classes[ok]))
    return _vector(data, scores)


FILTERS = {
    "chi2": chi_square_scores,
    "anova_f": anova_f_scores,
    "mutual_info": mutual_info_scores,
}


def run_filter(name, data, summary):
    """Dispatch ``chi2`` / ``anova_f`` / ``mutual_info[:bins=B]``."""
    base, _, rest = name.partition(":")
    if base == "mutual_info" and rest:
        return mutual_info_scores(data, summary, bins=int(rest.split("=")[1]))
    return FILTERS[base](data, summary)
