"""scikit-learn compatible wrappers around the scoring engine."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted, validate_data

from .data import DEFAULT_DISCRETE_CUTOFF, Dataset, prepare
from .filters import run_filter
from .relief import NeighborSpec, score


class _ReliefBase(TransformerMixin, BaseEstimator):
    """Shared fit/transform logic.

    Subclasses define ``_spec()``, returning a NeighborSpec or filter name.
    After `fit`, ``feature_importances_`` holds one weight per column and
    ``top_features_`` the column indices by descending weight (ties by
    index).
    """

    def _spec(self):
        raise NotImplementedError

    def fit(self, X, y):
        X, y = validate_data(self, X, y, ensure_all_finite="allow-nan",
                             dtype=np.float64, y_numeric=False)
        names = getattr(self, "feature_names_in_", None)
        data = Dataset.from_arrays(X, y, None if names is None else list(names))
        norm, summary = prepare(data, self.discrete_cutoff)
        spec = self._spec()
        if isinstance(spec, NeighborSpec):
            w = score(norm, summary, spec, threads=getattr(self, "n_jobs", None))
        else:
            w = run_filter(spec, norm, summary)
        self.feature_importances_ = w.weights
        self.top_features_ = np.argsort(-w.weights, kind="stable")
        self.summary_ = summary
        return self

    def _n_selected(self):
        k = self.n_features_to_select
        if k is None:
            return self.n_features_in_
        if not 1 <= k <= self.n_features_in_:
            raise ValueError(
                f"n_features_to_select={k} out of range for {self.n_features_in_} features"
            )
        return k

    def transform(self, X):
        check_is_fitted(self, "feature_importances_")
        X = validate_data(self, X, reset=False, ensure_all_finite="allow-nan",
                          dtype=np.float64)
        return X[:, self.top_features_[: self._n_selected()]]

    def __sklearn_tags__(self):
        tags = super().__sklearn_tags__()
        tags.input_tags.allow_nan = True
        tags.target_tags.required = True
        return tags


class ReliefF(_ReliefBase):
    """ReliefF with a fixed neighbor count, or a fraction of n when
    `n_neighbors` is a float in (0, 1]."""

    def __init__(self, n_neighbors=10, n_features_to_select=None,
                 discrete_cutoff=DEFAULT_DISCRETE_CUTOFF, n_jobs=None):
        self.n_neighbors = n_neighbors
        self.n_features_to_select = n_features_to_select
        self.discrete_cutoff = discrete_cutoff
        self.n_jobs = n_jobs

    def _spec(self):
        k = self.n_neighbors
        if isinstance(k, float) and 0 < k <= 1:
            return NeighborSpec("relieff", pct=k)
        return NeighborSpec("relieff", k=int(k))


class _ThresholdRelief(_ReliefBase):
    variant = ""

    def __init__(self, n_features_to_select=None,
                 discrete_cutoff=DEFAULT_DISCRETE_CUTOFF, n_jobs=None):
        self.n_features_to_select = n_features_to_select
        self.discrete_cutoff = discrete_cutoff
        self.n_jobs = n_jobs

    def _spec(self):
        return NeighborSpec(self.variant)


class SURF(_ThresholdRelief):
    variant = "surf"


class SURFstar(_ThresholdRelief):
    variant = "surfstar"


class MultiSURFstar(_ThresholdRelief):
    variant = "multisurfstar"


class MultiSURF(_ThresholdRelief):
    variant = "multisurf"


class MyopicFilter(_ReliefBase):
    """Univariate baseline: ``method`` is ``chi2``, ``anova_f`` or
    ``mutual_info``."""

    def __init__(self, method="chi2", bins=10, n_features_to_select=None,
                 discrete_cutoff=DEFAULT_DISCRETE_CUTOFF):
        self.method = method
        self.bins = bins
        self.n_features_to_select = n_features_to_select
        self.discrete_cutoff = discrete_cutoff

    def _spec(self):
        if self.method not in ("chi2", "anova_f", "mutual_info"):
            raise ValueError(f"unknown filter method {self.method!r}")
        if self.method == "mutual_info":
            return f"mutual_info:bins={int(self.bins)}"
        return self.method
