"""Dataset container, delimited-text loading, type profiling and min-max
pre-normalization.

Missing cells are stored as NaN in a float64 feature matrix. Categorical
(non-numeric) feature columns are label-encoded to integer codes on load.
"""
from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, DataError, ParseError

DEFAULT_MISSING_TOKEN = "N/A"
DEFAULT_ENDPOINT = "Class"
DEFAULT_DISCRETE_CUTOFF = 10

DISCRETE = "discrete"
CONTINUOUS = "continuous"
BINARY = "binary"
MULTICLASS = "multiclass"


def _readonly(arr):
    arr = np.array(arr, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Dataset:
    """Instance-major feature table plus endpoint vector.

    Attributes:
        feature_names: tuple of a column names.
        X: (n, a) float64 array, NaN marks a MISSING cell.
        y: (n,) endpoint, float64 for numeric endpoints, otherwise an
            object array of string labels. Never missing.
        endpoint_name: header name of the endpoint column.
        categories: feature index -> tuple of labels, for columns that were
            label-encoded on load.
    """

    feature_names: tuple
    X: np.ndarray
    y: np.ndarray
    endpoint_name: str = DEFAULT_ENDPOINT
    categories: dict = field(default_factory=dict)

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        if X.ndim != 2:
            raise DataError(f"feature table must be 2-D, got shape {X.shape}")
        n, a = X.shape
        if n < 2:
            raise DataError(f"need at least 2 instances, got {n}")
        if a < 1:
            raise DataError("need at least 1 feature")
        y = np.asarray(self.y)
        if y.dtype.kind in "biuf":
            y = y.astype(np.float64)
            if np.isnan(y).any():
                raise DataError("endpoint contains missing values")
        else:
            y = y.astype(str).astype(object)
        if y.shape != (n,):
            raise DataError(f"endpoint length {y.shape} does not match {n} rows")
        names = tuple(str(s) for s in self.feature_names)
        if len(names) != a:
            raise DataError(f"{len(names)} feature names for {a} columns")
        object.__setattr__(self, "X", _readonly(X))
        object.__setattr__(self, "y", _readonly(y))
        object.__setattr__(self, "feature_names", names)

    @classmethod
    def from_arrays(cls, X, y, feature_names=None, endpoint_name=DEFAULT_ENDPOINT):
        X = np.asarray(X, dtype=np.float64)
        if feature_names is None:
            feature_names = [f"X{j}" for j in range(X.shape[1])]
        return cls(tuple(feature_names), X, np.asarray(y), endpoint_name)

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def a(self):
        return self.X.shape[1]

    @property
    def has_missing(self):
        return bool(np.isnan(self.X).any())

    def with_values(self, X=None, y=None):
        """Copy with replaced feature table and/or endpoint."""
        return replace(
            self,
            X=self.X if X is None else X,
            y=self.y if y is None else y,
        )

    def take(self, rows):
        """Row subset / resample, preserving column metadata."""
        rows = np.asarray(rows, dtype=np.intp)
        return replace(self, X=self.X[rows], y=self.y[rows])


@dataclass(frozen=True)
class FeatureKind:
    kind: str
    observed_min: float = float("nan")
    observed_max: float = float("nan")
    constant: bool = False

    @property
    def is_continuous(self):
        return self.kind == CONTINUOUS


@dataclass(frozen=True)
class EndpointKind:
    """Binary, multi-class (>= 3 labels) or continuous endpoint."""

    kind: str
    class_labels: tuple = ()
    class_counts: tuple = ()
    sigma: float = float("nan")
    observed_min: float = float("nan")
    observed_max: float = float("nan")

    @property
    def is_continuous(self):
        return self.kind == CONTINUOUS

    @property
    def n_classes(self):
        return len(self.class_labels)


@dataclass(frozen=True)
class DataSummary:
    feature_kinds: tuple
    endpoint_kind: EndpointKind
    has_missing: bool
    missing_token: str = DEFAULT_MISSING_TOKEN
    discrete_cutoff: int = DEFAULT_DISCRETE_CUTOFF

    @property
    def continuous_mask(self):
        return np.array([fk.is_continuous for fk in self.feature_kinds], dtype=bool)

    @property
    def constant_features(self):
        return tuple(j for j, fk in enumerate(self.feature_kinds) if fk.constant)

    def class_codes(self, y):
        """Map endpoint labels onto 0..c-1 in class_labels order."""
        lookup = {lab: i for i, lab in enumerate(self.endpoint_kind.class_labels)}
        try:
            return np.array([lookup[v] for v in y.tolist()], dtype=np.int64)
        except KeyError as exc:
            raise DataError(f"unknown class label {exc.args[0]!r}") from None


# ---------------------------------------------------------------------------
# loading


def _parse_number(cell):
    try:
        return float(cell)
    except ValueError:
        return None


def load_dataset(
    source,
    endpoint_column=DEFAULT_ENDPOINT,
    missing_token=DEFAULT_MISSING_TOKEN,
    delimiter=None,
):
    """Read a delimited text table with a header row.

    `source` is a path or an open text stream. The delimiter is taken from
    the header line (tab if present, else comma) unless given.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="") as fh:
            text = fh.read()
    else:
        text = source.read()
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise ParseError("missing header row", line=1)
    if delimiter is None:
        delimiter = "\t" if "\t" in lines[0] else ","
    reader = csv.reader(io.StringIO(text), delimiter=delimiter)
    header = [h.strip() for h in next(reader)]
    if endpoint_column not in header:
        raise ConfigError(
            f"endpoint column {endpoint_column!r} not found in header {header}"
        )
    width = len(header)
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != width:
            raise ParseError(f"expected {width} fields, found {len(row)}", line=lineno)
        cells = [c.strip() for c in row]
        for c in cells:
            if c == "":
                raise ParseError("empty cell", line=lineno)
        rows.append((lineno, cells))
    if not rows:
        raise DataError("no data rows")

    ep = header.index(endpoint_column)
    feat_cols = [j for j in range(width) if j != ep]
    n = len(rows)

    yraw = []
    for lineno, cells in rows:
        if cells[ep] == missing_token:
            raise DataError(f"line {lineno}: missing value in endpoint column")
        yraw.append(cells[ep])
    ynum = [_parse_number(v) for v in yraw]
    if all(v is not None for v in ynum):
        y = np.array(ynum, dtype=np.float64)
    else:
        y = np.array(yraw, dtype=object)

    X = np.empty((n, len(feat_cols)), dtype=np.float64)
    categories = {}
    for out_j, j in enumerate(feat_cols):
        col = [cells[j] for _, cells in rows]
        nums = [None if c == missing_token else _parse_number(c) for c in col]
        if all(v is not None or c == missing_token for v, c in zip(nums, col)):
            X[:, out_j] = [np.nan if v is None else v for v in nums]
        else:
            labels = sorted({c for c in col if c != missing_token})
            code = {lab: float(i) for i, lab in enumerate(labels)}
            X[:, out_j] = [np.nan if c == missing_token else code[c] for c in col]
            categories[out_j] = tuple(labels)
    names = tuple(header[j] for j in feat_cols)
    return Dataset(names, X, y, endpoint_column, categories)


def write_dataset(data, dest, missing_token=DEFAULT_MISSING_TOKEN, delimiter="\t"):
    """Write `data` in the format `load_dataset` reads. `dest` is a path or
    text stream."""

    def fmt(v):
        if isinstance(v, str):
            return v
        if np.isnan(v):
            return missing_token
        if float(v).is_integer():
            return str(int(v))
        return repr(float(v))

    close = False
    if isinstance(dest, (str, os.PathLike)):
        dest = open(dest, "w", newline="")
        close = True
    try:
        writer = csv.writer(dest, delimiter=delimiter, lineterminator="\n")
        writer.writerow(list(data.feature_names) + [data.endpoint_name])
        for i in range(data.n):
            cells = []
            for j in range(data.a):
                v = data.X[i, j]
                if j in data.categories and not np.isnan(v):
                    cells.append(data.categories[j][int(v)])
                else:
                    cells.append(fmt(v))
            cells.append(fmt(data.y[i]))
            writer.writerow(cells)
    finally:
        if close:
            dest.close()


# ---------------------------------------------------------------------------
# profiling


def _is_discrete(values, cutoff):
    distinct = np.unique(values)
    if len(distinct) > cutoff:
        return False
    return bool(np.all(distinct == np.round(distinct)))


def profile(data, discrete_cutoff=DEFAULT_DISCRETE_CUTOFF):
    """Classify every feature and the endpoint as discrete or continuous.

    A numeric column is discrete iff it has at most `discrete_cutoff`
    distinct non-missing values and all of them are integral. Label-encoded
    columns are always discrete. Constant columns are kept, flagged and
    treated as discrete.
    """
    if discrete_cutoff < 1:
        raise ConfigError("discrete_cutoff must be a positive integer")
    kinds = []
    for j in range(data.a):
        col = data.X[:, j]
        col = col[~np.isnan(col)]
        if col.size == 0 or np.all(col == col[0]):
            kinds.append(FeatureKind(DISCRETE, constant=True))
        elif j in data.categories or _is_discrete(col, discrete_cutoff):
            kinds.append(FeatureKind(DISCRETE))
        else:
            kinds.append(FeatureKind(CONTINUOUS, float(col.min()), float(col.max())))

    y = data.y
    labels = np.unique(y)
    if len(labels) < 2:
        raise DataError("endpoint is constant")
    if y.dtype == object or _is_discrete(y, discrete_cutoff):
        counts = tuple(int(np.sum(y == lab)) for lab in labels)
        kind = BINARY if len(labels) == 2 else MULTICLASS
        labs = tuple(lab if isinstance(lab, str) else float(lab) for lab in labels)
        ek = EndpointKind(kind, labs, counts)
    else:
        ek = EndpointKind(
            CONTINUOUS,
            sigma=float(np.std(y)),
            observed_min=float(y.min()),
            observed_max=float(y.max()),
        )
    return DataSummary(
        tuple(kinds), ek, data.has_missing, discrete_cutoff=discrete_cutoff
    )


def normalize(data, summary):
    """Rescale continuous features (and a continuous endpoint) to [0, 1]."""
    X = np.array(data.X, copy=True)
    for j, fk in enumerate(summary.feature_kinds):
        if fk.is_continuous:
            X[:, j] = (X[:, j] - fk.observed_min) / (fk.observed_max - fk.observed_min)
    y = data.y
    ek = summary.endpoint_kind
    if ek.is_continuous:
        y = (y - ek.observed_min) / (ek.observed_max - ek.observed_min)
    return data.with_values(X=X, y=y)


def normalized_summary(summary, normalized):
    """Summary describing `normalized` (the output of `normalize`), keeping
    the original discrete/continuous decisions."""
    kinds = tuple(
        replace(fk, observed_min=0.0, observed_max=1.0) if fk.is_continuous else fk
        for fk in summary.feature_kinds
    )
    ek = summary.endpoint_kind
    if ek.is_continuous:
        ek = replace(
            ek, sigma=float(np.std(normalized.y)), observed_min=0.0, observed_max=1.0
        )
    return replace(summary, feature_kinds=kinds, endpoint_kind=ek)


def prepare(data, discrete_cutoff=DEFAULT_DISCRETE_CUTOFF, summary=None):
    """Profile and normalize in one step; returns (normalized data, summary)."""
    if summary is None:
        summary = profile(data, discrete_cutoff)
    norm = normalize(data, summary)
    return norm, normalized_summary(summary, norm)
