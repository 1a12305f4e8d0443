"""Seeded synthetic benchmark datasets with known ground truth.

Every generator returns a `Simulated` bundle holding the dataset, the
indices of the truly relevant features and a JSON-serializable manifest.
Identical arguments (including the seed) give byte-identical output.

Feature encodings: "binary" features take values {0, 1}; "snp" features
are genotypes {0, 1, 2} drawn under Hardy-Weinberg proportions, i.e.
Binomial(2, maf).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

import numpy as np

from .data import Dataset, write_dataset
from .errors import DataError, SpecError

IRRELEVANT_MAF_RANGE = (0.05, 0.5)

ALL_FEATURES = "all_features"
HALF_FEATURES = "half_features"
ENDPOINT_1_THRESHOLD = "endpoint_1_threshold"
CONTINUOUS_MODES = (ALL_FEATURES, HALF_FEATURES, ENDPOINT_1_THRESHOLD)

# genotype-pair -> class for the impure multi-class model; each row and
# column is non-constant, so both features carry a marginal effect.
MULTICLASS_3_MAP = np.array([[0, 0, 1], [0, 1, 2], [1, 2, 2]])


@dataclass
class Simulated:
    data: Dataset
    relevant: tuple
    manifest: dict = field(default_factory=dict)

    def save(self, path, missing_token="N/A"):
        """Write the dataset to `path` and the manifest to `path.manifest`."""
        path = Path(path)
        write_dataset(self.data, path, missing_token)
        manifest_path(path).write_text(
            json.dumps(self.manifest, indent=2, sort_keys=True) + "\n"
        )
        return path


def manifest_path(data_path):
    data_path = Path(data_path)
    return data_path.with_name(data_path.name + ".manifest")


def _rng(seed, stream=0):
    if seed is None or int(seed) < 0:
        raise SpecError(f"seed must be a non-negative integer, got {seed!r}")
    return np.random.default_rng([int(seed), int(stream)])


def _names(a, prefix="X"):
    return tuple(f"{prefix}{j}" for j in range(a))


def _check_size(n, a, minimum_a=1):
    if n < 2:
        raise SpecError(f"n must be >= 2, got {n}")
    if a < minimum_a:
        raise SpecError(f"a must be >= {minimum_a}, got {a}")


def _snp(rng, n, maf):
    return rng.binomial(2, maf, size=n).astype(np.float64)


def _irrelevant(rng, n, cols, encoding):
    """Fill background features: fair coins for binary, SNPs with a maf
    drawn uniformly per feature otherwise."""
    out = np.empty((n, len(cols)))
    for c in range(len(cols)):
        if encoding == "binary":
            out[:, c] = rng.integers(0, 2, size=n)
        else:
            out[:, c] = _snp(rng, n, rng.uniform(*IRRELEVANT_MAF_RANGE))
    return out


def _pick_relevant(rng, a, count):
    return tuple(sorted(int(j) for j in rng.choice(a, size=count, replace=False)))


def _assemble(rng, n, a, relevant, relevant_cols, encoding):
    X = np.empty((n, a))
    others = [j for j in range(a) if j not in relevant]
    X[:, others] = _irrelevant(rng, n, others, encoding)
    for j, col in zip(relevant, relevant_cols):
        X[:, j] = col
    return X


# ---------------------------------------------------------------------------
# generators


def gen_xor(order, n, a, seed, relevant=None, encoding="binary"):
    """Pure parity model; class 1 iff the relevant values sum to an odd
    number.

    With ``encoding="snp"`` every feature is a genotype; relevant ones use
    maf 0.5, where parity of the genotype sum has no marginal effect.
    """
    if not 2 <= order <= 5:
        raise SpecError(f"xor order must be in [2, 5], got {order}")
    if encoding not in ("snp", "binary"):
        raise SpecError(f"unknown encoding {encoding!r}")
    _check_size(n, a, order)
    rng = _rng(seed)
    rel = tuple(relevant) if relevant is not None else _pick_relevant(rng, a, order)
    if encoding == "binary":
        X = rng.integers(0, 2, size=(n, a)).astype(np.float64)
    else:
        X = _assemble(rng, n, a, rel, [_snp(rng, n, 0.5) for _ in rel], "snp")
    y = X[:, list(rel)].sum(axis=1) % 2
    return Simulated(
        Dataset.from_arrays(X, y, _names(a)),
        rel,
        {"kind": "xor", "order": order, "n": n, "a": a, "encoding": encoding,
         "seed": seed},
    )


def multiplexer_class(bits, address_bits):
    """Class of one multiplexer instance: the register bit selected by the
    big-endian address (first address bit most significant)."""
    addr = 0
    for b in bits[:address_bits]:
        addr = 2 * addr + int(b)
    return int(bits[address_bits + addr])


def gen_multiplexer(address_bits, n, seed):
    if not 1 <= address_bits <= 7:
        raise SpecError(f"address_bits must be in [1, 7], got {address_bits}")
    _check_size(n, 1)
    a = address_bits + 2**address_bits
    rng = _rng(seed)
    X = rng.integers(0, 2, size=(n, a))
    weights = 2 ** np.arange(address_bits - 1, -1, -1)
    addr = X[:, :address_bits] @ weights
    y = X[np.arange(n), address_bits + addr]
    names = _names(address_bits, "A") + _names(2**address_bits, "R")
    return Simulated(
        Dataset.from_arrays(X.astype(np.float64), y.astype(np.float64), names),
        tuple(range(address_bits)),
        {"kind": "multiplexer", "address_bits": address_bits, "n": n, "a": a,
         "seed": seed},
    )


def gen_main_effect(effect_strength, n, a, seed, num_relevant=1,
                    relevance_ratio=None, encoding="snp", maf=0.5):
    """Additive main effect.

    Each relevant feature contributes ``ratio_k * g_k / g_max`` to a case
    probability in [0, 1]; the drawn class is then flipped with probability
    `effect_strength`. With one binary relevant feature and strength 0 the
    class equals the feature.

    Args:
        relevance_ratio: relative influence of the relevant features, e.g.
            (0.75, 0.25); equal shares by default.
        encoding: "snp" (genotypes 0/1/2) or "binary".
    """
    if not 0 <= effect_strength < 0.5:
        raise SpecError(f"effect_strength must be in [0, 0.5), got {effect_strength}")
    if num_relevant < 1:
        raise SpecError("num_relevant must be >= 1")
    if encoding not in ("snp", "binary"):
        raise SpecError(f"unknown encoding {encoding!r}")
    _check_size(n, a, num_relevant)
    if relevance_ratio is None:
        relevance_ratio = [1.0] * num_relevant
    ratio = np.asarray(relevance_ratio, dtype=np.float64)
    if ratio.shape != (num_relevant,) or np.any(ratio < 0) or ratio.sum() <= 0:
        raise SpecError("relevance_ratio needs one nonnegative share per relevant feature")
    ratio = ratio / ratio.sum()

    rng = _rng(seed)
    rel = _pick_relevant(rng, a, num_relevant)
    if encoding == "binary":
        cols = [rng.integers(0, 2, size=n).astype(np.float64) for _ in rel]
        gmax = 1.0
    else:
        cols = [_snp(rng, n, maf) for _ in rel]
        gmax = 2.0
    p = sum(r * c / gmax for r, c in zip(ratio, cols))
    y = (rng.random(n) < p).astype(np.float64)
    flip = rng.random(n) < effect_strength
    y[flip] = 1.0 - y[flip]
    X = _assemble(rng, n, a, rel, cols, encoding)
    return Simulated(
        Dataset.from_arrays(X, y, _names(a)),
        rel,
        {"kind": "main_effect", "effect_strength": effect_strength, "n": n, "a": a,
         "num_relevant": num_relevant, "relevance_ratio": ratio.tolist(),
         "encoding": encoding, "maf": maf, "seed": seed},
    )


@dataclass(frozen=True)
class PenetranceTable:
    """P(case | genotype combination) for k interacting SNPs, shape (3,)*k."""

    probs: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        if p.ndim < 1 or p.shape != (3,) * p.ndim:
            raise SpecError(f"penetrance table must have shape (3,)*k, got {p.shape}")
        if np.any(~np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
            raise SpecError("penetrance probabilities must lie in [0, 1]")
        if len(np.unique(p)) < 2:
            raise SpecError("penetrance table is degenerate (a single probability)")
        object.__setattr__(self, "probs", p)

    @property
    def order(self):
        return self.probs.ndim

    @classmethod
    def builtin(cls, name):
        """``xor2`` / ``xor3``: case iff the genotype sum is odd. Marginals
        are flat at maf 0.5."""
        orders = {"xor2": 2, "xor3": 3}
        if name not in orders:
            raise SpecError(f"unknown penetrance table {name!r}; built-ins: {sorted(orders)}")
        k = orders[name]
        p = np.zeros((3,) * k)
        for g in product(range(3), repeat=k):
            p[g] = sum(g) % 2
        return cls(p, name)

    def with_noise(self, scale):
        """Interpolate toward 0.5: p' = (1 - scale) p + scale / 2."""
        if not 0 <= scale <= 1:
            raise SpecError(f"noise scale must be in [0, 1], got {scale}")
        # full noise is legitimately flat, so skip the degeneracy check
        out = object.__new__(PenetranceTable)
        object.__setattr__(out, "probs", (1.0 - scale) * self.probs + 0.5 * scale)
        object.__setattr__(out, "name", self.name)
        return out

    def genotype_frequencies(self, maf):
        """Joint Hardy-Weinberg frequency of every genotype combination."""
        freq = np.array([(1 - maf) ** 2, 2 * maf * (1 - maf), maf**2])
        out = freq
        for _ in range(self.order - 1):
            out = np.multiply.outer(out, freq)
        return out

    def heritability(self, maf):
        """Share of case/control variance explained by the genotypes:
        sum_g P(g) (p_g - K)^2 / (K (1 - K)), K the prevalence."""
        w = self.genotype_frequencies(maf)
        prevalence = float((w * self.probs).sum())
        if prevalence in (0.0, 1.0):
            return 0.0
        var = float((w * (self.probs - prevalence) ** 2).sum())
        return var / (prevalence * (1 - prevalence))

    def noise_for_heritability(self, target, maf):
        """Noise scale whose interpolated table has the requested
        heritability (bisection; heritability falls monotonically with
        noise)."""
        top = self.heritability(maf)
        if not 0 <= target <= top:
            raise SpecError(f"heritability {target} outside [0, {top:.4g}] for this table")
        lo, hi = 0.0, 1.0
        for _ in range(60):
            mid = (lo + hi) / 2
            if self.with_noise(mid).heritability(maf) > target:
                lo = mid
            else:
                hi = mid
        return (lo + hi) / 2

    def marginals(self, maf):
        """Per-feature marginal penetrance of each single genotype under
        Hardy-Weinberg frequencies; shape (k, 3)."""
        freq = np.array([(1 - maf) ** 2, 2 * maf * (1 - maf), maf**2])
        out = np.empty((self.order, 3))
        for f in range(self.order):
            for g in range(3):
                sub = np.take(self.probs, g, axis=f)
                w = freq
                for _ in range(sub.ndim - 1):
                    w = np.multiply.outer(w, freq)
                out[f, g] = float((sub * w).sum()) if sub.ndim else float(sub)
        return out


def gen_penetrance_epistasis(table, maf, n, a, seed, noise=0.0, relevant=None,
                             heritability=None):
    """SNP data whose class is drawn from a penetrance table.

    Give either a `noise` scale or a target `heritability`, which is
    converted to the equivalent noise scale.
    """
    if isinstance(table, str):
        table = PenetranceTable.builtin(table)
    if not 0 < maf <= 0.5:
        raise SpecError(f"maf must be in (0, 0.5], got {maf}")
    if heritability is not None:
        if noise:
            raise SpecError("give noise or heritability, not both")
        noise = table.noise_for_heritability(heritability, maf)
    _check_size(n, a, table.order)
    tab = table.with_noise(noise) if noise else table
    rng = _rng(seed)
    rel = tuple(relevant) if relevant is not None else _pick_relevant(rng, a, table.order)
    cols = [_snp(rng, n, maf) for _ in rel]
    g = tuple(c.astype(np.intp) for c in cols)
    y = (rng.random(n) < tab.probs[g]).astype(np.float64)
    X = _assemble(rng, n, a, rel, cols, "snp")
    return Simulated(
        Dataset.from_arrays(X, y, _names(a)),
        rel,
        {"kind": "penetrance", "table": table.name, "maf": maf, "noise": noise,
         "heritability": tab.heritability(maf), "n": n, "a": a, "seed": seed},
    )


def _submodel(spec):
    """(order, labeler, encoding) for a heterogeneous sub-model spec."""
    kind = spec.get("kind")
    if kind == "xor":
        order = int(spec.get("order", 2))
        return order, lambda G, rng: G.sum(axis=1) % 2, "binary"
    if kind == "penetrance":
        tab = PenetranceTable.builtin(spec.get("table", "xor2"))
        tab = tab.with_noise(spec.get("noise", 0.0))

        def label(G, rng):
            return (rng.random(len(G)) < tab.probs[tuple(G.T.astype(np.intp))]).astype(float)

        return tab.order, label, "snp"
    raise SpecError(f"heterogeneous sub-models must be xor or penetrance, got {kind!r}")


def gen_heterogeneous(spec_a, spec_b, ratio, n, a, seed, maf=0.5):
    """Two sub-models over disjoint feature slots; the first
    ``round(ratio * n)`` instances are labeled by model A, the rest by B."""
    if not 0 < ratio <= 1:
        raise SpecError(f"ratio must be in (0, 1], got {ratio}")
    oa, label_a, enc_a = _submodel(spec_a)
    ob, label_b, enc_b = _submodel(spec_b)
    _check_size(n, a, oa + ob)
    encoding = "binary" if enc_a == enc_b == "binary" else "snp"
    rng = _rng(seed)
    slots_a = spec_a.get("relevant")
    slots_b = spec_b.get("relevant")
    if slots_a is None or slots_b is None:
        picked = [int(j) for j in rng.choice(a, size=oa + ob, replace=False)]
        slots_a = slots_a or sorted(picked[:oa])
        slots_b = slots_b or sorted(picked[oa:])
    slots_a, slots_b = tuple(slots_a), tuple(slots_b)
    if set(slots_a) & set(slots_b):
        raise SpecError(f"sub-models share relevant slots {sorted(set(slots_a) & set(slots_b))}")
    if len(slots_a) != oa or len(slots_b) != ob:
        raise SpecError("relevant slot count does not match sub-model order")
    if max(slots_a + slots_b) >= a:
        raise SpecError("relevant slot out of range")

    if encoding == "binary":
        X = rng.integers(0, 2, size=(n, a)).astype(np.float64)
    else:
        X = np.empty((n, a))
        model = set(slots_a + slots_b)
        for j in range(a):
            X[:, j] = _snp(rng, n, maf if j in model else rng.uniform(*IRRELEVANT_MAF_RANGE))
    na = int(round(ratio * n))
    y = np.empty(n)
    y[:na] = label_a(X[:na][:, list(slots_a)], rng)
    y[na:] = label_b(X[na:][:, list(slots_b)], rng)
    order = rng.permutation(n)
    rel = tuple(sorted(slots_a)) if na == n else tuple(sorted(slots_a + slots_b))
    return Simulated(
        Dataset.from_arrays(X[order], y[order], _names(a)),
        rel,
        {"kind": "heterogeneous", "spec_a": spec_a, "spec_b": spec_b, "ratio": ratio,
         "n": n, "a": a, "seed": seed},
    )


def gen_multiclass(classes, n, a, seed, maf=0.5, noise=0.0):
    """Two relevant SNPs whose genotype pair fixes the class: the shipped
    3-class map, or ``3*g1 + g2`` for 9 classes. With probability `noise`
    an instance gets a uniformly random class instead."""
    if classes not in (3, 9):
        raise SpecError(f"classes must be 3 or 9, got {classes}")
    if not 0 <= noise <= 1:
        raise SpecError("noise must be in [0, 1]")
    _check_size(n, a, 2)
    rng = _rng(seed)
    rel = _pick_relevant(rng, a, 2)
    g1, g2 = _snp(rng, n, maf), _snp(rng, n, maf)
    i1, i2 = g1.astype(np.intp), g2.astype(np.intp)
    y = MULTICLASS_3_MAP[i1, i2] if classes == 3 else 3 * i1 + i2
    y = y.astype(np.float64)
    swap = rng.random(n) < noise
    y[swap] = rng.integers(0, classes, size=int(swap.sum()))
    X = _assemble(rng, n, a, rel, [g1, g2], "snp")
    return Simulated(
        Dataset.from_arrays(X, y, _names(a)),
        rel,
        {"kind": "multiclass", "classes": classes, "maf": maf, "noise": noise,
         "n": n, "a": a, "seed": seed},
    )


# ---------------------------------------------------------------------------
# transforms


def transform_continuous(data, mode, seed):
    """Replace genotype codes by uniform draws from [0,50) / [50,100) /
    [100,150), on all features or a random half; or map a 0/1 class to a
    uniform endpoint in [0,50) / [50,100)."""
    if mode not in CONTINUOUS_MODES:
        raise SpecError(f"unknown continuous mode {mode!r}; valid: {CONTINUOUS_MODES}")
    rng = _rng(seed, 1)
    if mode == ENDPOINT_1_THRESHOLD:
        y = data.y
        if y.dtype == object or not np.all(np.isin(y, (0.0, 1.0))):
            raise DataError("endpoint threshold transform needs a 0/1 class endpoint")
        return data.with_values(y=50.0 * y + rng.uniform(0, 50, size=data.n))
    cols = list(range(data.a))
    if mode == HALF_FEATURES:
        cols = sorted(int(j) for j in rng.choice(data.a, size=data.a // 2, replace=False))
    X = np.array(data.X, copy=True)
    for j in cols:
        col = X[:, j]
        ok = ~np.isnan(col)
        if not np.all(np.isin(col[ok], (0.0, 1.0, 2.0))):
            raise DataError(f"feature {data.feature_names[j]} is not genotype-coded")
        col[ok] = 50.0 * col[ok] + rng.uniform(0, 50, size=int(ok.sum()))
    return data.with_values(X=X)


def inject_missing(data, freq, seed):
    """Blank each feature cell independently with probability `freq`."""
    if not 0 <= freq < 1:
        raise SpecError(f"missing frequency must be in [0, 1), got {freq}")
    if freq == 0:
        return data
    rng = _rng(seed, 2)
    X = np.array(data.X, copy=True)
    X[rng.random(X.shape) < freq] = np.nan
    return data.with_values(X=X)


def rebalance(data, majority_fraction, seed):
    """Resample a binary-endpoint dataset to the given majority-class share
    at constant n.

    Each class is sampled without replacement when it has enough rows and
    topped up with replacement otherwise. The more frequent class (ties:
    first sorted label) becomes the majority.
    """
    labels, counts = np.unique(data.y, return_counts=True)
    if len(labels) != 2:
        raise SpecError("rebalance needs a binary endpoint")
    if not 0.5 <= majority_fraction < 1:
        raise SpecError(f"majority_fraction must be in [0.5, 1), got {majority_fraction}")
    n = data.n
    n_major = int(round(majority_fraction * n))
    n_minor = n - n_major
    if n_minor < 1:
        raise SpecError(f"majority_fraction {majority_fraction} leaves no minority rows at n={n}")
    major = labels[int(np.argmax(counts))]
    rng = _rng(seed, 3)
    rows = []
    for lab, want in ((major, n_major), (labels[labels != major][0], n_minor)):
        pool = np.flatnonzero(data.y == lab)
        if want <= len(pool):
            rows.append(rng.choice(pool, size=want, replace=False))
        else:
            extra = rng.choice(pool, size=want - len(pool), replace=True)
            rows.append(np.concatenate([pool, extra]))
    rows = np.concatenate(rows)
    return data.take(rows[rng.permutation(n)])


# ---------------------------------------------------------------------------
# spec files

GENERATOR_KINDS = ("xor", "multiplexer", "main_effect", "penetrance",
                   "heterogeneous", "multiclass")
TRANSFORM_KINDS = ("continuous", "missing", "rebalance")


def _take(params, keys, kind):
    extra = set(params) - set(keys)
    if extra:
        raise SpecError(f"unexpected parameters for {kind}: {sorted(extra)}")
    return params


def generate(spec, seed):
    """Build a dataset from a spec mapping such as
    ``{"kind": "xor", "order": 2, "n": 1600, "a": 20,
    "transforms": [{"kind": "missing", "freq": 0.1}]}``."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise SpecError("generator spec must be an object with a 'kind'")
    params = {k: v for k, v in spec.items() if k not in ("kind", "transforms", "name")}
    kind = spec["kind"]
    try:
        if kind == "xor":
            sim = gen_xor(seed=seed, **_take(params, ("order", "n", "a", "relevant",
                                                      "encoding"), kind))
        elif kind == "multiplexer":
            sim = gen_multiplexer(seed=seed, **_take(params, ("address_bits", "n"), kind))
        elif kind == "main_effect":
            sim = gen_main_effect(seed=seed, **_take(params, (
                "effect_strength", "n", "a", "num_relevant", "relevance_ratio",
                "encoding", "maf"), kind))
        elif kind == "penetrance":
            sim = gen_penetrance_epistasis(seed=seed, **_take(params, (
                "table", "maf", "n", "a", "noise", "relevant", "heritability"), kind))
        elif kind == "heterogeneous":
            sim = gen_heterogeneous(seed=seed, **_take(params, (
                "spec_a", "spec_b", "ratio", "n", "a", "maf"), kind))
        elif kind == "multiclass":
            sim = gen_multiclass(seed=seed, **_take(params, (
                "classes", "n", "a", "maf", "noise"), kind))
        else:
            raise SpecError(f"unknown generator {kind!r}; valid: {GENERATOR_KINDS}")
    except TypeError as exc:
        raise SpecError(f"bad parameters for {kind}: {exc}") from None

    data = sim.data
    applied = []
    for t in spec.get("transforms", []):
        tk = t.get("kind")
        if tk == "continuous":
            data = transform_continuous(data, t.get("mode", ALL_FEATURES), seed)
        elif tk == "missing":
            data = inject_missing(data, float(t["freq"]), seed)
        elif tk == "rebalance":
            data = rebalance(data, float(t["majority_fraction"]), seed)
        else:
            raise SpecError(f"unknown transform {tk!r}; valid: {TRANSFORM_KINDS}")
        applied.append(dict(t))
    manifest = dict(sim.manifest)
    manifest.update(
        spec=spec,
        seed=int(seed),
        transforms=applied,
        relevant=list(sim.relevant),
        relevant_names=[data.feature_names[j] for j in sim.relevant],
        feature_names=list(data.feature_names),
    )
    return Simulated(data, sim.relevant, manifest)


def load_spec(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: invalid JSON ({exc})") from None


def replicate_seed(seed, replicate):
    """Independent 63-bit seed for replicate `replicate` of a run."""
    ss = np.random.SeedSequence([int(seed), int(replicate)])
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def expected_missing(n, a, freq):
    """Mean and standard deviation of the injected missing-cell count."""
    cells = n * a
    return cells * freq, math.sqrt(cells * freq * (1 - freq))
