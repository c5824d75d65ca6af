"""Datasets: synthetic moons, KDD-style CSV ingestion, encoding, scaling, sampling."""
import logging
import math
from dataclasses import dataclass, field, replace
from enum import IntEnum
from importlib import resources

import numpy as np

from .errors import ParseError, QuotaError, SchemaError, SizeError

log = logging.getLogger(__name__)

GENUINE = "genuine"
ADVERSARIAL = "adversarial"

KINDS = ("numeric", "categorical", "label", "ignore")


class Label(IntEnum):
    NORMAL = 0
    ABNORMAL = 1


@dataclass(frozen=True)
class Feature:
    name: str
    kind: str = "numeric"


@dataclass(frozen=True)
class Schema:
    """Column layout of a delimited traffic file.

    ``columns`` lists every column in file order.  When none of them is of
    kind ``label`` the label sits right after the last declared column and a
    single extra trailing column (NSL-KDD's difficulty score) is tolerated.
    """

    columns: tuple
    delimiter: str = ","
    normal_tags: frozenset = frozenset({"normal"})
    groups: dict = field(default_factory=dict)

    @property
    def features(self):
        return tuple(c for c in self.columns if c.kind in ("numeric", "categorical"))

    @property
    def explicit_label(self):
        return any(c.kind == "label" for c in self.columns)

    def group_of(self, tag):
        tag = clean_tag(tag)
        return self.groups.get(tag, tag.upper())

    def is_normal(self, tag):
        return clean_tag(tag) in self.normal_tags


def clean_tag(tag):
    return str(tag).strip().rstrip(".")


def parse_schema(text):
    columns, groups = [], {}
    delimiter, normal = ",", {"normal"}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "@delimiter":
            delimiter = {"tab": "\t", "comma": ",", "space": " "}.get(parts[1], parts[1])
        elif parts[0] == "@normal":
            normal = set(parts[1:])
        elif parts[0] == "@group":
            for tag in parts[2:]:
                groups[tag] = parts[1]
        elif parts[0].startswith("@"):
            raise ParseError(f"unknown schema directive {parts[0]!r}", lineno)
        else:
            kind = parts[1] if len(parts) > 1 else "numeric"
            if kind not in KINDS or len(parts) > 2:
                raise ParseError(f"bad column declaration {line!r}", lineno)
            columns.append(Feature(parts[0], kind))
    if sum(c.kind == "label" for c in columns) > 1:
        raise SchemaError("schema declares more than one label column")
    return Schema(tuple(columns), delimiter, frozenset(normal), groups)


def load_schema(path):
    with open(path) as fh:
        return parse_schema(fh.read())


def builtin_schema(name):
    """``kdd41`` (KDDCUP99 / NSL-KDD) or ``kyoto`` (Kyoto 2006+)."""
    text = resources.files("bebp.schemas").joinpath(f"{name}.schema").read_text()
    return parse_schema(text)


def numeric_schema(d, prefix="x"):
    return Schema(tuple(Feature(f"{prefix}{i}") for i in range(d)))


@dataclass(frozen=True, eq=False)
class LabeledSample:
    features: np.ndarray
    label: Label
    category: str = ""
    origin: str = GENUINE


@dataclass(frozen=True, eq=False)
class Dataset:
    """Samples stored column-wise.

    ``X`` is float once encoded; freshly loaded files keep an object array
    with strings in categorical columns.  ``y`` is None until labels are
    binarised.
    """

    X: np.ndarray
    y: np.ndarray
    category: np.ndarray
    origin: np.ndarray
    schema: Schema
    provenance: str = ""

    def __len__(self):
        return self.X.shape[0]

    @property
    def dim(self):
        return self.X.shape[1]

    def samples(self):
        for i in range(len(self)):
            label = Label(int(self.y[i])) if self.y is not None else None
            yield LabeledSample(self.X[i], label, str(self.category[i]), str(self.origin[i]))

    def subset(self, index):
        index = np.asarray(index)
        return replace(
            self,
            X=self.X[index],
            y=None if self.y is None else self.y[index],
            category=self.category[index],
            origin=self.origin[index],
        )

    def normal_points(self):
        return self.X[self.y == Label.NORMAL]

    def with_adversarial(self, points, tag="adversarial"):
        """Append ``points`` as Normal-labelled adversarial samples."""
        points = np.asarray(points, dtype=float).reshape(-1, self.dim)
        k = points.shape[0]
        if k == 0:
            return self
        return replace(
            self,
            X=np.vstack([self.X, points]),
            y=np.concatenate([self.y, np.full(k, Label.NORMAL, dtype=np.int8)]),
            category=np.concatenate([self.category, np.full(k, tag, dtype=object)]),
            origin=np.concatenate([self.origin, np.full(k, ADVERSARIAL, dtype=object)]),
        )

    def counts(self):
        return {Label.NORMAL: int(np.sum(self.y == Label.NORMAL)),
                Label.ABNORMAL: int(np.sum(self.y == Label.ABNORMAL))}


def from_arrays(X, y, category=None, schema=None, provenance="arrays"):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    y = np.asarray(y, dtype=np.int8)
    n = X.shape[0]
    if y.shape != (n,):
        raise SchemaError(f"{n} feature rows but {y.shape[0]} labels")
    if category is None:
        category = np.where(y == Label.NORMAL, "normal", "abnormal")
    return Dataset(
        X,
        y,
        np.asarray(category, dtype=object),
        np.full(n, GENUINE, dtype=object),
        schema or numeric_schema(X.shape[1]),
        provenance,
    )


def make_moons(n=100, noise=0.2, seed=0):
    """Two interleaving half circles.

    The upper arc (centre (0, 0)) is Normal, the lower arc (centre (1, 0.5))
    Abnormal; ceil(n/2) Normal points.  Rows are shuffled.
    """
    if n < 2:
        raise SizeError(f"make_moons needs n >= 2, got {n}")
    rng = np.random.default_rng(seed)
    n_normal = math.ceil(n / 2)
    n_abnormal = n // 2
    t_out = np.linspace(0.0, np.pi, n_normal)
    t_in = np.linspace(0.0, np.pi, n_abnormal)
    X = np.vstack([
        np.column_stack([np.cos(t_out), np.sin(t_out)]),
        np.column_stack([1.0 - np.cos(t_in), 0.5 - np.sin(t_in)]),
    ])
    y = np.concatenate([np.zeros(n_normal, np.int8), np.ones(n_abnormal, np.int8)])
    order = rng.permutation(n)
    X, y = X[order], y[order]
    if noise > 0:
        X = X + rng.normal(scale=noise, size=X.shape)
    return from_arrays(X, y, schema=numeric_schema(2), provenance=f"moons(n={n},noise={noise},seed={seed})")


def load_kdd_style(path, schema=None):
    """Parse a delimited traffic file into a raw (unencoded) Dataset.

    Numeric columns become floats, categorical columns stay strings, the
    label column is kept verbatim in ``category``.
    """
    schema = schema or builtin_schema("kdd41")
    cols = schema.columns
    n_decl = len(cols)
    rows, tags = [], []
    with open(path, newline="") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            parts = line.split(schema.delimiter)
            if schema.explicit_label:
                if len(parts) != n_decl:
                    raise ParseError(f"expected {n_decl} fields, found {len(parts)}", lineno)
                label_at = next(i for i, c in enumerate(cols) if c.kind == "label")
            else:
                if len(parts) not in (n_decl + 1, n_decl + 2):
                    raise ParseError(
                        f"expected {n_decl + 1} fields ({n_decl} features + label), found {len(parts)}",
                        lineno,
                    )
                label_at = n_decl
            row = []
            for c, value in zip(cols, parts):
                if c.kind == "numeric":
                    try:
                        row.append(float(value))
                    except ValueError:
                        raise ParseError(f"column {c.name!r}: not a number: {value!r}", lineno) from None
                elif c.kind == "categorical":
                    row.append(value.strip())
            rows.append(row)
            tags.append(parts[label_at].strip())
    n = len(rows)
    X = np.empty((n, len(schema.features)), dtype=object)
    for i, row in enumerate(rows):
        X[i] = row
    return Dataset(
        X,
        None,
        np.asarray(tags, dtype=object),
        np.full(n, GENUINE, dtype=object),
        schema,
        str(path),
    )


def binarize_labels(dataset):
    """Normal tags become Label.NORMAL, every other tag Label.ABNORMAL."""
    schema = dataset.schema
    y = np.array([Label.NORMAL if schema.is_normal(t) else Label.ABNORMAL for t in dataset.category],
                 dtype=np.int8)
    if schema.groups:
        unknown = sorted({clean_tag(t) for t in dataset.category} - set(schema.groups))
        if unknown:
            log.warning("unknown label tags mapped to Abnormal: %s", ", ".join(unknown))
    return replace(dataset, y=y)


@dataclass(frozen=True)
class Encoding:
    """Sorted vocabulary per categorical column (None for numeric columns)."""

    vocabularies: tuple

    def unseen(self, dataset):
        count = 0
        for j, vocab in enumerate(self.vocabularies):
            if vocab is not None:
                known = set(vocab)
                count += sum(v not in known for v in dataset.X[:, j])
        return count


def fit_encoding(train):
    vocabs = []
    for j, feat in enumerate(train.schema.features):
        if feat.kind == "categorical":
            vocabs.append(tuple(sorted({str(v) for v in train.X[:, j]})))
        else:
            vocabs.append(None)
    return Encoding(tuple(vocabs))


def apply_encoding(encoding, dataset):
    """Ordinal-encode categorical columns; unseen values take the largest index."""
    n, d = dataset.X.shape
    if d != len(encoding.vocabularies):
        raise SchemaError(f"dataset has {d} features, encoding expects {len(encoding.vocabularies)}")
    out = np.empty((n, d), dtype=float)
    for j, vocab in enumerate(encoding.vocabularies):
        col = dataset.X[:, j]
        if vocab is None:
            out[:, j] = col.astype(float)
        else:
            lookup = {v: i for i, v in enumerate(vocab)}
            top = len(vocab) - 1
            out[:, j] = [lookup.get(str(v), top) for v in col]
    return replace(dataset, X=out)


@dataclass(frozen=True, eq=False)
class NormalizationParams:
    mins: np.ndarray
    maxs: np.ndarray
    names: tuple = ()

    def write(self, path):
        names = self.names or tuple(f"x{i}" for i in range(len(self.mins)))
        with open(path, "w") as fh:
            for name, lo, hi in zip(names, self.mins, self.maxs):
                fh.write(f"{name},{float(lo)!r},{float(hi)!r}\n")

    @classmethod
    def read(cls, path):
        names, mins, maxs = [], [], []
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                parts = line.strip().split(",")
                if len(parts) != 3:
                    raise ParseError("expected feature,min,max", lineno)
                names.append(parts[0])
                mins.append(float(parts[1]))
                maxs.append(float(parts[2]))
        return cls(np.array(mins), np.array(maxs), tuple(names))


def fit_normalize(train):
    X = np.asarray(train.X, dtype=float)
    return NormalizationParams(X.min(axis=0), X.max(axis=0), tuple(f.name for f in train.schema.features))


def normalize_array(params, X):
    X = np.asarray(X, dtype=float)
    if X.shape[-1] != params.mins.shape[0]:
        raise SchemaError(f"{X.shape[-1]} features, params cover {params.mins.shape[0]}")
    span = params.maxs - params.mins
    safe = np.where(span > 0, span, 1.0)
    out = np.where(span > 0, (X - params.mins) / safe, 0.0)
    return np.clip(out, 0.0, 1.0)


def apply_normalize(params, dataset):
    """Min-max scale into [0, 1] with training extremes; clamps, constants map to 0."""
    return replace(dataset, X=normalize_array(params, dataset.X))


def stratified_sample(dataset, counts, seed=0, group_of=None):
    """Draw ``counts[group]`` rows per group without replacement.

    Groups come from ``group_of(tag)`` (by default the schema's group map).
    Returns ``(selected, remainder)``; both keep the original row order.
    """
    group_of = group_of or dataset.schema.group_of
    groups = np.array([group_of(t) for t in dataset.category], dtype=object)
    rng = np.random.default_rng(seed)
    chosen = []
    for group, want in counts.items():
        pool = np.flatnonzero(groups == group)
        if want > pool.size:
            raise QuotaError(group, want, int(pool.size))
        if want:
            chosen.append(rng.choice(pool, size=want, replace=False))
    picked = np.zeros(len(dataset), dtype=bool)
    if chosen:
        picked[np.concatenate(chosen)] = True
    return dataset.subset(np.flatnonzero(picked)), dataset.subset(np.flatnonzero(~picked))


def write_dataset_csv(dataset, path):
    """Features (repr floats, round-trip exact) then the category tag."""
    with open(path, "w") as fh:
        for row, tag in zip(np.asarray(dataset.X, dtype=float), dataset.category):
            fh.write(",".join(repr(float(v)) for v in row) + f",{tag}\n")


def read_dataset_csv(path, schema=None):
    """Inverse of ``write_dataset_csv``; labels binarised with ``schema``."""
    rows, tags = [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split(",")
            try:
                rows.append([float(v) for v in parts[:-1]])
            except ValueError:
                raise ParseError("non-numeric feature", lineno) from None
            tags.append(parts[-1])
    X = np.array(rows, dtype=float)
    d = X.shape[1] if X.size else 0
    if schema is None or len(schema.features) != d:
        base = schema or Schema(())
        schema = replace(base, columns=tuple(numeric_schema(d).columns))
    ds = Dataset(X, None, np.asarray(tags, dtype=object), np.full(len(rows), GENUINE, dtype=object),
                 schema, str(path))
    return binarize_labels(ds)
