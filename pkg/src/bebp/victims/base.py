"""Victim specifications, fitted models, the label oracle and model persistence."""
import dataclasses
import threading
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..data import Label
from ..errors import ConfigError, DegenerateTrainingError, ParseError, SchemaError
from .kernels import KERNELS

FAMILIES = ("GaussianNB", "LogReg", "SVM", "LSSVM")


@dataclass(frozen=True)
class VictimSpec:
    family: str
    kernel: Optional[str] = None
    C: float = 1.0
    gamma: Optional[float] = None  # None -> 1 / n_features
    degree: int = 3
    coef0: float = 0.0
    tol: Optional[float] = None  # None -> family default
    max_iter: Optional[int] = None  # LogReg iterations / SVM passes
    var_smoothing: float = 1e-9
    lssvm_reg: float = 1.0
    feature_selection: Optional[int] = None
    max_rows: int = 8000
    name: str = ""

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown victim family {self.family!r}; expected one of {FAMILIES}")
        kernelled = self.family in ("SVM", "LSSVM")
        if kernelled and self.kernel not in KERNELS:
            raise ConfigError(f"{self.family} needs a kernel from {KERNELS}, got {self.kernel!r}")
        if not kernelled and self.kernel is not None:
            raise ConfigError(f"{self.family} takes no kernel")
        if self.family == "LSSVM" and self.kernel != "rbf":
            raise ConfigError("LSSVM victim supports the rbf kernel only")
        for attr in ("C", "var_smoothing", "lssvm_reg"):
            if getattr(self, attr) <= 0:
                raise ConfigError(f"{attr} must be positive")
        if self.gamma is not None and self.gamma <= 0:
            raise ConfigError("gamma must be positive")
        if self.degree < 1:
            raise ConfigError("degree must be >= 1")
        if self.tol is not None and self.tol <= 0:
            raise ConfigError("tol must be positive")
        if self.max_iter is not None and self.max_iter < 1:
            raise ConfigError("max_iter must be >= 1")
        if self.feature_selection is not None and self.feature_selection < 1:
            raise ConfigError("feature_selection must be >= 1")

    @property
    def label(self):
        if self.name:
            return self.name
        return f"{self.family}-{self.kernel}" if self.kernel else self.family


PRESETS = {
    "NB": VictimSpec("GaussianNB", name="NB"),
    "LR": VictimSpec("LogReg", name="LR"),
    "SVM-sigmoid": VictimSpec("SVM", "sigmoid", name="SVM-sigmoid"),
    "SVM-POLY": VictimSpec("SVM", "poly", name="SVM-POLY"),
    "SVM-RBF": VictimSpec("SVM", "rbf", name="SVM-RBF"),
    "SVM-linear": VictimSpec("SVM", "linear", name="SVM-linear"),
    "LSSVM-MI": VictimSpec("LSSVM", "rbf", feature_selection=18, name="LSSVM-MI"),
}
STANDARD_SIX = ("NB", "LR", "SVM-sigmoid", "SVM-POLY", "SVM-RBF", "SVM-linear")


def preset(name, **overrides):
    for key, spec in PRESETS.items():
        if key.lower() == name.lower():
            return dataclasses.replace(spec, **overrides) if overrides else spec
    raise ConfigError(f"unknown victim {name!r}; known: {', '.join(PRESETS)}")


@dataclass(frozen=True, eq=False)
class FittedModel:
    n_features: int

    family = ""
    converged = True

    def decision_function(self, X):
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class GaussianNBModel(FittedModel):
    means: np.ndarray = None
    variances: np.ndarray = None
    priors: np.ndarray = None
    family = "GaussianNB"

    def decision_function(self, X):
        from .naive_bayes import nb_decision
        return nb_decision(self, X)


@dataclass(frozen=True, eq=False)
class LogRegModel(FittedModel):
    weights: np.ndarray = None
    bias: float = 0.0
    C: float = 1.0
    converged: bool = True
    n_iter: int = 0
    family = "LogReg"

    def decision_function(self, X):
        return X @ self.weights + self.bias


@dataclass(frozen=True, eq=False)
class SVMModel(FittedModel):
    support_vectors: np.ndarray = None
    dual_coef: np.ndarray = None
    rho: float = 0.0
    kernel: str = "rbf"
    gamma: float = 1.0
    degree: int = 3
    coef0: float = 0.0
    converged: bool = True
    n_iter: int = 0
    family = "SVM"

    def decision_function(self, X):
        from .svm import svm_decision
        return svm_decision(self, X)


@dataclass(frozen=True, eq=False)
class LSSVMModel(FittedModel):
    train_points: np.ndarray = None
    dual_coef: np.ndarray = None
    bias: float = 0.0
    gamma: float = 1.0
    reg: float = 1.0
    feature_mask: np.ndarray = None
    family = "LSSVM"

    def decision_function(self, X):
        from .lssvm import lssvm_decision
        return lssvm_decision(self, X)


MODEL_TYPES = {cls.family: cls for cls in (GaussianNBModel, LogRegModel, SVMModel, LSSVMModel)}


def _check_two_class(y):
    present = set(np.unique(np.asarray(y)).tolist())
    if present != {0, 1}:
        raise DegenerateTrainingError(f"training data needs both labels, found {sorted(present)}")


def fit(spec, train, seed=0):
    """Train the victim described by ``spec`` on a normalised Dataset (or ``(X, y)``)."""
    if isinstance(train, tuple):
        X, y = train
    else:
        X, y = train.X, train.y
    X = np.asarray(X, dtype=float)
    y = np.asarray(y).astype(np.int8)
    if X.ndim != 2 or X.shape[0] == 0:
        raise SchemaError("training data must be a non-empty (n, d) array")
    _check_two_class(y)
    if spec.family == "GaussianNB":
        from .naive_bayes import fit_gaussian_nb
        return fit_gaussian_nb(X, y, spec.var_smoothing)
    if spec.family == "LogReg":
        from .logistic import fit_logreg
        return fit_logreg(X, y, C=spec.C, tol=spec.tol or 1e-4, max_iter=spec.max_iter or 1000)
    if spec.family == "SVM":
        from .svm import fit_svm
        return fit_svm(X, y, kernel=spec.kernel, C=spec.C, gamma=spec.gamma, degree=spec.degree,
                       coef0=spec.coef0, tol=spec.tol or 1e-3, max_passes=spec.max_iter or 200)
    from .feature_selection import mi_feature_select
    from .lssvm import fit_lssvm
    mask = None
    if spec.feature_selection is not None:
        mask = mi_feature_select(X, y, spec.feature_selection)
    return fit_lssvm(X, y, reg=spec.lssvm_reg, gamma=spec.gamma, mask=mask,
                     max_rows=spec.max_rows, seed=seed)


def _as_rows(model, x):
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.shape[1] != model.n_features:
        raise SchemaError(f"model expects {model.n_features} features, got {X.shape[1]}")
    return X, single


def decision_value(model, x):
    """Signed discriminant; positive means Abnormal.  Accepts one vector or a matrix."""
    X, single = _as_rows(model, x)
    v = model.decision_function(X)
    return float(v[0]) if single else v


def predict(model, x):
    """Label(s) by the sign of the decision value; exactly 0 is Normal."""
    X, single = _as_rows(model, x)
    labels = (model.decision_function(X) > 0).astype(np.int8)
    return Label(int(labels[0])) if single else labels


class LabelOracle:
    """Black-box view of a fitted model: feature vector in, Label out.

    Only labels cross this boundary.  ``queries`` counts every labelled
    vector and is safe to update from several threads.
    """

    def __init__(self, model):
        self._model = model
        self._lock = threading.Lock()
        self._queries = 0

    @property
    def queries(self):
        return self._queries

    @property
    def n_features(self):
        return self._model.n_features

    def _count(self, k):
        with self._lock:
            self._queries += k

    def __call__(self, x):
        label = predict(self._model, np.asarray(x, dtype=float).ravel())
        self._count(1)
        return label

    query = __call__

    def query_batch(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[0] == 0:
            return np.zeros(0, dtype=np.int8)
        labels = predict(self._model, X)
        self._count(X.shape[0])
        return labels


def _encode(value):
    if value is None:
        return "none", ""
    if isinstance(value, (bool, np.bool_)):
        return "bool", str(bool(value))
    if isinstance(value, (int, np.integer)):
        return "int", str(int(value))
    if isinstance(value, (float, np.floating)):
        return "float", repr(float(value))
    if isinstance(value, str):
        return "str", value
    arr = np.asarray(value)
    kind = "bool" if arr.dtype == bool else "float"
    shape = "x".join(str(s) for s in arr.shape)
    if kind == "bool":
        body = " ".join("1" if v else "0" for v in arr.ravel())
    else:
        body = " ".join(repr(float(v)) for v in arr.ravel())
    return f"array[{kind}:{shape}]", body


def _decode(kind, body):
    if kind == "none":
        return None
    if kind == "bool":
        return body == "True"
    if kind == "int":
        return int(body)
    if kind == "float":
        return float(body)
    if kind == "str":
        return body
    if kind.startswith("array["):
        inner = kind[len("array["):-1]
        dtype, shape = inner.split(":")
        dims = tuple(int(s) for s in shape.split("x")) if shape else ()
        values = body.split()
        if dtype == "bool":
            arr = np.array([v == "1" for v in values], dtype=bool)
        else:
            arr = np.array([float(v) for v in values], dtype=float)
        return arr.reshape(dims)
    raise ParseError(f"unknown value type {kind!r}")


def save_model(model, path):
    """Write ``key : type = value`` lines; floats use repr so reloads are bit-exact."""
    with open(path, "w") as fh:
        fh.write(f"family : str = {model.family}\n")
        for f in dataclasses.fields(model):
            kind, body = _encode(getattr(model, f.name))
            fh.write(f"{f.name} : {kind} = {body}\n")


def load_model(path):
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                head, body = line.split(" = ", 1) if " = " in line else (line.rstrip(" ="), "")
                key, kind = (s.strip() for s in head.split(" : "))
            except ValueError:
                raise ParseError(f"malformed model line {line[:40]!r}", lineno) from None
            values[key] = _decode(kind, body)
    family = values.pop("family", None)
    if family not in MODEL_TYPES:
        raise ParseError(f"unknown model family {family!r}")
    return MODEL_TYPES[family](**values)
