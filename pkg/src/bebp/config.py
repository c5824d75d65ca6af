"""Run configuration: a strict INI file plus ``section.key=value`` overrides.

Unknown sections or keys are rejected so a typo such as ``etaa`` cannot
silently fall back to a default.  ``RunConfig.to_ini`` writes back every
effective value, which is what run manifests contain.
"""
import configparser
import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path

from .attack import AttackConfig
from .errors import BEBPError, ConfigError
from .evaluation.experiment import DatasetSpec, ExperimentSpec
from .victims import STANDARD_SIX, preset

DEFAULT_ETA_VALUES = (0.01, 0.04, 0.07, 0.10)

KEYS = {
    "dataset": {
        "source": str, "train_path": "path", "test_path": "path", "schema_path": "path",
        "n": int, "noise": float, "eval_n": int, "train_counts": "counts", "eval_counts": "counts",
        "sample_size": int, "train_fraction": float,
    },
    "victims": {
        "models": "list", "C": float, "gamma": float, "degree": int, "coef0": float,
        "svm_tol": float, "svm_max_passes": int, "lr_tol": float, "lr_max_iter": int,
        "var_smoothing": float, "lssvm_reg": float, "mi_features": int, "lssvm_max_rows": int,
    },
    "attack": {
        "eta": float, "step": float, "epsilon": float, "max_iters": int, "batch_size": int,
        "epd_k": int, "epd_tau": float, "budget_mode": str,
    },
    "experiment": {
        "rounds": int, "repetitions": int, "seed": int, "eta_values": "floats",
        "baselines": bool, "jobs": int, "raster_resolution": int,
    },
    "output": {"dir": "path"},
}
MANIFEST_SECTION = "run"


@dataclass(frozen=True)
class RunConfig:
    dataset: DatasetSpec
    victims: tuple
    attack: AttackConfig
    repetitions: int = 10
    seed: int = 0
    eta_values: tuple = DEFAULT_ETA_VALUES
    baselines: bool = True
    jobs: int = 1
    raster_resolution: int = 200
    out_dir: str = ""
    victim_options: dict = field(default_factory=dict)

    def experiment(self, **changes):
        spec = ExperimentSpec(self.dataset, self.victims, self.attack, self.repetitions,
                              self.seed, jobs=self.jobs)
        return dataclasses.replace(spec, **changes) if changes else spec

    def to_ini(self):
        """Every effective setting, in the same format ``parse_config`` reads."""
        ds = self.dataset
        at = self.attack
        sections = {
            "dataset": {
                "source": ds.source, "train_path": ds.train_path, "test_path": ds.test_path,
                "schema_path": ds.schema_path, "n": ds.n, "noise": ds.noise, "eval_n": ds.eval_n,
                "train_counts": _fmt_counts(ds.train_counts), "eval_counts": _fmt_counts(ds.eval_counts),
                "sample_size": ds.sample_size, "train_fraction": ds.train_fraction,
            },
            "victims": {"models": ", ".join(v.label for v in self.victims), **self.victim_options},
            "attack": {
                "eta": at.eta, "step": at.step, "epsilon": at.epsilon, "max_iters": at.max_iters,
                "batch_size": at.batch_size, "epd_k": at.epd_k, "epd_tau": at.epd_tau,
                "budget_mode": at.budget_mode,
            },
            "experiment": {
                "rounds": at.rounds, "repetitions": self.repetitions, "seed": self.seed,
                "eta_values": ", ".join(repr(float(e)) for e in self.eta_values),
                "baselines": "on" if self.baselines else "off", "jobs": self.jobs,
                "raster_resolution": self.raster_resolution,
            },
            "output": {"dir": self.out_dir},
        }
        lines = []
        for name, values in sections.items():
            lines.append(f"[{name}]")
            for key, value in values.items():
                if value is None or value == "":
                    continue
                lines.append(f"{key} = {repr(value) if isinstance(value, float) else value}")
            lines.append("")
        return "\n".join(lines)


def _fmt_counts(counts):
    if counts is None:
        return None
    return ", ".join(f"{k}:{v}" for k, v in counts.items())


def _convert(section, key, kind, raw, base_dir):
    where = f"[{section}] {key}"
    raw = raw.strip()
    try:
        if kind is str:
            return raw
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        if kind is bool:
            low = raw.lower()
            if low in ("1", "on", "yes", "true"):
                return True
            if low in ("0", "off", "no", "false"):
                return False
            raise ValueError(raw)
        if kind == "path":
            if not raw:
                return None
            p = Path(os.path.expanduser(raw))
            return str(p if p.is_absolute() else (base_dir / p))
        if kind == "list":
            return tuple(s.strip() for s in raw.split(",") if s.strip())
        if kind == "floats":
            return tuple(float(s) for s in raw.split(",") if s.strip())
        if kind == "counts":
            out = {}
            for item in raw.split(","):
                if not item.strip():
                    continue
                name, _, value = item.partition(":")
                out[name.strip()] = int(value)
                if out[name.strip()] < 0:
                    raise ValueError(item)
            return out
    except ValueError:
        raise ConfigError(f"{where}: cannot read {raw!r} as {getattr(kind, '__name__', kind)}") from None
    raise AssertionError(kind)


def _read_sections(text, base_dir, overrides=()):
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=",))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    raw = {s: dict(parser[s]) for s in parser.sections()}
    for item in overrides:
        target, sep, value = item.partition("=")
        section, dot, key = target.strip().partition(".")
        if not sep or not dot:
            raise ConfigError(f"override {item!r} must look like section.key=value")
        raw.setdefault(section, {})[key] = value
    values = {}
    for section, items in raw.items():
        if section == MANIFEST_SECTION:
            continue
        if section not in KEYS:
            raise ConfigError(f"unknown section [{section}]")
        for key, text_value in items.items():
            if key not in KEYS[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            values[(section, key)] = _convert(section, key, KEYS[section][key], text_value, base_dir)
    return values


def _bounded(values, key, ok, msg):
    if key in values and not ok(values[key]):
        raise ConfigError(f"[{key[0]}] {key[1]} = {values[key]!r} out of range: {msg}")


def _check_ranges(v):
    _bounded(v, ("attack", "eta"), lambda x: 0 < x < 1, "must lie in (0, 1)")
    _bounded(v, ("attack", "step"), lambda x: x > 0, "must be > 0")
    _bounded(v, ("attack", "epsilon"), lambda x: x > 0, "must be > 0")
    _bounded(v, ("attack", "max_iters"), lambda x: x >= 1, "must be >= 1")
    _bounded(v, ("attack", "batch_size"), lambda x: x >= 2, "must be >= 2")
    _bounded(v, ("attack", "epd_k"), lambda x: x >= 1, "must be >= 1")
    _bounded(v, ("attack", "epd_tau"), lambda x: 0 < x <= 1, "must lie in (0, 1]")
    _bounded(v, ("attack", "budget_mode"), lambda x: x in ("per-round", "cumulative"),
             "per-round or cumulative")
    _bounded(v, ("experiment", "rounds"), lambda x: 0 <= x <= 1000, "must lie in [0, 1000]")
    _bounded(v, ("experiment", "repetitions"), lambda x: x >= 1, "must be >= 1")
    _bounded(v, ("experiment", "jobs"), lambda x: x >= 1, "must be >= 1")
    _bounded(v, ("experiment", "raster_resolution"), lambda x: 2 <= x <= 5000, "must lie in [2, 5000]")
    _bounded(v, ("experiment", "eta_values"), lambda xs: len(xs) > 0 and all(0 < x < 1 for x in xs),
             "each value must lie in (0, 1)")
    _bounded(v, ("dataset", "n"), lambda x: x >= 2, "must be >= 2")
    _bounded(v, ("dataset", "eval_n"), lambda x: x >= 2, "must be >= 2")
    _bounded(v, ("dataset", "noise"), lambda x: x >= 0, "must be >= 0")
    _bounded(v, ("dataset", "sample_size"), lambda x: x >= 2, "must be >= 2")
    _bounded(v, ("dataset", "train_fraction"), lambda x: 0 < x < 1, "must lie in (0, 1)")
    for key in ("C", "gamma", "svm_tol", "lr_tol", "var_smoothing", "lssvm_reg"):
        _bounded(v, ("victims", key), lambda x: x > 0, "must be > 0")
    for key in ("degree", "svm_max_passes", "lr_max_iter", "lssvm_max_rows"):
        _bounded(v, ("victims", key), lambda x: x >= 1, "must be >= 1")
    _bounded(v, ("victims", "mi_features"), lambda x: x >= 0, "must be >= 0 (0 disables selection)")
    for key in ("train_path", "test_path", "schema_path"):
        _bounded(v, ("dataset", key), lambda p: p is None or Path(p).exists(), "file does not exist")


def _victims(v):
    names = v.get(("victims", "models"), STANDARD_SIX)
    options = {k: v[("victims", k)] for k in KEYS["victims"] if k != "models" and ("victims", k) in v}
    specs = []
    for name in names:
        spec = preset(name)
        changes = {}
        if "C" in options and spec.family in ("LogReg", "SVM"):
            changes["C"] = options["C"]
        if spec.family in ("SVM", "LSSVM"):
            for key in ("gamma", "degree", "coef0"):
                if key in options:
                    changes[key] = options[key]
        if spec.family == "SVM":
            if "svm_tol" in options:
                changes["tol"] = options["svm_tol"]
            if "svm_max_passes" in options:
                changes["max_iter"] = options["svm_max_passes"]
        if spec.family == "LogReg":
            if "lr_tol" in options:
                changes["tol"] = options["lr_tol"]
            if "lr_max_iter" in options:
                changes["max_iter"] = options["lr_max_iter"]
        if spec.family == "GaussianNB" and "var_smoothing" in options:
            changes["var_smoothing"] = options["var_smoothing"]
        if spec.family == "LSSVM":
            if "lssvm_reg" in options:
                changes["lssvm_reg"] = options["lssvm_reg"]
            if "lssvm_max_rows" in options:
                changes["max_rows"] = options["lssvm_max_rows"]
            if "mi_features" in options:
                changes["feature_selection"] = options["mi_features"] or None
        specs.append(dataclasses.replace(spec, **changes) if changes else spec)
    if not specs:
        raise ConfigError("[victims] models lists no victims")
    return tuple(specs), options


def build_config(text, base_dir=".", overrides=()):
    v = _read_sections(text, Path(base_dir).resolve(), overrides)
    _check_ranges(v)
    get = lambda section, key, default=None: v.get((section, key), default)  # noqa: E731
    try:
        dataset = DatasetSpec(**{k: v[("dataset", k)] for k in KEYS["dataset"] if ("dataset", k) in v})
        attack = AttackConfig(
            **{k: v[("attack", k)] for k in KEYS["attack"] if ("attack", k) in v},
            rounds=get("experiment", "rounds", 15),
        )
        victims, options = _victims(v)
    except BEBPError as exc:
        raise ConfigError(str(exc)) from None
    out_dir = get("output", "dir") or Path(os.environ.get("BEBP_OUTPUT_ROOT", "bebp-runs")).resolve()
    return RunConfig(
        dataset=dataset,
        victims=victims,
        attack=attack,
        repetitions=get("experiment", "repetitions", 10),
        seed=get("experiment", "seed", 0),
        eta_values=get("experiment", "eta_values", DEFAULT_ETA_VALUES),
        baselines=get("experiment", "baselines", True),
        jobs=get("experiment", "jobs", 1),
        raster_resolution=get("experiment", "raster_resolution", 200),
        out_dir=str(out_dir),
        victim_options=options,
    )


def parse_config(path, overrides=()):
    """Read, default-fill and validate a run config file."""
    path = Path(path)
    with open(path) as fh:  # missing file -> OSError
        text = fh.read()
    return build_config(text, path.parent, overrides)
