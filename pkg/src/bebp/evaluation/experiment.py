"""Repeated chronic-poisoning experiments, eta sweeps and baseline comparisons."""
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .. import data as D
from ..attack import AttackConfig, chronic_attack
from ..errors import ConfigError
from .metrics import UNDEFINED

log = logging.getLogger(__name__)

DEFAULT_TRAIN_COUNTS = {"NORMAL": 2000, "PROB": 300, "DOS": 3790, "U2R": 32, "R2L": 350}
DEFAULT_EVAL_COUNTS = {"NORMAL": 2000, "PROB": 500, "DOS": 3900, "U2R": 20, "R2L": 400}

SOURCES = ("moons", "nsl-kdd", "kddcup99", "kyoto", "csv")


@dataclass(frozen=True)
class DatasetSpec:
    source: str = "moons"
    train_path: Optional[str] = None
    test_path: Optional[str] = None
    schema_path: Optional[str] = None
    n: int = 100
    noise: float = 0.2
    eval_n: int = 1000
    train_counts: Optional[dict] = None
    eval_counts: Optional[dict] = None
    sample_size: Optional[int] = None
    train_fraction: float = 0.5

    def __post_init__(self):
        if self.source not in SOURCES:
            raise ConfigError(f"unknown dataset source {self.source!r}; expected one of {SOURCES}")
        if self.source != "moons" and not self.train_path:
            raise ConfigError(f"dataset source {self.source!r} needs train_path")

    def schema(self):
        if self.schema_path:
            return D.load_schema(self.schema_path)
        return D.builtin_schema("kyoto" if self.source == "kyoto" else "kdd41")

    def counts(self):
        """(train_counts, eval_counts) after defaults; None means uniform split."""
        if self.train_counts is not None:
            return self.train_counts, self.eval_counts or {}
        if self.source in ("nsl-kdd", "kddcup99") and self.sample_size is None:
            return DEFAULT_TRAIN_COUNTS, DEFAULT_EVAL_COUNTS
        return None, None


@dataclass(frozen=True)
class ExperimentSpec:
    dataset: DatasetSpec
    victims: tuple
    attack: AttackConfig = AttackConfig()
    repetitions: int = 10
    seed: int = 0
    method: str = "bebp"
    jobs: int = 1

    @property
    def seeds(self):
        return [self.seed + r for r in range(self.repetitions)]


@dataclass(frozen=True, eq=False)
class PreparedData:
    train: object
    eval_sets: dict
    params: object
    warnings: tuple = ()


_RAW_CACHE = {}  # repetitions reuse the parsed train / test files


def _raw(path, schema):
    key = (str(path), os.path.getmtime(path), repr(schema))
    if key not in _RAW_CACHE:
        if len(_RAW_CACHE) >= 2:
            _RAW_CACHE.clear()
        _RAW_CACHE[key] = D.binarize_labels(D.load_kdd_style(path, schema))
    return _RAW_CACHE[key]


def derived_seed(*key):
    return int(np.random.SeedSequence(list(key)).generate_state(1)[0])


def prepare_data(spec, seed):
    """Sample, encode and normalise train / evaluating (/ testing) sets for one repetition."""
    if spec.source == "moons":
        train = D.make_moons(spec.n, spec.noise, derived_seed(seed, 0, 0))
        evaluating = D.make_moons(spec.eval_n, spec.noise, derived_seed(seed, 0, 1))
        params = D.fit_normalize(train)
        return PreparedData(D.apply_normalize(params, train),
                            {"evaluating": D.apply_normalize(params, evaluating)}, params)

    schema = spec.schema()
    raw = _raw(spec.train_path, schema)
    train_counts, eval_counts = spec.counts()
    if train_counts is not None:
        train_raw, rest = D.stratified_sample(raw, train_counts, derived_seed(seed, 0, 0))
        eval_raw, _ = D.stratified_sample(rest, eval_counts, derived_seed(seed, 0, 1))
    else:
        size = spec.sample_size or len(raw)
        if size > len(raw):
            raise ConfigError(f"sample_size {size} exceeds the {len(raw)} available rows")
        rng = np.random.default_rng(derived_seed(seed, 0, 0))
        pick = rng.permutation(len(raw))[:size]
        cut = int(round(size * spec.train_fraction))
        train_raw, eval_raw = raw.subset(np.sort(pick[:cut])), raw.subset(np.sort(pick[cut:]))
    encoding = D.fit_encoding(train_raw)
    train = D.apply_encoding(encoding, train_raw)
    params = D.fit_normalize(train)
    sets = {"evaluating": D.apply_normalize(params, D.apply_encoding(encoding, eval_raw))}
    warnings = []
    if spec.test_path:
        test_raw = _raw(spec.test_path, schema)
        unseen = encoding.unseen(test_raw)
        if unseen:
            warnings.append(f"testing-unseen-categories:{unseen}")
        sets["testing"] = D.apply_normalize(params, D.apply_encoding(encoding, test_raw))
    return PreparedData(D.apply_normalize(params, train), sets, params, tuple(warnings))


@dataclass(eq=False)
class ExperimentResult:
    spec: ExperimentSpec
    seeds: list
    reports: dict = field(default_factory=dict)  # victim label -> [per-rep list of RoundReport | None]
    failures: dict = field(default_factory=dict)  # (victim, rep) -> message

    @property
    def complete(self):
        return not self.failures

    def victims(self):
        return list(self.reports)

    def eval_names(self):
        for reps in self.reports.values():
            for rounds in reps:
                if rounds:
                    return list(rounds[0].counts)
        return []

    def values(self, victim, name, metric):
        """Matrix (reps x rounds) of a metric; NaN marks undefined DR or failed reps."""
        rows = []
        for rounds in self.reports[victim]:
            if rounds is None:
                continue
            row = []
            for rep in rounds:
                v = rep.acc(name) if metric == "acc" else rep.dr(name)
                row.append(math.nan if v is None else v)
            rows.append(row)
        return np.array(rows, dtype=float)

    def aggregate(self, victim, name, metric):
        """Per-round (means, stds, n) over completed repetitions; undefined values skipped."""
        M = self.values(victim, name, metric)
        if M.size == 0:
            return [], [], []
        means, stds, ns = [], [], []
        for col in M.T:
            ok = col[~np.isnan(col)]
            ns.append(int(ok.size))
            if ok.size == 0:
                means.append(None)
                stds.append(None)
            else:
                means.append(float(ok.mean()))
                stds.append(float(ok.std(ddof=1)) if ok.size > 1 else 0.0)
        return means, stds, ns


def _run_rep(spec, rep_index, seed):
    data = prepare_data(spec.dataset, seed)
    out = {}
    for v_idx, victim in enumerate(spec.victims):
        try:
            run = chronic_attack(data.train, victim, spec.attack, data.eval_sets,
                                 seed=derived_seed(seed, 1, v_idx), method=spec.method,
                                 report_warnings=data.warnings)
            out[victim.label] = (run.reports, None)
        except Exception as exc:  # recorded per repetition, aggregation continues
            log.exception("repetition %d failed for %s", rep_index, victim.label)
            out[victim.label] = (None, f"{type(exc).__name__}: {exc}")
    return rep_index, out


def run_experiment(spec, progress=None):
    """Run every repetition (optionally in worker processes) and collect round reports."""
    seeds = spec.seeds
    result = ExperimentResult(spec, seeds, {v.label: [None] * len(seeds) for v in spec.victims})
    if spec.jobs > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            futures = [pool.submit(_run_rep, spec, r, s) for r, s in enumerate(seeds)]
            outputs = [f.result() for f in futures]
    else:
        outputs = []
        for r, s in enumerate(seeds):
            outputs.append(_run_rep(spec, r, s))
            if progress:
                progress(r + 1, len(seeds))
    for rep_index, out in sorted(outputs, key=lambda o: o[0]):
        for label, (reports, err) in out.items():
            result.reports[label][rep_index] = reports
            if err:
                result.failures[(label, rep_index)] = err
    return result


def sweep_eta(spec, eta_values, progress=None):
    """One experiment per eta with identical seeds (paired comparison)."""
    out = {}
    for eta in eta_values:
        if not 0.0 < eta < 1.0:
            raise ConfigError(f"eta must lie in (0, 1), got {eta}")
        out[eta] = run_experiment(replace(spec, attack=replace(spec.attack, eta=eta)), progress)
    return out


def compare_methods(spec, methods=("bebp", "basic", "random"), progress=None):
    """Same seeds and budget for each poisoning method."""
    return {m: run_experiment(replace(spec, method=m), progress) for m in methods}


def fmt(value):
    if value is None:
        return UNDEFINED
    if isinstance(value, float):
        return repr(value)
    return str(value)
