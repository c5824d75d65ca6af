"""The adversary: boundary pattern walks, batch EPD, chronic poisoning, baselines.

Everything here sees the victim through a LabelOracle only.  Adversarial
points are found by walking edge points of the Normal training data outward
along their normals until the oracle's answer flips, then backing off with a
step three times smaller.  A visited Normal point is kept when one more step
of length ``epsilon`` along the normal is labelled Abnormal, which certifies
that the decision boundary crosses the ray within ``epsilon`` of it.
"""
import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional

import numpy as np

from .data import Label
from .errors import ConfigError, SizeError
from .evaluation.metrics import RoundReport, confusion
from .geometry import DEFAULT_K, DEFAULT_TAU, EdgePattern, edge_detect
from .victims import LabelOracle, fit

log = logging.getLogger(__name__)

BUDGET_MODES = ("per-round", "cumulative")


@dataclass(frozen=True)
class AttackConfig:
    eta: float = 0.07
    max_iters: int = 30
    step: float = 0.05
    epsilon: Optional[float] = None  # None -> step
    batch_size: Optional[int] = None  # None -> max(50, n_normal // 10), at most n_normal
    rounds: int = 15
    epd_k: int = DEFAULT_K
    epd_tau: float = DEFAULT_TAU
    seed: int = 0
    budget_mode: str = "per-round"

    def __post_init__(self):
        if not 0.0 < self.eta < 1.0:
            raise ConfigError(f"eta must lie in (0, 1), got {self.eta}")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be >= 1")
        if self.step <= 0:
            raise ConfigError("step must be positive")
        if self.epsilon is not None and self.epsilon <= 0:
            raise ConfigError("epsilon must be positive")
        if self.batch_size is not None and self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.rounds < 0:
            raise ConfigError("rounds must be >= 0")
        if self.epd_k < 1:
            raise ConfigError("epd_k must be >= 1")
        if not 0.0 < self.epd_tau <= 1.0:
            raise ConfigError("epd_tau must lie in (0, 1]")
        if self.budget_mode not in BUDGET_MODES:
            raise ConfigError(f"budget_mode must be one of {BUDGET_MODES}")

    @property
    def eps(self):
        return self.step if self.epsilon is None else self.epsilon

    def batch_for(self, n_normal):
        if self.batch_size is not None:
            return self.batch_size
        return min(n_normal, max(50, n_normal // 10))


@dataclass(frozen=True, eq=False)
class ShiftTrace:
    """One walk: position, step length, direction taken and oracle label per iteration."""

    edge: EdgePattern
    positions: np.ndarray
    steps: np.ndarray
    directions: np.ndarray
    labels: np.ndarray


@dataclass(frozen=True, eq=False)
class BPDResult:
    points: np.ndarray
    trace: ShiftTrace


@dataclass(frozen=True, eq=False)
class AdversarialBatch:
    """Normal-labelled points to inject, with the edge point each walk started from."""

    samples: np.ndarray
    round: int = 0
    sources: Optional[np.ndarray] = None
    method: str = "bebp"
    warnings: tuple = ()
    normals: Optional[np.ndarray] = None  # walk direction per sample (BEBP only)

    def __len__(self):
        return self.samples.shape[0]

    def subset(self, index):
        index = np.asarray(index, dtype=np.intp)
        return replace(
            self,
            samples=self.samples[index],
            sources=None if self.sources is None else self.sources[index],
            normals=None if self.normals is None else self.normals[index],
        )


def _empty(d):
    return np.zeros((0, d))


def bpd(edge, oracle, m, lambda0, epsilon=None):
    """Boundary pattern detection from one edge point.

    While the oracle says Normal the walker steps ``+lambda * normal``;
    on Abnormal it steps back ``-lambda * normal`` and only then divides
    lambda by 3.  Returns the distinct emitted points (visit order) and the
    full trace.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    eps = lambda0 if epsilon is None else epsilon
    n_vec = np.asarray(edge.normal, dtype=float)
    x = np.asarray(edge.point, dtype=float).copy()
    lam = float(lambda0)
    positions, steps, dirs, labels = [], [], [], []
    emitted, seen = [], set()
    for _ in range(m):
        label = oracle(x)
        positions.append(x)
        steps.append(lam)
        labels.append(int(label))
        if label == Label.NORMAL:
            if oracle(x + eps * n_vec) == Label.ABNORMAL:
                key = x.tobytes()
                if key not in seen:
                    seen.add(key)
                    emitted.append(x)
            dirs.append(1)
            x = x + lam * n_vec
        else:
            dirs.append(-1)
            x = x - lam * n_vec
            lam = lam / 3.0
    trace = ShiftTrace(edge, np.array(positions), np.array(steps), np.array(dirs, dtype=np.int8),
                       np.array(labels, dtype=np.int8))
    points = np.array(emitted) if emitted else _empty(x.shape[0])
    return BPDResult(points, trace)


def bpd_many(points, normals, oracle, m, lambda0, epsilon=None):
    """Run ``bpd`` from many edge points in lock step with batched oracle calls.

    Returns one array of emitted points per walker, identical to calling
    ``bpd`` on each edge separately (same points, same query count).
    """
    X = np.array(points, dtype=float)
    N = np.asarray(normals, dtype=float)
    e, d = X.shape
    eps = lambda0 if epsilon is None else epsilon
    lam = np.full(e, float(lambda0))
    emitted = [[] for _ in range(e)]
    seen = [set() for _ in range(e)]
    for _ in range(m):
        labels = oracle.query_batch(X)
        normal = labels == Label.NORMAL
        idx = np.flatnonzero(normal)
        if idx.size:
            probe = oracle.query_batch(X[idx] + eps * N[idx])
            for w in idx[probe == Label.ABNORMAL]:
                key = X[w].tobytes()
                if key not in seen[w]:
                    seen[w].add(key)
                    emitted[w].append(X[w].copy())
        sign = np.where(normal, 1.0, -1.0)
        X = X + (sign * lam)[:, None] * N
        lam = np.where(normal, lam, lam / 3.0)
    return [np.array(p) if p else _empty(d) for p in emitted]


def bebp(train_normal, oracle, cfg, rng=None, round_index=0):
    """Batch-EPD boundary patterns.

    ``floor(n / L)`` times: draw L Normal points without replacement, detect
    their edge points, walk each one to the boundary.  The union of emitted
    points, de-duplicated by exact coordinates, is returned.
    """
    P = np.asarray(train_normal, dtype=float)
    n, d = P.shape
    L = cfg.batch_for(n)
    if n < L or L <= cfg.epd_k:
        raise SizeError(f"batch size {L} needs n_normal >= {L} (have {n}) and L > epd_k={cfg.epd_k}")
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    found, sources, dirs, seen = [], [], [], set()
    for _ in range(n // L):
        draw = P[rng.choice(n, size=L, replace=False)]
        edges = edge_detect(draw, cfg.epd_k, cfg.epd_tau)
        if not edges:
            continue
        starts = np.array([e.point for e in edges])
        normals = np.array([e.normal for e in edges])
        walks = bpd_many(starts, normals, oracle, cfg.max_iters, cfg.step, cfg.eps)
        for start, normal, pts in zip(starts, normals, walks):
            for p in pts:
                key = p.tobytes()
                if key not in seen:
                    seen.add(key)
                    found.append(p)
                    sources.append(start)
                    dirs.append(normal)
    if not found:
        return AdversarialBatch(_empty(d), round_index, _empty(d), normals=_empty(d))
    return AdversarialBatch(np.array(found), round_index, np.array(sources), normals=np.array(dirs))


def budget_cap(eta, train_size):
    """Largest integer strictly below ``eta * train_size``.

    ``eta`` is read as the decimal it prints as, so 0.07 * 100 gives 6.
    """
    if train_size < 1:
        raise SizeError("train_size must be >= 1")
    bound = Fraction(repr(float(eta))) * int(train_size)
    cap = int(bound)  # floor, bound > 0
    return cap - 1 if cap == bound else cap


def enforce_budget(batch, eta, train_size, rng=None, cap=None):
    """Subsample ``batch`` uniformly down to the cap when it would reach it."""
    cap = budget_cap(eta, train_size) if cap is None else cap
    if len(batch) <= cap:
        return batch
    if cap <= 0:
        log.info("poisoning budget is 0 for train_size=%d eta=%s", train_size, eta)
    rng = rng if rng is not None else np.random.default_rng(0)
    keep = np.sort(rng.choice(len(batch), size=max(cap, 0), replace=False))
    return batch.subset(keep)


def baseline_basic(train, n, rng=None, round_index=0):
    """BASIC: ``n`` Normal training rows drawn with replacement and re-injected."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = rng if rng is not None else np.random.default_rng(0)
    P = train.normal_points()
    picks = P[rng.integers(0, P.shape[0], size=n)]
    return AdversarialBatch(picks.copy(), round_index, picks.copy(), method="basic")


def baseline_random(train, oracle, n, d=None, rng=None, round_index=0, cap_factor=100, chunk=512):
    """RANDOM: uniform vectors in [0, 1]^d kept when the oracle says Normal.

    Candidates are drawn until ``n`` are kept or ``cap_factor * n`` have been
    tried; then as many Normal training rows as were kept are appended.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    d = train.dim if d is None else d
    rng = rng if rng is not None else np.random.default_rng(0)
    kept = []
    tried = 0
    limit = cap_factor * n
    while len(kept) < n and tried < limit:
        size = min(chunk, limit - tried)
        cand = rng.random((size, d))
        tried += size
        labels = oracle.query_batch(cand)
        kept.extend(cand[labels == Label.NORMAL][: n - len(kept)])
    if not kept:
        log.warning("RANDOM baseline: no Normal candidates in %d tries", tried)
        return AdversarialBatch(_empty(d), round_index, _empty(d), method="random",
                                warnings=("random-cap-exhausted",))
    kept = np.array(kept)
    P = train.normal_points()
    copies = P[rng.integers(0, P.shape[0], size=kept.shape[0])]
    samples = np.vstack([kept, copies])
    return AdversarialBatch(samples, round_index, samples.copy(), method="random")


@dataclass(frozen=True, eq=False)
class RoundOutcome:
    model: object
    report: RoundReport
    batch: Optional[AdversarialBatch] = None


@dataclass(frozen=True, eq=False)
class ChronicRun:
    rounds: list = field(default_factory=list)
    final_train: object = None
    queries: int = 0

    @property
    def reports(self):
        return [r.report for r in self.rounds]


def _generate(method, train, oracle, cfg, cap, rng, round_index):
    if method == "bebp":
        return bebp(train.normal_points(), oracle, cfg, rng, round_index)
    if cap < 1:
        return AdversarialBatch(_empty(train.dim), round_index, _empty(train.dim), method=method)
    if method == "basic":
        return baseline_basic(train, cap, rng, round_index)
    if method == "random":
        half = cap // 2
        if half < 1:
            return AdversarialBatch(_empty(train.dim), round_index, _empty(train.dim), method=method)
        return baseline_random(train, oracle, half, train.dim, rng, round_index)
    raise ConfigError(f"unknown poisoning method {method!r}")


def _report(model, round_index, eval_sets, injected, train_size, budget_base, extra=()):
    counts = {name: confusion(model, ds) for name, ds in eval_sets.items()}
    warnings = list(extra)
    if not getattr(model, "converged", True):
        warnings.append("nonconvergent")
    return RoundReport(round_index, counts, injected, train_size, budget_base, tuple(warnings))


def chronic_attack(train0, spec, cfg, eval_sets, seed=None, method="bebp", report_warnings=()):
    """Poison ``train0`` for ``cfg.rounds`` retraining rounds.

    Round 0 is the clean model.  In round i the adversary builds a batch
    against M_i, caps it at the budget for |D_tr^(i)|, appends it with Normal
    labels and the victim is refit.  ``eval_sets`` maps names to Datasets.
    """
    if isinstance(eval_sets, (list, tuple)):
        eval_sets = {f"eval{i}": ds for i, ds in enumerate(eval_sets)}
    seed = cfg.seed if seed is None else seed
    children = np.random.SeedSequence(seed).spawn(cfg.rounds + 1)
    fit_seed = int(children[0].generate_state(1)[0])
    model = fit(spec, train0, seed=fit_seed)
    train = train0
    outcomes = [RoundOutcome(model, _report(model, 0, eval_sets, 0, len(train), len(train),
                                            report_warnings))]
    queries = 0
    injected_total = 0
    base_size = len(train0)
    for i in range(cfg.rounds):
        gen_ss, budget_ss, fit_ss = children[i + 1].spawn(3)
        oracle = LabelOracle(model)
        if cfg.budget_mode == "per-round":
            cap = budget_cap(cfg.eta, len(train))
        else:
            cap = max(0, budget_cap(cfg.eta, base_size) - injected_total)
        batch = _generate(method, train, oracle, cfg, cap, np.random.default_rng(gen_ss), i + 1)
        batch = enforce_budget(batch, cfg.eta, len(train), np.random.default_rng(budget_ss), cap=cap)
        queries += oracle.queries
        budget_base = len(train)
        train = train.with_adversarial(batch.samples, tag=f"{method}-r{i + 1}")
        injected_total += len(batch)
        extra = list(report_warnings) + list(batch.warnings)
        if len(batch) == 0:
            extra.append("empty-batch")
        else:
            model = fit(spec, train, seed=int(fit_ss.generate_state(1)[0]))
        outcomes.append(RoundOutcome(model, _report(model, i + 1, eval_sets, len(batch), len(train),
                                                    budget_base, extra), batch))
    return ChronicRun(outcomes, train, queries)


def write_batches_csv(batches, path):
    """Adversarial samples: features..., round, origin (one row per sample)."""
    with open(path, "w") as fh:
        for batch in batches:
            if batch is None:
                continue
            for row in batch.samples:
                fh.write(",".join(repr(float(v)) for v in row) + f",{batch.round},adversarial-{batch.method}\n")
