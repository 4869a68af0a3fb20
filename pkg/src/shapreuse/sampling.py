"""Monte Carlo Shapley estimators, with and without support-set locality.

All samplers share one stopping rule: every ``check_every`` rounds the mean
relative change of the estimate vector since the previous checkpoint is
compared against ``tau``, and sampling stops at convergence or at the budget
``samples``, whichever comes first. Budgets are per test point for the local
methods (local_mc, lsmr_a) and total rounds for the global ones (global_mc,
tmc, comple_s).

Randomness comes from numpy's seedable default generator. Local methods give
every test point its own substream derived as seed XOR hash(test id), so the
draws for one test do not depend on how many other tests are processed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import (
    EMPTY_COALITION,
    Coalition,
    Dataset,
    SupportMap,
    TestPoint,
    ValidationError,
    ValuationResult,
    build_reverse_index,
    eligible_tests,
)
from .exact import check_alignment
from .oracles import GameOracle


@dataclass(frozen=True)
class SamplerConfig:
    """Budget, stopping rule, and truncation knobs shared by the samplers."""

    samples: int = 1000
    tau: float = 0.05
    check_every: int = 100
    eps_guard: float = 1e-12
    seed: int = 0
    tmc_perf_tol: float = 0.01
    tmc_stable_runs: int = 5

    def __post_init__(self) -> None:
        if int(self.samples) != self.samples or self.samples < 1:
            raise ValidationError("samples must be a positive integer")
        if not self.tau > 0:
            raise ValidationError("tau must be positive")
        if int(self.check_every) != self.check_every or self.check_every < 1:
            raise ValidationError("check_every must be a positive integer")
        if not self.eps_guard > 0:
            raise ValidationError("eps_guard must be positive")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValidationError("seed must be a non-negative integer")
        if not self.tmc_perf_tol >= 0:
            raise ValidationError("tmc_perf_tol must be non-negative")
        if int(self.tmc_stable_runs) != self.tmc_stable_runs or self.tmc_stable_runs < 1:
            raise ValidationError("tmc_stable_runs must be a positive integer")


def test_stream(seed: int, test_id: int) -> np.random.Generator:
    """Per-test substream: seed XOR hash(test id)."""
    return np.random.default_rng(seed ^ hash(int(test_id)))


def convergence_criterion(prev: np.ndarray, curr: np.ndarray,
                          eps_guard: float) -> float:
    """Mean relative change per training point between two checkpoints."""
    prev = np.asarray(prev, dtype=np.float64)
    curr = np.asarray(curr, dtype=np.float64)
    if prev.shape != curr.shape:
        raise ValidationError("checkpoint vectors must have equal shape")
    return float(np.mean(np.abs(curr - prev) / (np.abs(curr) + eps_guard)))


def convergence_monitor(history: Sequence[np.ndarray],
                        config: SamplerConfig) -> tuple[bool, float]:
    """Stopping decision from the last two checkpoints of an estimate history."""
    if len(history) < 2:
        raise ValidationError("convergence needs at least two checkpoints")
    crit = convergence_criterion(history[-2], history[-1], config.eps_guard)
    return crit < config.tau, crit


class _Tracker:
    """Incremental form of the stopping rule: keeps only the last checkpoint."""

    def __init__(self, config: SamplerConfig):
        self.config = config
        self.prev: np.ndarray | None = None
        self.checkpoints: list[tuple[int, float]] = []

    def converged(self, rounds: int, estimates: np.ndarray) -> bool:
        if self.prev is None:
            self.prev = estimates.copy()
            return False
        crit = convergence_criterion(self.prev, estimates, self.config.eps_guard)
        self.checkpoints.append((rounds, crit))
        self.prev = estimates.copy()
        return crit < self.config.tau


def draw_prefix_subset(rng: np.random.Generator,
                       members: tuple[int, ...]) -> tuple[int, ...]:
    """Prefix-before-marker subset of a uniform permutation of members+marker.

    Equivalently: the subset size is uniform on 0..len(members) and the
    subset is uniform among that size.
    """
    n = len(members)
    perm = rng.permutation(n + 1)
    cut = int(np.nonzero(perm == n)[0][0])
    return tuple(sorted(int(members[i]) for i in perm[:cut]))


@dataclass
class SamplingTrace:
    """Per-test accounting of a reuse-aware sampling run."""

    hits: dict[int, int] = field(default_factory=dict)
    misses: dict[int, int] = field(default_factory=dict)
    accepted: dict[int, set[Coalition]] = field(default_factory=dict)
    samples_drawn: int = 0
    trainings: int = 0

    def distinct(self, test_id: int) -> int:
        return len(self.accepted[test_id])


def _finish(values: np.ndarray, method: str, oracle: GameOracle, config: SamplerConfig,
            rounds_total: int, tracker: _Tracker, start: float) -> ValuationResult:
    return ValuationResult(
        values={z: float(values[z]) for z in range(len(values))},
        method=method,
        samples_used=rounds_total,
        trainings=oracle.trainings,
        evaluations=oracle.evaluations,
        seed=config.seed,
        elapsed=time.perf_counter() - start,
        checkpoints=list(tracker.checkpoints),
    )


def global_mc(dataset: Dataset, tests: list[TestPoint], oracle: GameOracle,
              config: SamplerConfig) -> ValuationResult:
    """Permutation sampling over the full dataset, all tests per walk."""
    n = len(dataset)
    start = time.perf_counter()
    rng = np.random.default_rng(config.seed)
    tids = sorted(t.id for t in tests)
    acc = np.zeros(n)
    tracker = _Tracker(config)
    m = 0
    while m < config.samples:
        perm = rng.permutation(n)
        current = EMPTY_COALITION
        u_prev = oracle.evaluate_many(current, tids)
        for raw in perm:
            z = int(raw)
            current = current.plus(z)
            u_next = oracle.evaluate_many(current, tids)
            for t in tids:
                acc[z] += u_next[t] - u_prev[t]
            u_prev = u_next
        m += 1
        if m % config.check_every == 0 and tracker.converged(m, acc / m):
            break
    return _finish(acc / m, "global-mc", oracle, config, m, tracker, start)


def local_mc(dataset: Dataset, tests: list[TestPoint], support_map: SupportMap,
             oracle: GameOracle, config: SamplerConfig) -> ValuationResult:
    """Permutation sampling restricted to each test point's support set."""
    n = len(dataset)
    start = time.perf_counter()
    check_alignment(tests, support_map)
    ordered = sorted(tests, key=lambda t: t.id)
    supports = {t.id: tuple(sorted(support_map.of(t.id))) for t in ordered}
    streams = {t.id: test_stream(config.seed, t.id) for t in ordered}
    acc = np.zeros(n)
    tracker = _Tracker(config)
    m = 0
    while m < config.samples:
        for t in ordered:
            support = supports[t.id]
            if not support:
                continue
            perm = streams[t.id].permutation(len(support))
            current = EMPTY_COALITION
            u_prev = oracle.evaluate(current, t.id)
            for idx in perm:
                z = support[int(idx)]
                current = current.plus(z)
                u_next = oracle.evaluate(current, t.id)
                acc[z] += u_next - u_prev
                u_prev = u_next
        m += 1
        if m % config.check_every == 0 and tracker.converged(m, acc / m):
            break
    return _finish(acc / m, "local-mc", oracle, config, m * len(ordered),
                   tracker, start)


def tmc(dataset: Dataset, tests: list[TestPoint], oracle: GameOracle,
        config: SamplerConfig) -> ValuationResult:
    """Truncated permutation sampling over the full dataset.

    Each walk tracks truncation per test point. A marginal smaller in
    magnitude than ``tmc_perf_tol`` is discarded and ends that test's walk;
    a predicted class unchanged for ``tmc_stable_runs`` consecutive
    additions keeps the current marginal and ends the walk after it
    (prediction stability applies only when the oracle exposes argmax
    predictions). Once every test is truncated the walk stops early, so
    remaining players get zero marginal that round.
    """
    n = len(dataset)
    start = time.perf_counter()
    rng = np.random.default_rng(config.seed)
    tids = sorted(t.id for t in tests)
    predict = bool(getattr(oracle, "supports_prediction", False))
    acc = np.zeros(n)
    tracker = _Tracker(config)
    m = 0
    while m < config.samples:
        perm = rng.permutation(n)
        if predict:
            u_prev, cls_prev = oracle.evaluate_and_predict(EMPTY_COALITION, tids)
        else:
            u_prev = oracle.evaluate_many(EMPTY_COALITION, tids)
            cls_prev = {}
        active = {t: True for t in tids}
        streak = {t: 0 for t in tids}
        current = EMPTY_COALITION
        for raw in perm:
            live = [t for t in tids if active[t]]
            if not live:
                break
            z = int(raw)
            current = current.plus(z)
            if predict:
                u_next, cls_next = oracle.evaluate_and_predict(current, live)
            else:
                u_next = oracle.evaluate_many(current, live)
                cls_next = {}
            for t in live:
                delta = u_next[t] - u_prev[t]
                if abs(delta) < config.tmc_perf_tol:
                    active[t] = False
                    continue
                acc[z] += delta
                u_prev[t] = u_next[t]
                if predict:
                    if cls_next[t] == cls_prev[t]:
                        streak[t] += 1
                        if streak[t] >= config.tmc_stable_runs:
                            active[t] = False
                    else:
                        streak[t] = 0
                    cls_prev[t] = cls_next[t]
        m += 1
        if m % config.check_every == 0 and tracker.converged(m, acc / m):
            break
    return _finish(acc / m, "tmc", oracle, config, m, tracker, start)


def comple_s(dataset: Dataset, tests: list[TestPoint], oracle: GameOracle,
             config: SamplerConfig) -> ValuationResult:
    """Paired-coalition sampling: each round scores a split and its complement.

    A round draws a permutation and a split position, evaluates the prefix
    coalition and its complement (exactly two fits), and records the signed
    difference for every player: members of the prefix at the prefix size,
    members of the complement with the opposite sign at the complement size.
    The estimate averages the per-size means over all sizes.
    """
    n = len(dataset)
    start = time.perf_counter()
    rng = np.random.default_rng(config.seed)
    tids = sorted(t.id for t in tests)
    sums = np.zeros((n, n + 1))
    counts = np.zeros((n, n + 1), dtype=np.int64)
    tracker = _Tracker(config)

    def estimate() -> np.ndarray:
        with np.errstate(invalid="ignore"):
            means = np.where(counts > 0, sums / np.where(counts > 0, counts, 1), 0.0)
        return means[:, 1:].sum(axis=1) / n

    m = 0
    while m < config.samples:
        perm = rng.permutation(n)
        split = int(rng.integers(1, n + 1))
        inside = Coalition.of(int(i) for i in perm[:split])
        outside = Coalition.of(int(i) for i in perm[split:])
        u_in = oracle.evaluate_many(inside, tids)
        u_out = oracle.evaluate_many(outside, tids)
        contribution = 0.0
        for t in tids:
            contribution += u_in[t] - u_out[t]
        for z in inside:
            sums[z, split] += contribution
            counts[z, split] += 1
        for z in outside:
            sums[z, n - split] += -contribution
            counts[z, n - split] += 1
        m += 1
        if m % config.check_every == 0 and tracker.converged(m, estimate()):
            break
    return _finish(estimate(), "comple-s", oracle, config, m, tracker, start)


def lsmr_a(dataset: Dataset, tests: list[TestPoint], support_map: SupportMap,
           oracle: GameOracle, config: SamplerConfig
           ) -> tuple[ValuationResult, SamplingTrace]:
    """Reuse-aware prefix sampling over support sets.

    Each round, every test draws a prefix subset of its support. The draw is
    kept only if the drawing test is the subset's pivot (first test whose
    support contains it); a kept subset is fitted once through the cache and
    its utilities update every eligible test. Discarded draws still consume
    budget: the final estimate divides by all rounds, hits and misses alike.
    """
    n = len(dataset)
    start = time.perf_counter()
    check_alignment(tests, support_map)
    reverse = build_reverse_index(support_map, n)
    ordered = sorted(tests, key=lambda t: t.id)
    supports = {t.id: tuple(sorted(support_map.of(t.id))) for t in ordered}
    streams = {t.id: test_stream(config.seed, t.id) for t in ordered}
    trace = SamplingTrace(
        hits={t.id: 0 for t in ordered},
        misses={t.id: 0 for t in ordered},
        accepted={t.id: set() for t in ordered},
    )
    acc = np.zeros(n)
    tracker = _Tracker(config)
    m = 0
    while m < config.samples:
        for t in ordered:
            subset = Coalition(draw_prefix_subset(streams[t.id], supports[t.id]))
            eligible = eligible_tests(subset, reverse)
            if eligible[0] != t.id:
                trace.misses[t.id] += 1
                continue
            trace.hits[t.id] += 1
            trace.accepted[t.id].add(subset)
            utilities = oracle.evaluate_many(subset, eligible)
            size = len(subset)
            inside = set(subset.members)
            for tp in eligible:
                n_t = len(supports[tp])
                if n_t == 0:
                    continue
                u = utilities[tp]
                for z in supports[tp]:
                    if z in inside:
                        acc[z] += (n_t + 1) * u / size
                    else:
                        acc[z] -= (n_t + 1) * u / (n_t - size)
        m += 1
        if m % config.check_every == 0 and tracker.converged(m, acc / m):
            break
    trace.samples_drawn = m * len(ordered)
    trace.trainings = oracle.trainings
    result = _finish(acc / m, "lsmr-a", oracle, config, trace.samples_drawn,
                     tracker, start)
    return result, trace


@dataclass
class VarianceSummary:
    """Per-point moments of a method's values across seeds at matched budget."""

    seeds: tuple[int, ...]
    values: np.ndarray  # (num seeds, num training points)
    mean: np.ndarray
    variance: np.ndarray  # unbiased, zero when a single seed is given


def variance_study(run: Callable[[int], ValuationResult],
                   seeds: Sequence[int]) -> VarianceSummary:
    """Run a method once per seed and summarize the per-point spread.

    ``run`` must build fresh oracle state per call so no reuse leaks across
    seeds. Deterministic methods yield zero variance.
    """
    seeds = tuple(int(s) for s in seeds)
    if not seeds:
        raise ValidationError("variance study needs at least one seed")
    rows = []
    for s in seeds:
        result = run(s)
        rows.append(result.values_array())
    values = np.vstack(rows)
    mean = values.mean(axis=0)
    if len(seeds) > 1:
        variance = values.var(axis=0, ddof=1)
    else:
        variance = np.zeros(values.shape[1])
    return VarianceSummary(seeds=seeds, values=values, mean=mean, variance=variance)
