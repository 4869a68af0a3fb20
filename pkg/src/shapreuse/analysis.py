"""Cross-method analysis: correlations, selection curves, cost ladders.

Also hosts :func:`run_method`, the single entry point that maps a method
name to its algorithm with the right oracle flavor (cached for the reuse
methods, plain counted fits for the baselines).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .core import (Coalition, Dataset, SupportMap, TestPoint, UtilityCache,
                   ValidationError, ValuationResult)
from .exact import (DEFAULT_ENUM_LIMIT, global_shapley_brute, local_baseline,
                    lsmr, subset_centric)
from .oracles import ModelOracle, ProjectedOracle
from .sampling import SamplerConfig, comple_s, global_mc, local_mc, lsmr_a, tmc

METHODS = ("oracle", "local-baseline", "subset-centric", "lsmr",
           "global-mc", "local-mc", "tmc", "comple-s", "lsmr-a")


class UndefinedCorrelationError(ValidationError):
    """Correlation asked of fewer than two points or a constant vector."""


def pearson(xs, ys) -> float:
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError("inputs must be 1-d and the same length")
    if x.size < 2:
        raise UndefinedCorrelationError("need at least two points")
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt(float(xc @ xc) * float(yc @ yc))
    if denom == 0.0:
        raise UndefinedCorrelationError("constant input has no correlation")
    return float(xc @ yc) / denom


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """Ranks starting at 1; tied values share the mean of their positions."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=np.float64)
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(xs, ys) -> float:
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError("inputs must be 1-d and the same length")
    if x.size < 2:
        raise UndefinedCorrelationError("need at least two points")
    return pearson(_average_ranks(x), _average_ranks(y))


@dataclass
class SelectionCurve:
    fractions: list[float]
    sizes: list[int]
    accuracies: list[float]

    def rows(self):
        return list(zip(self.fractions, self.sizes, self.accuracies))


def rank_by_value(values: dict[int, float]) -> list[int]:
    """Ids sorted by value descending; ties broken by ascending id."""
    return sorted(values, key=lambda z: (-values[z], z))


def selection_curve(dataset: Dataset, tests: list[TestPoint],
                    family, values: dict[int, float],
                    fractions=(0.1, 0.25, 0.5, 0.75, 1.0)) -> SelectionCurve:
    """Accuracy of the family retrained on the top-valued fraction of D.

    Each fraction keeps the ceil(f * |D|) highest-valued training points,
    refits, and scores plain prediction accuracy on the test list.
    """
    if not tests:
        raise ValidationError("need at least one test point")
    ranked = rank_by_value(values)
    if sorted(ranked) != list(range(dataset.num_training)):
        raise ValidationError("values must cover every training id exactly once")
    test_x = np.asarray([t.features for t in tests], dtype=np.float64)
    test_y = np.asarray([t.label for t in tests], dtype=np.int64)
    sizes, accs, fracs = [], [], []
    for f in fractions:
        if not 0.0 < f <= 1.0:
            raise ValidationError(f"fraction {f} outside (0, 1]")
        keep = int(math.ceil(f * dataset.num_training))
        fitted = family.fit(dataset, Coalition.of(ranked[:keep]))
        if getattr(family, "kind", None) == "wknn":
            mask = family.support_matrix(dataset, tests)[:, fitted.member_ids]
            pred = fitted.predict_many(test_x, mask)
        else:
            pred = fitted.predict_many(test_x)
        fracs.append(float(f))
        sizes.append(keep)
        accs.append(float(np.mean(pred == test_y)))
    return SelectionCurve(fracs, sizes, accs)


@dataclass
class Instance:
    """One valuation problem: data, tests, supports, and the model family."""
    dataset: Dataset
    tests: list[TestPoint]
    support_map: SupportMap
    family: object
    utility_bound: float = 1.0


@dataclass
class CostLadder:
    rows: list[dict] = field(default_factory=list)

    def add(self, result: ValuationResult) -> None:
        self.rows.append({"method": result.method,
                          "fits": result.trainings,
                          "evaluations": result.evaluations,
                          "samples": result.samples_used,
                          "seconds": result.elapsed})


def run_method(method: str, instance: Instance, *,
               config: SamplerConfig | None = None,
               enum_limit: int = DEFAULT_ENUM_LIMIT,
               workers: int = 1,
               reuse: bool = False) -> ValuationResult:
    """Run one method on an instance and return its valuation.

    The reuse methods (lsmr, lsmr-a) always share fits through a cache;
    ``reuse`` turns the same cache on for the exact baselines so their
    nominal cost model stays visible by default. Sampling baselines fit
    fresh every time, matching their per-permutation accounting.
    """
    if method not in METHODS:
        raise ValidationError(f"unknown method {method!r}; "
                              f"expected one of {', '.join(METHODS)}")
    ds, tests, supports, family = (instance.dataset, instance.tests,
                                   instance.support_map, instance.family)
    cfg = config if config is not None else SamplerConfig()

    def model_oracle(cached: bool) -> ModelOracle:
        cache = UtilityCache(instance.utility_bound) if cached else None
        return ModelOracle(family, ds, tests, cache=cache)

    if method == "oracle":
        oracle = ProjectedOracle(model_oracle(True), supports)
        return global_shapley_brute(ds, tests, oracle, limit=enum_limit)
    if method == "local-baseline":
        return local_baseline(ds, tests, supports, model_oracle(reuse),
                              enum_limit=enum_limit)
    if method == "subset-centric":
        return subset_centric(ds, tests, supports, model_oracle(reuse),
                              enum_limit=enum_limit)
    if method == "lsmr":
        return lsmr(ds, tests, supports, model_oracle(True),
                    enum_limit=enum_limit, workers=workers)
    if method == "global-mc":
        return global_mc(ds, tests, model_oracle(False), cfg)
    if method == "local-mc":
        return local_mc(ds, tests, supports, model_oracle(False), cfg)
    if method == "tmc":
        return tmc(ds, tests, model_oracle(False), cfg)
    if method == "comple-s":
        return comple_s(ds, tests, model_oracle(False), cfg)
    result, _ = lsmr_a(ds, tests, supports, model_oracle(True), cfg)
    return result


def cost_ladder(instance: Instance, methods=METHODS, *,
                config: SamplerConfig | None = None,
                enum_limit: int = DEFAULT_ENUM_LIMIT) -> CostLadder:
    """Run each method once and tabulate fits, evaluations, and wall time."""
    ladder = CostLadder()
    for method in methods:
        ladder.add(run_method(method, instance, config=config,
                              enum_limit=enum_limit))
    return ladder


@dataclass
class ScalingStudy:
    rows: list[dict] = field(default_factory=list)


def scaling_study(make_instance, sizes, method: str = "lsmr", *,
                  config: SamplerConfig | None = None,
                  enum_limit: int = DEFAULT_ENUM_LIMIT) -> ScalingStudy:
    """Cost of one method across instance sizes.

    ``make_instance`` maps a size to an :class:`Instance`; rows record the
    size, the number of tests, fits, evaluations, and seconds.
    """
    study = ScalingStudy()
    for size in sizes:
        instance = make_instance(size)
        start = time.perf_counter()
        result = run_method(method, instance, config=config,
                            enum_limit=enum_limit)
        elapsed = time.perf_counter() - start
        study.rows.append({"size": int(size),
                           "tests": len(instance.tests),
                           "method": method,
                           "fits": result.trainings,
                           "evaluations": result.evaluations,
                           "samples": result.samples_used,
                           "seconds": elapsed})
    return study
