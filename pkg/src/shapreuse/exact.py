"""Exact Shapley valuation: brute force, per-test enumeration, and reuse.

Four routes to the same numbers, at very different training budgets:

* :func:`global_shapley_brute` sums weighted marginal contributions over
  every subset of the full dataset (the reference answer, capped by a size
  limit).
* :func:`local_baseline` enumerates, per test point, subsets of the support
  set and both endpoint evaluations of each marginal, with no reuse.
* :func:`subset_centric` folds the two endpoint evaluations into one signed
  term per subset, so each support subset is evaluated once per test.
* :func:`lsmr` additionally shares each distinct subset across every test
  whose support contains it: the subset is fitted only when the processing
  order reaches its pivot (first eligible) test, and that single fit updates
  all eligible tests. Its training count is exactly the number of distinct
  subsets in the union of support powersets.

For a local game (utility depends on a coalition only through its
intersection with the support set), all four agree.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Iterator

import numpy as np

from .core import (
    Coalition,
    Dataset,
    SizeLimitError,
    SupportMap,
    TestPoint,
    ValidationError,
    ValuationResult,
    build_reverse_index,
    eligible_tests,
)
from .oracles import GameOracle

DEFAULT_ENUM_LIMIT = 20
_EXACT_COMB_MAX = 60


def check_alignment(tests: list[TestPoint], support_map: SupportMap) -> None:
    """The support map must cover exactly the test points being valued."""
    ids = sorted(t.id for t in tests)
    if list(support_map.test_ids) != ids:
        raise ValidationError(
            f"support map covers test ids {list(support_map.test_ids)} but the "
            f"test set has ids {ids}")


@lru_cache(maxsize=None)
def shapley_weight(n: int, size: int, with_member: bool) -> float:
    """Shapley coefficient of a size-``size`` subset in an ``n``-player game.

    For a subset containing the player this is 1/(n * C(n-1, size-1)); for a
    subset excluding the player it is 1/(n * C(n-1, size)). Binomials are
    exact integers up to n = 60 and log-gamma based beyond.
    """
    j = size - 1 if with_member else size
    if not 0 <= j <= n - 1:
        raise ValueError(f"no size-{size} subset with_member={with_member} in "
                         f"an {n}-player game")
    if n <= _EXACT_COMB_MAX:
        return 1.0 / (n * math.comb(n - 1, j))
    log_c = math.lgamma(n) - math.lgamma(j + 1) - math.lgamma(n - j)
    return math.exp(-(math.log(n) + log_c))


def _subsets(ids: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
    """All subsets of sorted ids, by size then lexicographically."""
    for size in range(len(ids) + 1):
        yield from combinations(ids, size)


def _result(values: np.ndarray, method: str, oracle: GameOracle, start: float,
            per_test: dict[int, np.ndarray] | None, seed: int = 0) -> ValuationResult:
    n = len(values)
    decomposition = None
    if per_test is not None:
        decomposition = {t: {z: float(row[z]) for z in range(n)}
                         for t, row in per_test.items()}
    return ValuationResult(
        values={z: float(values[z]) for z in range(n)},
        method=method,
        trainings=oracle.trainings,
        evaluations=oracle.evaluations,
        seed=seed,
        elapsed=time.perf_counter() - start,
        per_test=decomposition,
    )


def global_shapley_brute(dataset: Dataset, tests: list[TestPoint],
                         oracle: GameOracle, *, limit: int = DEFAULT_ENUM_LIMIT,
                         keep_per_test: bool = False) -> ValuationResult:
    """Weighted marginal contributions over every subset of the dataset.

    The training budget is bounded by 2^|D| when the oracle caches fits, so
    datasets larger than ``limit`` points are refused.
    """
    n = len(dataset)
    if n > limit:
        raise SizeLimitError(f"brute force over {n} points exceeds limit {limit}")
    start = time.perf_counter()
    tids = sorted(t.id for t in tests)
    values = np.zeros(n)
    per_test = {t: np.zeros(n) for t in tids} if keep_per_test else None
    for z in range(n):
        others = tuple(i for i in range(n) if i != z)
        for combo in _subsets(others):
            s = Coalition(combo)
            u_without = oracle.evaluate_many(s, tids)
            u_with = oracle.evaluate_many(s.plus(z), tids)
            w = shapley_weight(n, len(combo), False)
            for t in tids:
                delta = w * (u_with[t] - u_without[t])
                values[z] += delta
                if per_test is not None:
                    per_test[t][z] += delta
    return _result(values, "oracle", oracle, start, per_test)


def local_baseline(dataset: Dataset, tests: list[TestPoint],
                   support_map: SupportMap, oracle: GameOracle, *,
                   enum_limit: int = DEFAULT_ENUM_LIMIT,
                   keep_per_test: bool = False) -> ValuationResult:
    """Per-test enumeration of support subsets with both marginal endpoints.

    Every marginal costs two utility evaluations and nothing is shared, so a
    test with support size s contributes exactly s * 2^s evaluations.
    """
    n = len(dataset)
    start = time.perf_counter()
    check_alignment(tests, support_map)
    values = np.zeros(n)
    per_test = {} if keep_per_test else None
    for t in sorted(tests, key=lambda p: p.id):
        support = tuple(sorted(support_map.of(t.id)))
        n_t = len(support)
        if n_t > enum_limit:
            raise SizeLimitError(
                f"support of test {t.id} has {n_t} points, limit {enum_limit}")
        if per_test is not None:
            per_test[t.id] = np.zeros(n)
        if n_t == 0:
            continue
        for z in support:
            others = tuple(i for i in support if i != z)
            for combo in _subsets(others):
                s = Coalition(combo)
                u_without = oracle.evaluate(s, t.id)
                u_with = oracle.evaluate(s.plus(z), t.id)
                delta = shapley_weight(n_t, len(combo), False) * (u_with - u_without)
                values[z] += delta
                if per_test is not None:
                    per_test[t.id][z] += delta
    return _result(values, "local-baseline", oracle, start, per_test)


def subset_centric(dataset: Dataset, tests: list[TestPoint],
                   support_map: SupportMap, oracle: GameOracle, *,
                   enum_limit: int = DEFAULT_ENUM_LIMIT,
                   keep_per_test: bool = False) -> ValuationResult:
    """One signed evaluation per support subset instead of two per marginal.

    Each subset updates every support member: positively with the
    with-member coefficient for members inside the subset, negatively with
    the without-member coefficient for the rest. A test with support size s
    costs exactly 2^s evaluations.
    """
    n = len(dataset)
    start = time.perf_counter()
    check_alignment(tests, support_map)
    values = np.zeros(n)
    per_test = {} if keep_per_test else None
    for t in sorted(tests, key=lambda p: p.id):
        support = tuple(sorted(support_map.of(t.id)))
        n_t = len(support)
        if n_t > enum_limit:
            raise SizeLimitError(
                f"support of test {t.id} has {n_t} points, limit {enum_limit}")
        if per_test is not None:
            per_test[t.id] = np.zeros(n)
        if n_t == 0:
            continue
        for combo in _subsets(support):
            u = oracle.evaluate(Coalition(combo), t.id)
            inside = set(combo)
            size = len(combo)
            for z in support:
                if z in inside:
                    delta = u * shapley_weight(n_t, size, True)
                else:
                    delta = -u * shapley_weight(n_t, size, False)
                values[z] += delta
                if per_test is not None:
                    per_test[t.id][z] += delta
    return _result(values, "subset-centric", oracle, start, per_test)


def lsmr(dataset: Dataset, tests: list[TestPoint], support_map: SupportMap,
         oracle: GameOracle, *, enum_limit: int = DEFAULT_ENUM_LIMIT,
         keep_per_test: bool = False, workers: int = 1) -> ValuationResult:
    """Subset-centric valuation with each distinct subset fitted once.

    Tests are processed in ascending id order. A subset enumerated at test t
    is evaluated only if t is its pivot (the first test whose support
    contains it); the evaluation then updates every eligible test at once.
    With a caching oracle the training count equals the number of distinct
    subsets across all support powersets.

    ``workers`` > 1 prefetches fits concurrently; accumulation stays in
    canonical order so the values are identical to the sequential run.
    """
    n = len(dataset)
    start = time.perf_counter()
    check_alignment(tests, support_map)
    reverse = build_reverse_index(support_map, n)
    supports = {t: tuple(sorted(support_map.of(t))) for t in support_map.test_ids}
    values = np.zeros(n)
    per_test = ({t: np.zeros(n) for t in support_map.test_ids}
                if keep_per_test else None)

    plan: list[tuple[Coalition, tuple[int, ...]]] = []
    for t in sorted(p.id for p in tests):
        support = supports[t]
        if len(support) > enum_limit:
            raise SizeLimitError(
                f"support of test {t} has {len(support)} points, "
                f"limit {enum_limit}")
        for combo in _subsets(support):
            s = Coalition(combo)
            eligible = eligible_tests(s, reverse)
            if eligible[0] != t:
                continue  # another test owns this subset
            plan.append((s, eligible))

    if workers > 1 and hasattr(oracle, "warm"):
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda item: oracle.warm(item[0]), plan))

    for s, eligible in plan:
        utilities = oracle.evaluate_many(s, eligible)
        size = len(s)
        inside = set(s.members)
        for t in eligible:
            support = supports[t]
            n_t = len(support)
            if n_t == 0:
                continue
            u = utilities[t]
            for z in support:
                if z in inside:
                    delta = u * shapley_weight(n_t, size, True)
                else:
                    delta = -u * shapley_weight(n_t, size, False)
                values[z] += delta
                if per_test is not None:
                    per_test[t][z] += delta
    return _result(values, "lsmr", oracle, start, per_test)


@dataclass(frozen=True)
class SubsetFamily:
    """The distinct subsets across all support powersets."""

    subsets: frozenset[Coalition]

    def __len__(self) -> int:
        return len(self.subsets)

    def __iter__(self) -> Iterator[Coalition]:
        return iter(sorted(self.subsets, key=lambda c: (len(c), c.members)))

    def __contains__(self, coalition: Coalition) -> bool:
        return coalition in self.subsets


def enumerate_distinct_subsets(support_map: SupportMap, *,
                               limit: int = DEFAULT_ENUM_LIMIT) -> SubsetFamily:
    """Union of the powersets of every support set, deduplicated."""
    seen: set[Coalition] = set()
    for t in support_map.test_ids:
        support = tuple(sorted(support_map.of(t)))
        if len(support) > limit:
            raise SizeLimitError(
                f"support of test {t} has {len(support)} points, limit {limit}")
        for combo in _subsets(support):
            seen.add(Coalition(combo))
    return SubsetFamily(frozenset(seen))


def subset_count_bound(support_map: SupportMap, num_training: int) -> int:
    """Upper bound on distinct subsets: min(sum of 2^support sizes, 2^|D|)."""
    by_support = sum(2 ** len(zs) for _, zs in support_map.items())
    return min(by_support, 2 ** num_training)
