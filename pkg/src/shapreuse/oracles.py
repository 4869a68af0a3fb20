"""Game oracles: coalition -> per-test utility, with cost accounting.

An oracle answers "what utility does coalition S earn on test t". Model
oracles fit a model family; table oracles look the answer up, which keeps
tests and synthetic games cheap. Every oracle counts ``trainings`` (model
fits) and ``evaluations`` (utility queries) and records the distinct
coalitions it has fitted. With a :class:`~shapreuse.core.UtilityCache`
attached, each distinct coalition is fitted at most once; without one, every
query fits afresh, which is the cost model of the enumeration baselines.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Protocol

import numpy as np

from .core import (
    Coalition,
    Dataset,
    SupportMap,
    TestPoint,
    UtilityCache,
    ValidationError,
)


class GameOracle(Protocol):
    """Minimal surface the valuation algorithms rely on."""

    trainings: int
    evaluations: int

    def evaluate(self, coalition: Coalition, test_id: int) -> float: ...

    def evaluate_many(self, coalition: Coalition,
                      test_ids: Iterable[int]) -> dict[int, float]: ...


class _CountingOracle:
    """Shared counter and cache plumbing for concrete oracles."""

    supports_prediction = False

    def __init__(self, cache: UtilityCache | None):
        self.cache = cache
        self._trainings = 0
        self.evaluations = 0
        # dict used as an ordered set so traces are deterministic
        self._fitted: dict[Coalition, None] = {}

    @property
    def trainings(self) -> int:
        return self.cache.trainings if self.cache is not None else self._trainings

    @property
    def fitted_coalitions(self) -> tuple[Coalition, ...]:
        if self.cache is not None:
            return self.cache.fitted_coalitions
        return tuple(self._fitted)

    def _compute(self, coalition: Coalition, test_ids: list[int]) -> dict[int, float]:
        raise NotImplementedError

    def _all_test_ids(self) -> list[int]:
        raise NotImplementedError

    def evaluate_many(self, coalition: Coalition,
                      test_ids: Iterable[int]) -> dict[int, float]:
        tids = [int(t) for t in test_ids]
        self.evaluations += len(tids)
        if self.cache is None:
            self._trainings += 1
            self._fitted.setdefault(coalition)
            return self._compute(coalition, tids)
        # cached fits cover every test so one entry can answer any later query
        entry = self.cache.lookup_or_fit(
            coalition, lambda: self._compute(coalition, self._all_test_ids()))
        return {t: entry[t] for t in tids}

    def evaluate(self, coalition: Coalition, test_id: int) -> float:
        return self.evaluate_many(coalition, [test_id])[int(test_id)]

    def warm(self, coalition: Coalition) -> None:
        """Populate the cache without counting evaluations (for prefetching)."""
        if self.cache is None:
            return
        self.cache.lookup_or_fit(
            coalition, lambda: self._compute(coalition, self._all_test_ids()))


class ModelOracle(_CountingOracle):
    """Utilities produced by fitting a model family on each coalition."""

    supports_prediction = True

    def __init__(self, family, dataset: Dataset, tests: list[TestPoint],
                 cache: UtilityCache | None = None):
        super().__init__(cache)
        self.family = family
        self.dataset = dataset
        self.tests = sorted(tests, key=lambda t: t.id)
        self._row = {t.id: i for i, t in enumerate(self.tests)}
        if len(self.tests):
            self._test_x = np.ascontiguousarray(
                np.stack([np.asarray(t.features, dtype=np.float64)
                          for t in self.tests]))
        else:
            self._test_x = np.zeros((0, dataset.feature_matrix.shape[1]))
        self._test_y = np.asarray([t.label for t in self.tests], dtype=np.int64)
        # the weighted-KNN score is restricted to each test's reference
        # neighborhood, so precompute the membership matrix once
        if family.kind == "wknn":
            self._ref_mask = family.support_matrix(dataset, self.tests)
        else:
            self._ref_mask = None

    def _rows(self, tids: list[int]) -> np.ndarray:
        try:
            return np.asarray([self._row[t] for t in tids], dtype=np.intp)
        except KeyError as exc:
            raise ValidationError(f"unknown test id {exc.args[0]}") from None

    def _all_test_ids(self) -> list[int]:
        return [t.id for t in self.tests]

    def _fit_and_score(self, coalition: Coalition, tids: list[int]):
        fitted = self.family.fit(self.dataset, coalition)
        rows = self._rows(tids)
        x = self._test_x[rows]
        y = self._test_y[rows]
        if self._ref_mask is not None:
            mask = np.ascontiguousarray(
                self._ref_mask[rows][:, fitted.member_ids], dtype=np.uint8)
            u = fitted.utilities(x, y, mask)
            preds = fitted.predict_many(x, mask)
        elif self.family.kind == "kernel":
            u = fitted.utilities(x, y)
            preds = fitted.predict_many(x)
        else:
            u = fitted.utilities(x, y)
            preds = fitted.predict_many(x)
        return u, preds

    def _compute(self, coalition: Coalition, tids: list[int]) -> dict[int, float]:
        u, _ = self._fit_and_score(coalition, tids)
        return {t: float(u[i]) for i, t in enumerate(tids)}

    def evaluate_and_predict(self, coalition: Coalition, test_ids: Iterable[int]
                             ) -> tuple[dict[int, float], dict[int, int]]:
        """One fit, returning utilities and argmax-class predictions.

        Always fits directly (no cache) since callers pair it with truncated
        scans whose cost model counts one training per evaluation step.
        """
        tids = [int(t) for t in test_ids]
        self._trainings += 1
        self._fitted.setdefault(coalition)
        self.evaluations += len(tids)
        u, preds = self._fit_and_score(coalition, tids)
        return ({t: float(u[i]) for i, t in enumerate(tids)},
                {t: int(preds[i]) for i, t in enumerate(tids)})


class TableOracle(_CountingOracle):
    """Utilities looked up in per-test tables keyed by coalition.

    With ``supports`` given, a lookup key is the coalition's intersection
    with the test's support set, which makes the game local by construction
    and lets a table over support subsets answer every coalition.
    """

    def __init__(self, tables: Mapping[int, Mapping[Coalition, float]],
                 supports: SupportMap | None = None,
                 cache: UtilityCache | None = None):
        super().__init__(cache)
        self.tables = {int(t): dict(tbl) for t, tbl in tables.items()}
        self.supports = supports

    def _all_test_ids(self) -> list[int]:
        return sorted(self.tables)

    def _compute(self, coalition: Coalition, tids: list[int]) -> dict[int, float]:
        out = {}
        for t in tids:
            try:
                table = self.tables[t]
            except KeyError:
                raise ValidationError(f"no utility table for test id {t}") from None
            key = coalition
            if self.supports is not None:
                key = coalition.restrict(self.supports.of(t))
            try:
                out[t] = float(table[key])
            except KeyError:
                raise ValidationError(
                    f"utility table for test {t} has no entry for "
                    f"{key.members}") from None
        return out


class ProjectedOracle:
    """View of another oracle where a coalition acts through its support.

    Evaluating coalition S on test t delegates to the inner oracle with
    S intersected with t's support set. Counters are the inner oracle's, so
    reuse across coalitions with equal projections shows up as cache hits.
    """

    supports_prediction = False

    def __init__(self, inner, supports: SupportMap):
        self.inner = inner
        self.supports = supports

    @property
    def trainings(self) -> int:
        return self.inner.trainings

    @property
    def evaluations(self) -> int:
        return self.inner.evaluations

    @property
    def fitted_coalitions(self):
        return self.inner.fitted_coalitions

    def evaluate_many(self, coalition: Coalition,
                      test_ids: Iterable[int]) -> dict[int, float]:
        buckets: dict[Coalition, list[int]] = {}
        for t in test_ids:
            key = coalition.restrict(self.supports.of(int(t)))
            buckets.setdefault(key, []).append(int(t))
        out: dict[int, float] = {}
        for key in sorted(buckets, key=lambda c: c.members):
            out.update(self.inner.evaluate_many(key, buckets[key]))
        return out

    def evaluate(self, coalition: Coalition, test_id: int) -> float:
        return self.evaluate_many(coalition, [test_id])[int(test_id)]
