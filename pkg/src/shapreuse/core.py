"""Core domain types for locality-aware Shapley data valuation.

A valuation run is built from a labeled training dataset, a test set, and a
support map recording which training points can influence each test
prediction. Coalitions of training points are canonical hashable keys, and
the utility cache memoizes the per-test utilities of every coalition that
has been fitted so no coalition is ever trained twice.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, Sequence

import numpy as np


class ValidationError(ValueError):
    """Malformed input: bad ids, labels, shapes, or configuration."""


class SizeLimitError(ValueError):
    """An exact enumeration was requested past its size limit."""


@dataclass(frozen=True)
class Coalition:
    """Canonical immutable subset of training-point ids.

    Members are stored as a strictly increasing tuple, so two coalitions with
    the same members always compare and hash equal.
    """

    members: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        m = self.members
        for i in range(1, len(m)):
            if m[i - 1] >= m[i]:
                raise ValidationError(
                    f"coalition members must be strictly increasing, got {m}"
                )

    @classmethod
    def of(cls, ids: Iterable[int]) -> "Coalition":
        return cls(tuple(sorted(set(int(i) for i in ids))))

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def __contains__(self, item: object) -> bool:
        return item in self.members

    def plus(self, member: int) -> "Coalition":
        """Coalition with one extra member."""
        if member in self.members:
            return self
        return Coalition(tuple(sorted(self.members + (member,))))

    def restrict(self, ids: frozenset[int] | set[int]) -> "Coalition":
        """Intersection with a set of ids, as a new coalition."""
        return Coalition(tuple(m for m in self.members if m in ids))


EMPTY_COALITION = Coalition()


@dataclass(frozen=True)
class TrainingPoint:
    id: int
    features: np.ndarray
    label: int


@dataclass(frozen=True)
class TestPoint:
    id: int
    features: np.ndarray
    label: int


class Dataset:
    """Training points with dense ids 0..n-1 and labels in 0..num_classes-1.

    Feature rows are stacked once into a float64 matrix; treat the contents
    as read-only and safe to share.
    """

    def __init__(self, points: Sequence[TrainingPoint], num_classes: int):
        if num_classes < 1:
            raise ValidationError("num_classes must be at least 1")
        ids = sorted(p.id for p in points)
        if ids != list(range(len(points))):
            raise ValidationError("training ids must be exactly 0..n-1")
        by_id = sorted(points, key=lambda p: p.id)
        dims = {np.asarray(p.features).shape for p in by_id}
        if len(points) and len(dims) != 1:
            raise ValidationError(f"feature dimensions differ: {sorted(dims)}")
        for p in by_id:
            if not 0 <= p.label < num_classes:
                raise ValidationError(
                    f"label {p.label} of point {p.id} outside 0..{num_classes - 1}"
                )
        self.points: tuple[TrainingPoint, ...] = tuple(by_id)
        self.num_classes = int(num_classes)
        if len(by_id):
            self.feature_matrix = np.ascontiguousarray(
                np.stack([np.asarray(p.features, dtype=np.float64) for p in by_id])
            )
        else:
            self.feature_matrix = np.zeros((0, 0))
        self.labels = np.asarray([p.label for p in by_id], dtype=np.int64)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def num_training(self) -> int:
        return len(self.points)

    @classmethod
    def from_arrays(cls, features: np.ndarray, labels: Sequence[int],
                    num_classes: int | None = None) -> "Dataset":
        features = np.asarray(features, dtype=np.float64)
        labels = [int(x) for x in labels]
        if features.ndim != 2 or features.shape[0] != len(labels):
            raise ValidationError("features must be 2-D with one row per label")
        if num_classes is None:
            num_classes = max(labels) + 1 if labels else 1
        pts = [TrainingPoint(i, features[i], labels[i]) for i in range(len(labels))]
        return cls(pts, num_classes)


def tests_from_arrays(features: np.ndarray, labels: Sequence[int]) -> list[TestPoint]:
    features = np.asarray(features, dtype=np.float64)
    return [TestPoint(i, features[i], int(labels[i])) for i in range(len(labels))]


class SupportMap:
    """Per-test support sets: which training points can move that test's score."""

    def __init__(self, supports: Mapping[int, Iterable[int]]):
        self._supports: dict[int, frozenset[int]] = {
            int(t): frozenset(int(z) for z in zs) for t, zs in supports.items()
        }

    def of(self, test_id: int) -> frozenset[int]:
        try:
            return self._supports[test_id]
        except KeyError:
            raise ValidationError(f"no support recorded for test id {test_id}") from None

    def size(self, test_id: int) -> int:
        return len(self.of(test_id))

    @property
    def test_ids(self) -> tuple[int, ...]:
        return tuple(sorted(self._supports))

    def items(self):
        return self._supports.items()

    def __len__(self) -> int:
        return len(self._supports)

    def __contains__(self, test_id: int) -> bool:
        return test_id in self._supports

    def validate(self, num_training: int, test_ids: Iterable[int] | None = None) -> None:
        """Check id ranges, and coverage of the given test ids if provided."""
        for t, zs in self._supports.items():
            for z in zs:
                if not 0 <= z < num_training:
                    raise ValidationError(
                        f"support of test {t} references training id {z} "
                        f"outside 0..{num_training - 1}"
                    )
        if test_ids is not None:
            missing = sorted(set(test_ids) - set(self._supports))
            if missing:
                raise ValidationError(f"support map missing test ids {missing}")


@dataclass(frozen=True)
class ReverseIndex:
    """For each training id, the set of tests whose support contains it."""

    reverse: dict[int, frozenset[int]]
    test_ids: tuple[int, ...]
    num_training: int

    def tests_of(self, training_id: int) -> frozenset[int]:
        try:
            return self.reverse[training_id]
        except KeyError:
            raise ValidationError(
                f"training id {training_id} outside 0..{self.num_training - 1}"
            ) from None


def build_reverse_index(support_map: SupportMap, num_training: int) -> ReverseIndex:
    support_map.validate(num_training)
    buckets: dict[int, set[int]] = {z: set() for z in range(num_training)}
    for t, zs in support_map.items():
        for z in zs:
            buckets[z].add(t)
    reverse = {z: frozenset(ts) for z, ts in buckets.items()}
    return ReverseIndex(reverse, support_map.test_ids, num_training)


def eligible_tests(coalition: Coalition, reverse: ReverseIndex,
                   all_tests: Sequence[int] | None = None) -> tuple[int, ...]:
    """Tests whose support contains every coalition member.

    The empty coalition is eligible for every test.
    """
    if all_tests is None:
        all_tests = reverse.test_ids
    if len(coalition) == 0:
        return tuple(sorted(all_tests))
    sets = sorted((reverse.tests_of(z) for z in coalition), key=len)
    out = set(sets[0])
    for s in sets[1:]:
        out &= s
        if not out:
            break
    out &= set(all_tests)
    return tuple(sorted(out))


def pivot(coalition: Coalition, reverse: ReverseIndex,
          ordering: Mapping[int, int] | None = None) -> int | None:
    """First eligible test under the processing order (ascending id by default).

    Returns None when no test's support contains the whole coalition.
    """
    elig = eligible_tests(coalition, reverse)
    if not elig:
        return None
    if ordering is None:
        return elig[0]
    return min(elig, key=lambda t: (ordering[t], t))


class UtilityCache:
    """Memoizes per-test utilities of fitted coalitions.

    Thread safe with an at-most-once fit guarantee: concurrent callers of
    :meth:`lookup_or_fit` for the same coalition block while the first one
    fits, then all receive the same entry. If the fit raises, the cache is
    unchanged and blocked callers retry.
    """

    def __init__(self, utility_bound: float = 1.0):
        if not utility_bound > 0:
            raise ValidationError("utility_bound must be positive")
        self.utility_bound = float(utility_bound)
        self._entries: dict[Coalition, dict[int, float]] = {}
        self._pending: dict[Coalition, threading.Event] = {}
        self._lock = threading.Lock()
        self._trainings = 0

    @property
    def trainings(self) -> int:
        return self._trainings

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, coalition: Coalition) -> bool:
        return coalition in self._entries

    def get(self, coalition: Coalition) -> dict[int, float] | None:
        return self._entries.get(coalition)

    @property
    def fitted_coalitions(self) -> tuple[Coalition, ...]:
        return tuple(self._entries)

    def lookup_or_fit(self, coalition: Coalition,
                      fit: Callable[[], Mapping[int, float]]) -> dict[int, float]:
        while True:
            with self._lock:
                entry = self._entries.get(coalition)
                if entry is not None:
                    return entry
                event = self._pending.get(coalition)
                if event is None:
                    event = threading.Event()
                    self._pending[coalition] = event
                    owner = True
                else:
                    owner = False
            if not owner:
                event.wait()
                continue
            try:
                utilities = {int(t): float(u) for t, u in dict(fit()).items()}
                for t, u in utilities.items():
                    if not abs(u) <= self.utility_bound:
                        raise ValidationError(
                            f"utility {u} for test {t} exceeds bound "
                            f"{self.utility_bound}"
                        )
            except BaseException:
                with self._lock:
                    del self._pending[coalition]
                event.set()
                raise
            with self._lock:
                self._entries[coalition] = utilities
                self._trainings += 1
                del self._pending[coalition]
            event.set()
            return utilities


def lookup_or_fit(cache: UtilityCache, coalition: Coalition,
                  fit: Callable[[], Mapping[int, float]]) -> dict[int, float]:
    """Function form of :meth:`UtilityCache.lookup_or_fit`."""
    return cache.lookup_or_fit(coalition, fit)


@dataclass
class ValuationResult:
    """Values plus run accounting.

    ``values`` has one entry per training id, including exact zeros for
    points outside every support. ``trainings`` counts model fits,
    ``evaluations`` counts utility evaluations, ``samples_used`` counts
    sampling rounds (0 for exact methods). ``per_test`` optionally keeps the
    per-test decomposition, and ``checkpoints`` records the convergence
    criterion at each check as (samples, criterion) pairs.
    """

    values: dict[int, float]
    method: str
    samples_used: int = 0
    trainings: int = 0
    evaluations: int = 0
    seed: int = 0
    elapsed: float = 0.0
    per_test: dict[int, dict[int, float]] | None = None
    checkpoints: list[tuple[int, float]] = field(default_factory=list)

    def values_array(self) -> np.ndarray:
        n = len(self.values)
        out = np.zeros(n)
        for z, v in self.values.items():
            out[z] = v
        return out
