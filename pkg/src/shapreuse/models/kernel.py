"""Gaussian-kernel voting family with a hard weight threshold.

A training point votes for its class with weight exp(-gamma * squared
distance); weights below tau are clamped to zero. The support set of a test
point is exactly the set of training points whose weight clears the
threshold, so a coalition's score depends only on its intersection with the
support set.
"""

from __future__ import annotations

import numpy as np

from .. import _kernels
from ..core import Coalition, Dataset, SupportMap, TestPoint, ValidationError


class KernelFamily:
    kind = "kernel"

    def __init__(self, gamma: float = 1.0, tau: float = 0.5):
        if not gamma > 0:
            raise ValidationError("gamma must be positive")
        if not 0 < tau <= 1:
            raise ValidationError("tau must be in (0, 1]")
        self.gamma = float(gamma)
        self.tau = float(tau)

    def hyperparams(self) -> dict:
        return {"gamma": self.gamma, "tau": self.tau}

    def fit(self, dataset: Dataset, coalition: Coalition) -> "KernelFitted":
        return KernelFitted(self, dataset, coalition)

    def support(self, dataset: Dataset, test: TestPoint) -> frozenset[int]:
        x = np.asarray(test.features, dtype=np.float64)
        diff = dataset.feature_matrix - x
        d2 = np.einsum("ij,ij->i", diff, diff)
        w = np.exp(-self.gamma * d2)
        return frozenset(int(z) for z in np.nonzero(w >= self.tau)[0])

    def support_map(self, dataset: Dataset, tests: list[TestPoint]) -> SupportMap:
        return SupportMap({t.id: self.support(dataset, t) for t in tests})


class KernelFitted:
    kind = "kernel"

    def __init__(self, family: KernelFamily, dataset: Dataset, coalition: Coalition):
        self.family = family
        member_ids = np.asarray(list(coalition), dtype=np.intp)
        self.member_ids = member_ids
        self.coal_x = np.ascontiguousarray(dataset.feature_matrix[member_ids])
        self.coal_y = np.ascontiguousarray(dataset.labels[member_ids])
        self.num_classes = dataset.num_classes

    def class_votes(self, test_x: np.ndarray) -> np.ndarray:
        return _kernels.kernel_votes(
            self.coal_x, self.coal_y, np.ascontiguousarray(test_x, dtype=np.float64),
            self.family.gamma, self.family.tau, self.num_classes,
        )

    def utilities(self, test_x: np.ndarray, test_y: np.ndarray) -> np.ndarray:
        votes = self.class_votes(test_x)
        tot = votes.sum(axis=1)
        hit = votes[np.arange(len(test_y)), np.asarray(test_y, dtype=np.intp)]
        u = np.where(tot > 0, hit / np.where(tot > 0, tot, 1.0),
                     1.0 / self.num_classes)
        return np.clip(u, 0.0, 1.0)

    def predict_many(self, test_x: np.ndarray) -> np.ndarray:
        return np.argmax(self.class_votes(test_x), axis=1)

    def utility(self, test: TestPoint) -> float:
        x = np.asarray(test.features, dtype=np.float64)[None, :]
        return float(self.utilities(x, np.asarray([test.label]))[0])

    def predict(self, test: TestPoint) -> int:
        x = np.asarray(test.features, dtype=np.float64)[None, :]
        return int(self.predict_many(x)[0])
