"""Weighted k-nearest-neighbor family with a bounded reference neighborhood.

The support set of a test point is its 2k nearest training points under
Euclidean distance (ties toward the lower id). Scoring a coalition uses only
coalition members inside that neighborhood: the k nearest of them vote with
inverse-distance weights, and members outside the neighborhood carry zero
weight. The score therefore depends on the coalition only through its
intersection with the support set.
"""

from __future__ import annotations

import numpy as np

from .. import _kernels
from ..core import Coalition, Dataset, SupportMap, TestPoint, ValidationError


class WKNNFamily:
    kind = "wknn"

    def __init__(self, k: int = 5):
        if int(k) != k or k < 1:
            raise ValidationError("k must be a positive integer")
        self.k = int(k)

    def hyperparams(self) -> dict:
        return {"k": self.k}

    def fit(self, dataset: Dataset, coalition: Coalition) -> "WKNNFitted":
        return WKNNFitted(self, dataset, coalition)

    def support(self, dataset: Dataset, test: TestPoint) -> frozenset[int]:
        return frozenset(self._neighborhood(dataset, np.asarray(test.features, float)))

    def support_map(self, dataset: Dataset, tests: list[TestPoint]) -> SupportMap:
        return SupportMap({t.id: self.support(dataset, t) for t in tests})

    def _neighborhood(self, dataset: Dataset, x: np.ndarray) -> np.ndarray:
        """Ids of the 2k nearest training points, ties toward the lower id."""
        n = len(dataset)
        diff = dataset.feature_matrix - x
        dist = np.einsum("ij,ij->i", diff, diff)
        order = np.lexsort((np.arange(n), dist))
        return order[: min(2 * self.k, n)]

    def support_matrix(self, dataset: Dataset, tests: list[TestPoint]) -> np.ndarray:
        """Boolean (num tests, num training) reference-neighborhood matrix."""
        out = np.zeros((len(tests), len(dataset)), dtype=np.uint8)
        for row, t in enumerate(tests):
            out[row, self._neighborhood(dataset, np.asarray(t.features, float))] = 1
        return out


class WKNNFitted:
    kind = "wknn"

    def __init__(self, family: WKNNFamily, dataset: Dataset, coalition: Coalition):
        self.family = family
        self.dataset = dataset
        self.member_ids = np.asarray(list(coalition), dtype=np.intp)
        self.coal_x = np.ascontiguousarray(dataset.feature_matrix[self.member_ids])
        self.coal_y = np.ascontiguousarray(dataset.labels[self.member_ids])
        self.num_classes = dataset.num_classes

    def class_votes(self, test_x: np.ndarray, mask: np.ndarray) -> np.ndarray:
        return _kernels.wknn_votes(
            self.coal_x, self.coal_y, np.ascontiguousarray(test_x, dtype=np.float64),
            np.ascontiguousarray(mask, dtype=np.uint8), self.family.k,
            self.num_classes,
        )

    def utilities(self, test_x: np.ndarray, test_y: np.ndarray,
                  mask: np.ndarray) -> np.ndarray:
        votes = self.class_votes(test_x, mask)
        tot = votes.sum(axis=1)
        hit = votes[np.arange(len(test_y)), np.asarray(test_y, dtype=np.intp)]
        with np.errstate(invalid="ignore", divide="ignore"):
            u = np.where(tot > 0, hit / np.where(tot > 0, tot, 1.0),
                         1.0 / self.num_classes)
        return np.clip(u, 0.0, 1.0)

    def predict_many(self, test_x: np.ndarray, mask: np.ndarray) -> np.ndarray:
        # argmax takes the first maximum, so all-zero rows fall to class 0
        # and exact vote ties resolve toward the lower class id.
        return np.argmax(self.class_votes(test_x, mask), axis=1)

    def _mask_for(self, test: TestPoint) -> np.ndarray:
        support = self.family.support(self.dataset, test)
        mask = np.zeros((1, len(self.member_ids)), dtype=np.uint8)
        for j, z in enumerate(self.member_ids):
            if int(z) in support:
                mask[0, j] = 1
        return mask

    def utility(self, test: TestPoint) -> float:
        x = np.asarray(test.features, dtype=np.float64)[None, :]
        y = np.asarray([test.label])
        return float(self.utilities(x, y, self._mask_for(test))[0])

    def predict(self, test: TestPoint) -> int:
        x = np.asarray(test.features, dtype=np.float64)[None, :]
        return int(self.predict_many(x, self._mask_for(test))[0])
