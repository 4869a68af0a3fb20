"""Deterministic CART decision tree family.

Splits minimize Gini impurity over midpoint thresholds between consecutive
distinct feature values; ties resolve toward the smaller (feature index,
threshold) pair, so the same rows always grow the same tree. No pruning. The
support set of a test point is the set of training points routed to the same
parent node as the test point's leaf in the tree grown on the full dataset;
if that leaf is the root, every training point is in the support.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import Coalition, Dataset, SupportMap, TestPoint, ValidationError

_TIE_TOL = 1e-12


@dataclass
class _Node:
    ids: np.ndarray  # row ids routed to this node
    dist: np.ndarray  # class distribution of those rows
    feature: int = -1
    threshold: float = 0.0
    left: "_Node | None" = None
    right: "_Node | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None


def _class_counts(labels: np.ndarray, num_classes: int) -> np.ndarray:
    return np.bincount(labels, minlength=num_classes).astype(np.float64)


def _best_split(X: np.ndarray, y: np.ndarray, num_classes: int,
                min_leaf: int) -> tuple[int, float] | None:
    """Lowest-impurity (feature, midpoint threshold), or None if no valid split."""
    m, d = X.shape
    best = None
    best_score = np.inf
    for f in range(d):
        col = X[:, f]
        order = np.argsort(col, kind="stable")
        sorted_col = col[order]
        sorted_y = y[order]
        onehot = np.zeros((m, num_classes))
        onehot[np.arange(m), sorted_y] = 1.0
        prefix = np.cumsum(onehot, axis=0)
        total = prefix[-1]
        for i in range(m - 1):
            if sorted_col[i] == sorted_col[i + 1]:
                continue
            nl = i + 1
            nr = m - nl
            if nl < min_leaf or nr < min_leaf:
                continue
            left = prefix[i]
            right = total - left
            # weighted Gini, scaled by m: nl*(1 - sum p^2) + nr*(...)
            score = m - float(np.dot(left, left)) / nl - float(np.dot(right, right)) / nr
            if score < best_score - _TIE_TOL:
                best_score = score
                best = (f, float((sorted_col[i] + sorted_col[i + 1]) / 2.0))
    return best


def _grow(X: np.ndarray, y: np.ndarray, ids: np.ndarray, num_classes: int,
          depth: int, max_depth: int, min_split: int, min_leaf: int) -> _Node:
    counts = _class_counts(y, num_classes)
    node = _Node(ids=ids, dist=counts / counts.sum())
    pure = np.count_nonzero(counts) <= 1
    if depth >= max_depth or len(y) < min_split or pure:
        return node
    split = _best_split(X, y, num_classes, min_leaf)
    if split is None:
        return node
    f, thr = split
    go_left = X[:, f] <= thr
    node.feature = f
    node.threshold = thr
    node.left = _grow(X[go_left], y[go_left], ids[go_left], num_classes,
                      depth + 1, max_depth, min_split, min_leaf)
    node.right = _grow(X[~go_left], y[~go_left], ids[~go_left], num_classes,
                       depth + 1, max_depth, min_split, min_leaf)
    return node


def _route(root: _Node, x: np.ndarray) -> tuple[_Node, _Node | None]:
    """Leaf reached by x and that leaf's parent (None when the root is a leaf)."""
    node = root
    parent = None
    while not node.is_leaf:
        parent = node
        node = node.left if x[node.feature] <= node.threshold else node.right
    return node, parent


class TreeFamily:
    kind = "tree"

    def __init__(self, max_depth: int = 5, min_samples_split: int = 2,
                 min_samples_leaf: int = 1):
        for name, v in (("max_depth", max_depth),
                        ("min_samples_split", min_samples_split),
                        ("min_samples_leaf", min_samples_leaf)):
            if int(v) != v or v < 1:
                raise ValidationError(f"{name} must be a positive integer")
        self.max_depth = int(max_depth)
        self.min_samples_split = int(min_samples_split)
        self.min_samples_leaf = int(min_samples_leaf)

    def hyperparams(self) -> dict:
        return {
            "max_depth": self.max_depth,
            "min_samples_split": self.min_samples_split,
            "min_samples_leaf": self.min_samples_leaf,
        }

    def fit(self, dataset: Dataset, coalition: Coalition) -> "TreeFitted":
        ids = np.asarray(list(coalition), dtype=np.intp)
        if len(ids) == 0:
            return TreeFitted(self, None, dataset.num_classes)
        root = _grow(dataset.feature_matrix[ids], dataset.labels[ids], ids,
                     dataset.num_classes, 0, self.max_depth,
                     self.min_samples_split, self.min_samples_leaf)
        return TreeFitted(self, root, dataset.num_classes)

    def _reference_root(self, dataset: Dataset) -> _Node:
        return _grow(dataset.feature_matrix, dataset.labels,
                     np.arange(len(dataset), dtype=np.intp), dataset.num_classes,
                     0, self.max_depth, self.min_samples_split,
                     self.min_samples_leaf)

    def support(self, dataset: Dataset, test: TestPoint) -> frozenset[int]:
        root = self._reference_root(dataset)
        return self._support_from(root, test, len(dataset))

    def support_map(self, dataset: Dataset, tests: list[TestPoint]) -> SupportMap:
        root = self._reference_root(dataset)
        n = len(dataset)
        return SupportMap({t.id: self._support_from(root, t, n) for t in tests})

    @staticmethod
    def _support_from(root: _Node, test: TestPoint, num_training: int) -> frozenset[int]:
        _, parent = _route(root, np.asarray(test.features, dtype=np.float64))
        if parent is None:
            return frozenset(range(num_training))
        return frozenset(int(z) for z in parent.ids)


class TreeFitted:
    kind = "tree"

    def __init__(self, family: TreeFamily, root: _Node | None, num_classes: int):
        self.family = family
        self.root = root
        self.num_classes = num_classes

    def _leaf_dist(self, x: np.ndarray) -> np.ndarray:
        if self.root is None:
            return np.full(self.num_classes, 1.0 / self.num_classes)
        leaf, _ = _route(self.root, x)
        return leaf.dist

    def utilities(self, test_x: np.ndarray, test_y: np.ndarray) -> np.ndarray:
        test_x = np.asarray(test_x, dtype=np.float64)
        out = np.empty(len(test_y))
        for i in range(len(test_y)):
            out[i] = self._leaf_dist(test_x[i])[int(test_y[i])]
        return np.clip(out, 0.0, 1.0)

    def predict_many(self, test_x: np.ndarray) -> np.ndarray:
        test_x = np.asarray(test_x, dtype=np.float64)
        return np.asarray([int(np.argmax(self._leaf_dist(test_x[i])))
                           for i in range(test_x.shape[0])], dtype=np.int64)

    def utility(self, test: TestPoint) -> float:
        return float(self._leaf_dist(np.asarray(test.features, float))[test.label])

    def predict(self, test: TestPoint) -> int:
        return int(np.argmax(self._leaf_dist(np.asarray(test.features, float))))
