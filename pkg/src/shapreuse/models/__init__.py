"""Model families: weighted KNN, thresholded Gaussian kernel, decision tree.

Each family knows how to fit a coalition of training points, score a test
point with the probability assigned to its true label, and extract the
support set of a test point (the training points that can change its score).
Fitting the empty coalition yields the prior model, which spreads mass
uniformly over the classes.
"""

from __future__ import annotations

from ..core import Dataset, SupportMap, TestPoint, ValidationError
from .kernel import KernelFamily
from .tree import TreeFamily
from .wknn import WKNNFamily

FAMILY_KINDS = ("wknn", "kernel", "tree")


def make_family(kind: str, **hyperparams):
    """Build a model family from its kind name and hyperparameters."""
    if kind == "wknn":
        return WKNNFamily(**hyperparams)
    if kind == "kernel":
        return KernelFamily(**hyperparams)
    if kind == "tree":
        return TreeFamily(**hyperparams)
    raise ValidationError(f"unknown model family {kind!r}, expected one of {FAMILY_KINDS}")


def build_support_map(family, dataset: Dataset, tests: list[TestPoint]) -> SupportMap:
    """Support sets of every test point under the given family."""
    return family.support_map(dataset, tests)


__all__ = [
    "FAMILY_KINDS",
    "KernelFamily",
    "TreeFamily",
    "WKNNFamily",
    "build_support_map",
    "make_family",
]
