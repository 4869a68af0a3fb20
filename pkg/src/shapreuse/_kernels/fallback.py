"""Pure numpy vote kernels, used when the compiled extension is unavailable."""

from __future__ import annotations

import numpy as np

DISTANCE_GUARD = 1e-12


def wknn_votes(coal_x: np.ndarray, coal_y: np.ndarray, test_x: np.ndarray,
               mask: np.ndarray, k: int, num_classes: int) -> np.ndarray:
    """Inverse-distance class votes from the k nearest unmasked members.

    ``mask[i, j]`` marks coalition member j as usable for test row i. Ties in
    distance resolve toward the lower member position.
    """
    T = test_x.shape[0]
    votes = np.zeros((T, num_classes))
    m = coal_x.shape[0]
    if m == 0:
        return votes
    for i in range(T):
        idx = np.nonzero(mask[i])[0]
        if idx.size == 0:
            continue
        diff = coal_x[idx] - test_x[i]
        dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        take = min(k, idx.size)
        order = np.lexsort((idx, dist))[:take]
        sel = idx[order]
        w = 1.0 / (dist[order] + DISTANCE_GUARD)
        np.add.at(votes[i], coal_y[sel], w)
    return votes


def kernel_votes(coal_x: np.ndarray, coal_y: np.ndarray, test_x: np.ndarray,
                 gamma: float, tau: float, num_classes: int) -> np.ndarray:
    """Gaussian-kernel class votes with a hard weight threshold.

    Weights below ``tau`` are clamped to zero, so members outside the kernel
    neighborhood of a test row contribute nothing.
    """
    T = test_x.shape[0]
    votes = np.zeros((T, num_classes))
    m = coal_x.shape[0]
    if m == 0:
        return votes
    for i in range(T):
        diff = coal_x - test_x[i]
        d2 = np.einsum("ij,ij->i", diff, diff)
        w = np.exp(-gamma * d2)
        w[w < tau] = 0.0
        np.add.at(votes[i], coal_y, w)
    return votes
