"""Scores for discovered orders and graphs."""

from __future__ import annotations

import numpy as np

from ._validation import ParameterError


def _adj(A) -> np.ndarray:
    A = getattr(A, "adj", A)
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ParameterError("adjacency must be square")
    return (A != 0).astype(np.int64)


def order_divergence(order, A) -> int:
    """Number of true edges ``u -> v`` whose source comes after its target in ``order``."""
    A = _adj(A)
    order = [int(i) for i in order]
    if sorted(order) != list(range(A.shape[0])):
        raise ParameterError(f"order {order} is not a permutation of {A.shape[0]} nodes")
    pos = np.empty(len(order), dtype=int)
    pos[order] = np.arange(len(order))
    src, dst = np.nonzero(A)
    return int(np.sum(pos[src] > pos[dst]))


def shd(A, B) -> int:
    """Structural Hamming distance with a reversal counted once.

    Each unordered node pair contributes 1 when its state (no edge, i -> j or
    j -> i) differs between the two graphs.
    """
    A, B = _adj(A), _adj(B)
    if A.shape != B.shape:
        raise ParameterError(f"graphs differ in size: {A.shape[0]} vs {B.shape[0]}")
    iu, ju = np.triu_indices(A.shape[0], k=1)
    state_a = A[iu, ju] - A[ju, iu]
    state_b = B[iu, ju] - B[ju, iu]
    both_a = A[iu, ju] & A[ju, iu]
    both_b = B[iu, ju] & B[ju, iu]
    return int(np.sum((state_a != state_b) | (both_a != both_b)))


def direction_accuracy(runs) -> float:
    """Fraction of ``(predicted, truth)`` pairs that agree."""
    runs = list(runs)
    if not runs:
        raise ParameterError("direction_accuracy needs at least one run")
    hits = sum(tuple(p) == tuple(t) for p, t in runs)
    return hits / len(runs)


def order_to_direction(order) -> tuple[int, int]:
    """For two nodes the first node of the order is the predicted cause."""
    order = list(order)
    if len(order) != 2:
        raise ParameterError("direction is only defined for two-node orders")
    return int(order[0]), int(order[1])
