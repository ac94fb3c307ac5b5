"""Permutation utilities shared across the library.

Permutations are one-line numpy integer arrays: ``p[x]`` is the image of
point ``x``.  All helpers here are pure and never mutate their inputs.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "is_permutation",
    "inverse_permutation",
    "cycle_min_labels",
    "permutation_with_cycle_lengths",
]


def is_permutation(p: np.ndarray) -> bool:
    """True iff ``p`` is a one-line permutation of ``{0..len(p)-1}``."""
    p = np.asarray(p)
    n = p.shape[0]
    if p.ndim != 1 or n == 0:
        return n == 0 and p.ndim == 1
    if p.min() < 0 or p.max() >= n:
        return False
    return bool(np.bincount(p, minlength=n).max() == 1)


def inverse_permutation(p: np.ndarray) -> np.ndarray:
    """Inverse of a one-line permutation."""
    p = np.asarray(p)
    inv = np.empty_like(p)
    inv[p] = np.arange(p.shape[0], dtype=p.dtype)
    return inv


def cycle_min_labels(p: np.ndarray) -> np.ndarray:
    """Smallest point on each cycle, as a per-point label array.

    Two points get the same label iff they lie on the same cycle of ``p``,
    and the label is the minimum of that cycle.  Runs in O(n log n) via
    pointer doubling, with no Python-level loop over points.
    """
    p = np.asarray(p)
    n = p.shape[0]
    if n == 0:
        return p.copy()
    labels = np.arange(n, dtype=np.int64)
    jump = p.astype(np.int64, copy=True)
    # after k rounds each point has seen 2^k successive images
    rounds = max(1, int(np.ceil(np.log2(n))) if n > 1 else 1)
    for _ in range(rounds):
        labels = np.minimum(labels, labels[jump])
        jump = jump[jump]
    return labels


def permutation_with_cycle_lengths(lengths, rng: np.random.Generator) -> np.ndarray:
    """Random permutation whose cycle type is exactly ``lengths``.

    Points are shuffled once and then chained into consecutive cycles of the
    requested lengths; ``sum(lengths)`` is the number of points.
    """
    lengths = [int(v) for v in lengths]
    if any(v < 1 for v in lengths):
        raise ValueError("cycle lengths must be positive")
    n = sum(lengths)
    pts = rng.permutation(n)
    perm = np.empty(n, dtype=np.int64)
    start = 0
    for length in lengths:
        block = pts[start : start + length]
        perm[block] = np.roll(block, -1)
        start += length
    return perm
