"""Weak-topology statistics and certified partition transport.

The statistics of an action against a partition are the intersection
measures ``mu(P_i ∩ g·P_j)``; two actions are close in the weak sense when
these numbers agree over a finite word set.  ``ball_transport_certificate``
carries a partition across an atom bijection on a ball refinement and
measures, claim by claim, how much each transported quantity drifts.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .freegroup import FiniteAction, ReducedWord, ball, evaluate, refine_partition
from .spaces import Observable

__all__ = [
    "StatsMatrix",
    "TransportCertificate",
    "stats_matrix",
    "kechris_distance",
    "weak_distance",
    "transport_partition",
    "ball_transport_certificate",
]


@dataclass(frozen=True)
class StatsMatrix:
    """Exact intersection statistics: entry (i,j) is ``#(P_i ∩ g·P_j)/denom``."""

    counts: np.ndarray
    denom: int
    word: ReducedWord

    @property
    def real(self) -> np.ndarray:
        return self.counts / self.denom

    def fraction(self, i: int, j: int) -> Fraction:
        return Fraction(int(self.counts[i, j]), self.denom)


def _translated_labels(p: Observable, perm: np.ndarray) -> np.ndarray:
    """Labels of the translated partition: point x gets ``P(perm^{-1} x)``."""
    out = np.empty_like(p.labels)
    out[perm] = p.labels
    return out


def stats_matrix(a: FiniteAction, p: Observable, g: ReducedWord) -> StatsMatrix:
    """Intersection counts of ``P`` with its translate ``g·P`` under ``a``."""
    if p.n != a.n:
        raise ValueError("partition size does not match the action")
    k = p.alphabet_size
    moved = _translated_labels(p, evaluate(a, g))
    cells = p.labels * k + moved
    counts = np.bincount(cells, minlength=k * k).reshape(k, k)
    return StatsMatrix(counts, p.n, g)


def _sparse_pair_counts(left: np.ndarray, right: np.ndarray, k: int):
    keys = left.astype(np.int64) * k + right
    return np.unique(keys, return_counts=True)


def _max_cell_diff(keys_p, cnt_p, n_p, keys_q, cnt_q, n_q) -> Fraction:
    """Max over cells of |c_p/n_p - c_q/n_q| without materializing k^2 cells."""
    all_keys = np.union1d(keys_p, keys_q)
    cp = np.zeros(all_keys.shape[0], dtype=np.int64)
    cq = np.zeros(all_keys.shape[0], dtype=np.int64)
    cp[np.searchsorted(all_keys, keys_p)] = cnt_p
    cq[np.searchsorted(all_keys, keys_q)] = cnt_q
    num = np.abs(cp * int(n_q) - cq * int(n_p))
    return Fraction(int(num.max()) if num.size else 0, int(n_p) * int(n_q))


def kechris_distance(
    v: FiniteAction,
    w: FiniteAction,
    p: Observable,
    q: Observable,
    words,
) -> float:
    """Largest disagreement of intersection statistics over a word set.

    Zero iff the statistics of ``(v, P)`` and ``(w, Q)`` agree exactly for
    every word; computed in exact integer arithmetic.
    """
    if p.alphabet_size != q.alphabet_size:
        raise ValueError("partitions must have the same atom count")
    k = p.alphabet_size
    worst = Fraction(0)
    for g in words:
        mv = _translated_labels(p, evaluate(v, g))
        mw = _translated_labels(q, evaluate(w, g))
        kp, cp = _sparse_pair_counts(p.labels, mv, k)
        kq, cq = _sparse_pair_counts(q.labels, mw, k)
        worst = max(worst, _max_cell_diff(kp, cp, p.n, kq, cq, q.n))
    return float(worst)


def weak_distance(t: np.ndarray, u: np.ndarray, sets, weights=None) -> float:
    """Weighted sum of symmetric differences ``sum_i w_i mu(tA_i Δ uA_i)``.

    ``sets`` is a finite family of index arrays; weights default to
    ``2^-(i+1)`` so the first set carries weight 1/2.
    """
    t = np.asarray(t)
    u = np.asarray(u)
    if t.shape != u.shape:
        raise ValueError("permutations must act on the same space")
    sets = list(sets)
    if not sets:
        raise ValueError("need a nonempty family of sets")
    if weights is None:
        weights = [2.0 ** -(i + 1) for i in range(len(sets))]
    n = t.shape[0]
    total = 0.0
    for w_i, subset in zip(weights, sets):
        subset = np.asarray(subset, dtype=np.int64)
        mt = np.zeros(n, dtype=bool)
        mu_ = np.zeros(n, dtype=bool)
        mt[t[subset]] = True
        mu_[u[subset]] = True
        total += w_i * (np.count_nonzero(mt ^ mu_) / n)
    return total


def _beta_partition(pprime: Observable, beta) -> Observable:
    """Normalize an atom bijection to an aligned image partition.

    An integer array permuting atom ids means: the image of atom ``i`` is
    the set of the atom labeled ``beta[i]`` (same underlying sets, relabeled).
    An Observable is taken as the image partition itself, already aligned so
    its atom ``i`` is the image of refinement atom ``i``.
    """
    k = pprime.alphabet_size
    if isinstance(beta, Observable):
        if beta.n != pprime.n or beta.alphabet_size != k:
            raise ValueError("beta is not a bijection on the refinement atoms")
        return beta
    beta = np.asarray(beta, dtype=np.int64)
    if beta.shape != (k,) or np.bincount(beta, minlength=k).max() != 1:
        raise ValueError("beta is not a bijection on the refinement atoms")
    inv = np.empty(k, dtype=np.int64)
    inv[beta] = np.arange(k)
    return Observable(inv[pprime.labels], k)


def _atom_parents(p: Observable, pprime: Observable) -> np.ndarray:
    """For each refinement atom, the coarse atom containing it."""
    _, first = np.unique(pprime.labels, return_index=True)
    parents = p.labels[first]
    if np.any(p.labels != parents[pprime.labels]):
        raise ValueError("partition does not refine the coarse partition")
    return parents


def transport_partition(p: Observable, pprime: Observable, beta) -> Observable:
    """Carry ``P`` across an atom bijection on its refinement.

    The transported atom ``Q_i`` is the union of beta-images of the
    refinement atoms inside ``P_i``.
    """
    qprime = _beta_partition(pprime, beta)
    parents = _atom_parents(p, pprime)
    return Observable(parents[qprime.labels], p.alphabet_size)


@dataclass(frozen=True)
class TransportCertificate:
    """Per-claim drift report for a ball transport.

    ``claim1_max`` bounds measure drift of transported atoms and their
    coarse unions; ``claim2_max_per_word`` measures, for each ball word g,
    how far the transported translate ``beta(g·P)`` sits from the translate
    of the transport ``g·beta(P)``.  The generator-level hypothesis is the
    quantity whose smallness makes the per-word bounds provable.
    """

    eps: float
    words: tuple[ReducedWord, ...]
    claim1_max: float
    claim2_max_per_word: dict[ReducedWord, float]
    hypothesis_max: float
    hypothesis_bound: float
    hypothesis_ok: bool
    final_discrepancy: float
    refinement_atoms: int

    def claim2_bound(self, g: ReducedWord) -> float:
        """Budget ``eps*|g| / (2*|F|)`` for each ball word."""
        return self.eps * len(g) / (2 * len(self.words))


def ball_transport_certificate(
    v: FiniteAction,
    w: FiniteAction,
    p: Observable,
    radius: int,
    beta,
    eps: float,
) -> TransportCertificate:
    """Verify a partition transport over a word ball, claim by claim.

    ``beta`` maps atoms of the ball refinement of ``P`` under ``v`` to atoms
    of an image partition (see ``transport_partition``).  The certificate is
    informational: out-of-bound values are reported, never raised.
    """
    if v.rank != w.rank or v.n != w.n:
        raise ValueError("actions must share rank and space")
    words = tuple(ball(v.rank, radius))
    pprime = refine_partition(p, words, v)
    qprime = _beta_partition(pprime, beta)
    parents = _atom_parents(p, pprime)
    q = Observable(parents[qprime.labels], p.alphabet_size)
    n = p.n
    kref = pprime.alphabet_size

    # Claim 1 on the refinement atoms and on the coarse unions they form.
    sizes_p = pprime.atom_sizes()
    sizes_q = qprime.atom_sizes()
    coarse_p = p.atom_sizes()
    coarse_q = q.atom_sizes()
    claim1 = max(
        int(np.max(np.abs(sizes_p - sizes_q))),
        int(np.max(np.abs(coarse_p - coarse_q))),
    )

    # Claim 2: beta extends to unions of refinement atoms, so beta(g·P_i) is
    # the union of image atoms whose preimages tile g·P_i.
    _, first = np.unique(pprime.labels, return_index=True)
    claim2: dict[ReducedWord, float] = {}
    kcoarse = p.alphabet_size
    for g in words:
        moved_p = _translated_labels(p, evaluate(v, g))
        atom_translate = moved_p[first]
        beta_image = atom_translate[qprime.labels]
        moved_q = _translated_labels(q, evaluate(w, g))
        mismatch = beta_image != moved_q
        lost = np.bincount(beta_image[mismatch], minlength=kcoarse)
        gained = np.bincount(moved_q[mismatch], minlength=kcoarse)
        worst = int(np.max(lost + gained)) if mismatch.any() else 0
        claim2[g] = worst / n

    # Generator-level hypothesis over the symmetric letter set.
    letters = []
    for k in range(1, v.rank + 1):
        letters.extend((ReducedWord((k,)), ReducedWord((-k,))))
    hyp = Fraction(0)
    for s in letters:
        mv = _translated_labels(pprime, evaluate(v, s))
        mw = _translated_labels(qprime, evaluate(w, s))
        kp, cp = _sparse_pair_counts(pprime.labels, mv, kref)
        kq, cq = _sparse_pair_counts(qprime.labels, mw, kref)
        hyp = max(hyp, _max_cell_diff(kp, cp, n, kq, cq, n))
    bound = eps / (kref * kref * len(words) * 4)

    return TransportCertificate(
        eps=eps,
        words=words,
        claim1_max=claim1 / n,
        claim2_max_per_word=claim2,
        hypothesis_max=float(hyp),
        hypothesis_bound=bound,
        hypothesis_ok=float(hyp) < bound,
        final_discrepancy=kechris_distance(v, w, p, q, words),
        refinement_atoms=kref,
    )
