"""Finite probability spaces, observables, distributions and couplings.

Everything lives on the uniform measure over ``{0..n-1}``.  Distributions
and couplings carry an exact integer-count view wherever they are built by
counting; analysis-side objects (mixtures) fall back to a real view.  All
values are immutable after construction and safe to share across workers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "FiniteSpace",
    "Observable",
    "Dist",
    "Coupling",
    "empirical_distribution",
    "joint_pair_distribution",
    "empirical_pair_distribution",
    "linf",
    "product_coupling",
    "diagonal_coupling",
    "mixture_coupling",
    "coupling_margins_check",
]

# ℓ∞ tolerance for real-valued (non exact-count) comparisons.
REAL_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class FiniteSpace:
    """Uniform probability space on ``{0..n-1}``; each point has mass 1/n."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("a finite space needs at least one point")

    def measure(self, subset) -> Fraction:
        """Exact measure |S|/n of a subset given as an index array."""
        return Fraction(len(np.unique(np.asarray(subset))), self.n)


@dataclass(frozen=True)
class Observable:
    """A labeling of points by a finite alphabet ``{0..alphabet_size-1}``.

    Represents both measurable maps into a finite set and finite partitions
    (atom ``i`` is the preimage of label ``i``; atoms may be empty).
    """

    labels: np.ndarray
    alphabet_size: int

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.ndim != 1:
            raise ValueError("labels must be a 1-d array")
        if self.alphabet_size < 1:
            raise ValueError("alphabet must have at least one symbol")
        if labels.size and (labels.min() < 0 or labels.max() >= self.alphabet_size):
            raise ValueError("label out of alphabet range")
        object.__setattr__(self, "labels", _frozen(labels))

    @classmethod
    def from_labels(cls, labels, alphabet_size: int | None = None) -> "Observable":
        labels = np.asarray(labels, dtype=np.int64)
        if alphabet_size is None:
            alphabet_size = int(labels.max()) + 1 if labels.size else 1
        return cls(labels, alphabet_size)

    @classmethod
    def constant(cls, n: int) -> "Observable":
        return cls(np.zeros(n, dtype=np.int64), 1)

    @classmethod
    def from_atoms(cls, atoms, n: int) -> "Observable":
        """Build a partition observable from a list of disjoint index sets."""
        labels = np.full(n, -1, dtype=np.int64)
        for i, atom in enumerate(atoms):
            atom = np.asarray(atom, dtype=np.int64)
            if np.any(labels[atom] >= 0):
                raise ValueError("atoms overlap")
            labels[atom] = i
        if np.any(labels < 0):
            raise ValueError("atoms do not cover the space")
        return cls(labels, len(atoms))

    @property
    def n(self) -> int:
        return int(self.labels.shape[0])

    def atom_sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.alphabet_size)

    def atom(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.labels == i)


@dataclass(frozen=True)
class Dist:
    """Probability distribution on a finite alphabet, as exact counts/denom."""

    counts: np.ndarray
    denom: int

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 1 or counts.size < 1:
            raise ValueError("counts must be a nonempty 1-d array")
        if self.denom < 1:
            raise ValueError("denominator must be positive")
        if counts.min() < 0:
            raise ValueError("counts must be nonnegative")
        if int(counts.sum()) != self.denom:
            raise ValueError("counts must sum to the denominator")
        object.__setattr__(self, "counts", _frozen(counts))

    @property
    def alphabet_size(self) -> int:
        return int(self.counts.shape[0])

    @property
    def real(self) -> np.ndarray:
        return self.counts / self.denom

    def fraction(self, a: int) -> Fraction:
        return Fraction(int(self.counts[a]), self.denom)


@dataclass(frozen=True)
class Coupling:
    """Probability matrix on ``A x A`` with its two margins.

    Exact couplings store integer ``counts`` over a common ``denom``;
    real couplings store only the float matrix.  Constructive targets stay
    exact; analysis-side mixtures are real.
    """

    entries: np.ndarray
    counts: np.ndarray | None = None
    denom: int | None = None

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.float64)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError("coupling must be a square matrix")
        if entries.size and entries.min() < 0:
            raise ValueError("coupling entries must be nonnegative")
        if self.counts is not None:
            counts = np.asarray(self.counts, dtype=np.int64)
            if counts.shape != entries.shape or self.denom is None or self.denom < 1:
                raise ValueError("count view inconsistent with entries")
            if int(counts.sum()) != self.denom:
                raise ValueError("counts must sum to the denominator")
            object.__setattr__(self, "counts", _frozen(counts))
        elif abs(float(entries.sum()) - 1.0) > REAL_TOL:
            raise ValueError("coupling entries must sum to 1")
        object.__setattr__(self, "entries", _frozen(entries))

    @classmethod
    def from_counts(cls, counts, denom: int) -> "Coupling":
        counts = np.asarray(counts, dtype=np.int64)
        return cls(counts / denom, counts, denom)

    @classmethod
    def from_probs(cls, matrix) -> "Coupling":
        return cls(np.asarray(matrix, dtype=np.float64))

    @property
    def is_exact(self) -> bool:
        return self.counts is not None

    @property
    def alphabet_size(self) -> int:
        return int(self.entries.shape[0])

    @property
    def real(self) -> np.ndarray:
        return self.entries

    def row_margin(self) -> np.ndarray:
        return self.entries.sum(axis=1)

    def col_margin(self) -> np.ndarray:
        return self.entries.sum(axis=0)

    def row_counts(self) -> Dist:
        if not self.is_exact:
            raise ValueError("real coupling has no count view")
        return Dist(self.counts.sum(axis=1), self.denom)

    def col_counts(self) -> Dist:
        if not self.is_exact:
            raise ValueError("real coupling has no count view")
        return Dist(self.counts.sum(axis=0), self.denom)


def empirical_distribution(phi: Observable) -> Dist:
    """Symbol frequencies of an observable: counts over n, exactly."""
    return Dist(phi.atom_sizes(), phi.n)


def joint_pair_distribution(phi: Observable, perm: np.ndarray) -> Coupling:
    """Distribution of the pair ``(phi(x), phi(perm(x)))`` over all n points."""
    perm = np.asarray(perm)
    if perm.shape[0] != phi.n:
        raise ValueError("permutation size does not match observable")
    a = phi.alphabet_size
    cells = phi.labels * a + phi.labels[perm]
    counts = np.bincount(cells, minlength=a * a).reshape(a, a)
    return Coupling.from_counts(counts, phi.n)


def empirical_pair_distribution(phi: Observable, sigma) -> Coupling:
    """Pair distribution along the N-1 edges of a line bijection.

    ``sigma`` may be a LineBijection or a raw image array of length N-1 with
    values in ``{1..N-1}``.  The denominator is the edge count N-1.
    """
    images = np.asarray(getattr(sigma, "sigma", sigma), dtype=np.int64)
    n = phi.n
    if images.shape[0] != n - 1:
        raise ValueError("line bijection size does not match observable")
    if n < 2:
        raise ValueError("need at least two points for a pair distribution")
    a = phi.alphabet_size
    cells = phi.labels[: n - 1] * a + phi.labels[images]
    counts = np.bincount(cells, minlength=a * a).reshape(a, a)
    return Coupling.from_counts(counts, n - 1)


def _count_view(p):
    if isinstance(p, Dist):
        return p.counts, p.denom
    if isinstance(p, Coupling) and p.is_exact:
        return p.counts, p.denom
    return None


def _real_view(p) -> np.ndarray:
    if isinstance(p, (Dist, Coupling)):
        return p.real
    return np.asarray(p, dtype=np.float64)


def linf(p, q) -> float:
    """Entrywise ℓ∞ distance between distributions, couplings or arrays.

    Exact integer arithmetic when both operands carry count views (the
    result is the correctly rounded float of the exact rational); plain
    float arithmetic otherwise.
    """
    cp, cq = _count_view(p), _count_view(q)
    if cp is not None and cq is not None:
        ap, dp = cp
        aq, dq = cq
        if ap.shape != aq.shape:
            raise ValueError("shape mismatch")
        num = 0
        for x, y in zip(ap.ravel().tolist(), aq.ravel().tolist()):
            num = max(num, abs(x * dq - y * dp))
        return float(Fraction(num, dp * dq))
    rp, rq = _real_view(p), _real_view(q)
    if rp.shape != rq.shape:
        raise ValueError("shape mismatch")
    if rp.size == 0:
        return 0.0
    return float(np.max(np.abs(rp - rq)))


def product_coupling(pi: Dist) -> Coupling:
    """Independent self-coupling ``pi x pi``, exact over denom squared."""
    c = pi.counts.astype(np.int64)
    return Coupling.from_counts(np.outer(c, c), pi.denom * pi.denom)


def diagonal_coupling(pi: Dist) -> Coupling:
    """Identity self-coupling: all mass on the diagonal."""
    return Coupling.from_counts(np.diag(pi.counts), pi.denom)


def coupling_margins_check(j: Coupling, pi: Dist, tol: float = REAL_TOL) -> bool:
    """True iff both margins of ``j`` equal ``pi`` (exactly in count view)."""
    if j.alphabet_size != pi.alphabet_size:
        return False
    if j.is_exact:
        rows = j.counts.sum(axis=1).tolist()
        cols = j.counts.sum(axis=0).tolist()
        target = pi.counts.tolist()
        dj, dp = j.denom, pi.denom
        return all(r * dp == t * dj for r, t in zip(rows, target)) and all(
            c * dp == t * dj for c, t in zip(cols, target)
        )
    target = pi.real
    return bool(
        np.max(np.abs(j.row_margin() - target)) <= tol
        and np.max(np.abs(j.col_margin() - target)) <= tol
    )


def mixture_coupling(c: Coupling, eps: float, pi: Dist) -> Coupling:
    """Blend ``(1-eps)*c + eps*(pi x pi)``; margins stay ``pi``.

    Fully supported ``pi`` and ``eps > 0`` make every entry positive, which
    is what downstream rounding needs.
    """
    if not 0.0 <= eps <= 1.0:
        raise ValueError("mixture weight must lie in [0, 1]")
    if not coupling_margins_check(c, pi):
        raise ValueError("coupling margins do not match the mixing distribution")
    prod = product_coupling(pi)
    return Coupling.from_probs((1.0 - eps) * c.real + eps * prod.real)
