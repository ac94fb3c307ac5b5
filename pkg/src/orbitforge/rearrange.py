"""Rearranging a labeled interval into a line with prescribed pair statistics.

Given labels ``phi`` on ``{0..N-1}`` and a target self-coupling ``J`` of the
label distribution, the pipeline produces a bijection
``sigma: {0..N-2} -> {1..N-1}`` whose pair graph is a single line from 0 to
N-1 and whose empirical pair distribution lands within
``2*|A|*eps + 3*|A|^2/N`` of ``J`` in sup norm, provided the empirical label
distribution sits within ``eps`` of the margins of ``J`` and ``J`` has
minimum entry above ``2*|A|*eps + |A|^2/N``.

Stages (each deterministic, each with its own certified drift):

1. ``round_coupling``   - snap ``J`` to exact counts over N with exact margins;
2. ``build_tau``        - realize the counts as a bijection via blockwise matching;
3. ``merge_components`` - swap edge images inside label cells until the pair
                          graph has at most ``|A|^2`` components (pair counts
                          are preserved exactly);
4. ``close_line``       - cyclically re-route one representative edge per
                          component, producing a single line.

Everything is vectorized; instances with N up to 10^6 run in milliseconds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .permutations import cycle_min_labels
from .spaces import (
    Coupling,
    Dist,
    Observable,
    empirical_distribution,
    empirical_pair_distribution,
    linf,
)

__all__ = [
    "PreconditionError",
    "LineBijection",
    "RearrangeReport",
    "round_coupling",
    "build_tau",
    "merge_components",
    "close_line",
    "rearrange_line",
]


class PreconditionError(ValueError):
    """A quantitative hypothesis failed; the message names the bound."""


@dataclass(frozen=True)
class LineBijection:
    """Bijection ``{0..n-2} -> {1..n-1}`` with pair graph edges (i, sigma[i]).

    Vertex 0 has no incoming edge and vertex n-1 no outgoing one; the graph
    is a disjoint union of one path from 0 to n-1 and cycles.  Connected
    instances are exactly the Hamiltonian orderings of the points.
    """

    n: int
    sigma: np.ndarray

    def __post_init__(self):
        sigma = np.asarray(self.sigma, dtype=np.int64)
        if self.n < 1 or sigma.shape != (self.n - 1,):
            raise ValueError("sigma must list n-1 images")
        if self.n > 1:
            if sigma.min() < 1 or sigma.max() > self.n - 1:
                raise ValueError("images must lie in {1..n-1}")
            if np.bincount(sigma, minlength=self.n).max() > 1:
                raise ValueError("sigma must be injective")
        sigma = np.ascontiguousarray(sigma)
        sigma.flags.writeable = False
        object.__setattr__(self, "sigma", sigma)

    def is_connected(self) -> bool:
        return _component_count(self.sigma) == 1

    def walk(self) -> np.ndarray:
        """Vertex order along the path from 0; length n iff connected."""
        out = [0]
        cur = 0
        images = self.sigma
        while cur < self.n - 1:
            cur = int(images[cur])
            out.append(cur)
        return np.asarray(out, dtype=np.int64)


@dataclass(frozen=True)
class RearrangeReport:
    """Outcome of one rearrangement: achieved sup-norm error vs. its budget."""

    achieved_error: float
    bound: float
    components_after_merge: int
    edges_changed_by_close: int


def _line_components(tau: np.ndarray) -> np.ndarray:
    # closing the missing edge (n-1 -> 0) turns the pair graph into a
    # permutation whose cycles are exactly the components
    ext = np.append(np.asarray(tau, dtype=np.int64), 0)
    return cycle_min_labels(ext)


def _component_count(tau: np.ndarray) -> int:
    if len(tau) == 0:
        return 1
    return int(np.unique(_line_components(tau)).shape[0])


def _margin_gap(j: Coupling, pi: Dist) -> float:
    target = pi.real
    return float(
        max(
            np.max(np.abs(j.row_margin() - target)),
            np.max(np.abs(j.col_margin() - target)),
        )
    )


def _repair_nonnegative(counts: np.ndarray) -> np.ndarray:
    """Clear negative cells by margin-preserving 2x2 rotations.

    Row and column sums are nonnegative, so a row or column holding a
    negative cell always holds a positive donor; every rotation reduces
    total negativity by at least one count, so the loop terminates.  Only
    reachable when the rounding preconditions were waived.
    """
    while True:
        neg = np.argwhere(counts < 0)
        if neg.size == 0:
            return counts
        r, c = int(neg[0][0]), int(neg[0][1])
        row_donors = np.flatnonzero(counts[r] > 0)
        col_donors = np.flatnonzero(counts[:, c] > 0)
        cc, rr = int(row_donors[0]), int(col_donors[0])
        delta = int(min(-counts[r, c], counts[r, cc], counts[rr, c]))
        counts[r, c] += delta
        counts[r, cc] -= delta
        counts[rr, c] -= delta
        counts[rr, cc] += delta


def round_coupling(
    j: Coupling, pi_prime: Dist, eps: float, *, check: bool = True
) -> Coupling:
    """Snap a coupling to exact counts over N with margins exactly ``pi_prime``.

    Entries away from the distinguished symbol 0 are rounded to the nearest
    multiple of 1/N (ties toward the smaller value); the distinguished row
    and column absorb the margin defects.  Under the stated preconditions
    every entry stays nonnegative and the sup-norm drift is below
    ``2*|A|*eps + |A|^2/N``.
    """
    a = j.alphabet_size
    if pi_prime.alphabet_size != a:
        raise ValueError("alphabet mismatch between coupling and margins")
    n = pi_prime.denom
    if check:
        gap = _margin_gap(j, pi_prime)
        if not gap < eps:
            raise PreconditionError(
                f"margin distance {gap:.6g} is not below eps={eps:.6g}"
            )
        need = 2 * a * eps + a * a / n
        jmin = float(j.real.min())
        if not jmin > need:
            raise PreconditionError(
                f"min coupling entry {jmin:.6g} is not above "
                f"2|A|eps + |A|^2/N = {need:.6g}"
            )
    pi = pi_prime.counts.astype(np.int64)
    if a == 1:
        return Coupling.from_counts(np.array([[n]], dtype=np.int64), n)
    counts = np.ceil(j.real * n - 0.5).astype(np.int64)
    counts[0, 1:] = pi[1:] - counts[1:, 1:].sum(axis=0)
    counts[1:, 0] = pi[1:] - counts[1:, 1:].sum(axis=1)
    counts[0, 0] = pi[0] - counts[0, 1:].sum()
    counts = _repair_nonnegative(counts)
    return Coupling.from_counts(counts, n)


def build_tau(phi: Observable, j_prime: Coupling) -> np.ndarray:
    """Realize exact pair counts as a bijection ``{0..N-2} -> {1..N-1}``.

    Points of each label are split, in ascending order, into source blocks
    (by target label) and target blocks (by source label) of sizes
    ``N*J'(a,b)``; matching each source block to its target block rotated by
    one gives a permutation beta of all N points (the rotation makes, e.g.,
    constant labels produce the consecutive line directly).  Dropping the
    outgoing edge of N-1 and re-routing the preimage of 0 to beta(N-1)
    perturbs at most one edge and yields the bijection, so its pair
    distribution sits within ``2/(N-1)`` of ``J'``.
    """
    n = phi.n
    a = phi.alphabet_size
    if not j_prime.is_exact or j_prime.denom != n:
        raise ValueError("need an exact coupling with denominator N")
    counts = j_prime.counts
    sizes = phi.atom_sizes()
    if not (
        np.array_equal(counts.sum(axis=1), sizes)
        and np.array_equal(counts.sum(axis=0), sizes)
    ):
        raise PreconditionError("coupling margins must equal the label counts")
    by_label = np.argsort(phi.labels, kind="stable")
    block_start = np.concatenate(([0], np.cumsum(sizes)))
    # target block of cell (a,b) sits inside label-b points, after the cells
    # (a', b) with a' < a
    col_offsets = block_start[:-1][None, :] + np.vstack(
        (np.zeros(a, dtype=np.int64), np.cumsum(counts, axis=0)[:-1])
    )
    pieces = [
        np.roll(by_label[col_offsets[r, c] : col_offsets[r, c] + counts[r, c]], -1)
        for r in range(a)
        for c in range(a)
    ]
    target = np.concatenate(pieces) if pieces else by_label[:0]
    beta = np.empty(n, dtype=np.int64)
    beta[by_label] = target
    if n == 1:
        return beta[:0]
    tau = beta[: n - 1].copy()
    i0 = int(np.flatnonzero(beta == 0)[0])
    if i0 != n - 1:
        tau[i0] = beta[n - 1]
    return tau


class _UnionFind:
    __slots__ = ("parent",)

    def __init__(self):
        self.parent: dict[int, int] = {}

    def find(self, x: int) -> int:
        p = self.parent
        root = x
        while p.get(root, root) != root:
            root = p[root]
        while p.get(x, x) != x:
            p[x], x = root, p[x]
        return root

    def union(self, x: int, y: int) -> None:
        self.parent[self.find(x)] = self.find(y)


def _merge(phi_labels: np.ndarray, a: int, tau: np.ndarray):
    m = tau.shape[0]
    tau = tau.copy()
    if m == 0:
        return tau, 1
    comp = _line_components(tau)
    n_comp = int(np.unique(comp).shape[0])
    cells = phi_labels[:m] * a + phi_labels[tau]
    order = np.argsort(cells, kind="stable")
    cuts = np.flatnonzero(np.diff(cells[order])) + 1
    uf = _UnionFind()
    for group in np.split(order, cuts):
        if group.shape[0] < 2:
            continue
        uniq, first = np.unique(comp[group], return_index=True)
        if uniq.shape[0] < 2:
            continue
        candidates = sorted(
            (int(group[f]), int(c)) for f, c in zip(first, uniq)
        )
        anchor_edge, anchor_comp = candidates[0]
        for edge, c in candidates[1:]:
            if uf.find(c) != uf.find(anchor_comp):
                tau[anchor_edge], tau[edge] = tau[edge], tau[anchor_edge]
                uf.union(c, anchor_comp)
                n_comp -= 1
    return tau, n_comp


def merge_components(phi: Observable, tau: np.ndarray) -> np.ndarray:
    """Connect pair-graph components without touching pair counts.

    Two edges whose endpoints carry the same label pair may swap images;
    when the edges lie in different components the swap merges them.  Edges
    are bucketed by label pair and, per bucket, swapped against the
    smallest edge, so the component count drops to at most ``|A|^2``.
    """
    tau_star, _ = _merge(phi.labels, phi.alphabet_size, np.asarray(tau, np.int64))
    return tau_star


def _close(tau: np.ndarray):
    m = tau.shape[0]
    if m == 0:
        return tau.copy(), 1, 0
    comp = _line_components(tau)
    uniq, first = np.unique(comp[:m], return_index=True)
    k = int(uniq.shape[0])
    if k == 1:
        return tau.copy(), 1, 0
    reps = np.sort(first)
    sigma = tau.copy()
    sigma[reps] = tau[np.roll(reps, -1)]
    return sigma, k, k


def close_line(tau: np.ndarray) -> LineBijection:
    """Re-route one representative edge per component into a single line.

    Representatives are the smallest out-edge vertex of each component
    (vertex N-1 never qualifies); shifting their images cyclically chains
    the components into one path from 0 to N-1, changing exactly k edges.
    """
    tau = np.asarray(tau, dtype=np.int64)
    sigma, _, _ = _close(tau)
    return LineBijection(tau.shape[0] + 1, sigma)


def rearrange_line(
    phi: Observable, j: Coupling, eps: float, *, check: bool = True
) -> tuple[LineBijection, RearrangeReport]:
    """Full pipeline: round, realize, merge, close; certified sup-norm error.

    Deterministic in all inputs.  With ``check=False`` the quantitative
    preconditions are waived: the stages still produce a connected line, but
    the reported bound is no longer guaranteed to hold.
    """
    n = phi.n
    if n < 2:
        raise PreconditionError("need at least two points to build a line")
    a = j.alphabet_size
    if phi.alphabet_size != a:
        raise ValueError("alphabet mismatch between labels and coupling")
    pi_prime = empirical_distribution(phi)
    j_rounded = round_coupling(j, pi_prime, eps, check=check)
    tau = build_tau(phi, j_rounded)
    tau_star, n_comp = _merge(phi.labels, a, tau)
    sigma_arr, _, edges_changed = _close(tau_star)
    sigma = LineBijection(n, sigma_arr)
    achieved = linf(empirical_pair_distribution(phi, sigma), j)
    bound = 2 * a * eps + 3 * a * a / n
    return sigma, RearrangeReport(achieved, bound, n_comp, edges_changed)
