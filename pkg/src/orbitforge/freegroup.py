"""Reduced words in a finitely generated free group and their finite actions.

Letters are signed generator indices: ``+k`` is the k-th generator (1-based),
``-k`` its inverse.  A finite action assigns one permutation per generator
and extends to words by composition.

Composition convention: ``evaluate(a, uv) = evaluate(a, u) ∘ evaluate(a, v)``
as functions, i.e. the leftmost letter acts last on the point.
"""

from __future__ import annotations

import string
from dataclasses import dataclass

import numpy as np

from .permutations import inverse_permutation, is_permutation
from .spaces import FiniteSpace, Observable

__all__ = [
    "GeneratorSet",
    "ReducedWord",
    "FiniteAction",
    "reduce_word",
    "ball",
    "evaluate",
    "refine_partition",
    "parse_word",
    "format_word",
]


@dataclass(frozen=True)
class GeneratorSet:
    """Free generators ``s_1..s_rank``; the symmetric alphabet adds inverses."""

    rank: int

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("need at least one generator")

    @property
    def letters(self) -> tuple[int, ...]:
        """All 2*rank signed letters, in the canonical order s1,s1^-1,s2,..."""
        out = []
        for k in range(1, self.rank + 1):
            out.extend((k, -k))
        return tuple(out)


@dataclass(frozen=True)
class ReducedWord:
    """Freely reduced word; empty tuple is the identity."""

    letters: tuple[int, ...] = ()

    def __post_init__(self):
        for prev, cur in zip(self.letters, self.letters[1:]):
            if prev == -cur:
                raise ValueError("word is not freely reduced")
        if any(v == 0 for v in self.letters):
            raise ValueError("letters are nonzero signed indices")

    def __len__(self) -> int:
        return len(self.letters)

    @property
    def is_identity(self) -> bool:
        return not self.letters

    def __str__(self) -> str:
        return format_word(self)


def reduce_word(letters) -> ReducedWord:
    """Freely reduce a letter sequence (cancel adjacent inverse pairs)."""
    stack: list[int] = []
    for v in letters:
        v = int(v)
        if v == 0:
            raise ValueError("letters are nonzero signed indices")
        if stack and stack[-1] == -v:
            stack.pop()
        else:
            stack.append(v)
    return ReducedWord(tuple(stack))


def _letter_key(v: int) -> tuple[int, int]:
    # s_k sorts before s_k^-1; generators in index order
    return (abs(v), 0 if v > 0 else 1)


def ball(gens: GeneratorSet | int, radius: int) -> list[ReducedWord]:
    """All reduced words of length <= radius, ordered by length then lex.

    Breadth-first extension that never appends the inverse of the last
    letter, so every word is produced exactly once.
    """
    rank = gens.rank if isinstance(gens, GeneratorSet) else int(gens)
    if rank < 1:
        raise ValueError("need at least one generator")
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    letters = GeneratorSet(rank).letters
    out: list[ReducedWord] = [ReducedWord()]
    frontier: list[tuple[int, ...]] = [()]
    for _ in range(radius):
        nxt: list[tuple[int, ...]] = []
        for w in frontier:
            for v in letters:
                if w and w[-1] == -v:
                    continue
                nxt.append(w + (v,))
        nxt.sort(key=lambda w: tuple(_letter_key(v) for v in w))
        out.extend(ReducedWord(w) for w in nxt)
        frontier = nxt
    return out


@dataclass(frozen=True)
class FiniteAction:
    """One permutation of ``{0..n-1}`` per free generator."""

    space: FiniteSpace
    perms: np.ndarray

    def __post_init__(self):
        perms = np.asarray(self.perms, dtype=np.int64)
        if perms.ndim != 2:
            raise ValueError("perms must be a (rank, n) array")
        if perms.shape[1] != self.space.n:
            raise ValueError("permutation size does not match the space")
        for row in perms:
            if not is_permutation(row):
                raise ValueError("every generator image must be a permutation")
        perms = np.ascontiguousarray(perms)
        perms.flags.writeable = False
        object.__setattr__(self, "perms", perms)

    @classmethod
    def from_perms(cls, perms) -> "FiniteAction":
        perms = np.asarray(perms, dtype=np.int64)
        if perms.ndim == 1:
            perms = perms[None, :]
        return cls(FiniteSpace(perms.shape[1]), perms)

    @property
    def rank(self) -> int:
        return int(self.perms.shape[0])

    @property
    def n(self) -> int:
        return self.space.n

    def generator(self, letter: int) -> np.ndarray:
        """Permutation of a signed letter (negative = inverse)."""
        k = abs(letter)
        if not 1 <= k <= self.rank:
            raise ValueError(f"letter {letter} outside rank {self.rank}")
        p = self.perms[k - 1]
        return p if letter > 0 else inverse_permutation(p)


def evaluate(a: FiniteAction, w: ReducedWord) -> np.ndarray:
    """Permutation of a word under the action (identity for the empty word)."""
    result = np.arange(a.n, dtype=np.int64)
    for letter in w.letters:
        # extend on the right: result := result ∘ generator
        result = result[a.generator(letter)]
    return result


def refine_partition(p: Observable, words, a: FiniteAction) -> Observable:
    """Common refinement of the translated partitions ``{g·P : g in words}``.

    Point x lands in the atom determined by its translated-label signature
    ``(P(g^{-1}x))_{g}``.  Atom ids are dense, numbered by first occurrence
    in point order, so the output is reproducible.
    """
    words = list(words)
    if not words:
        raise ValueError("need at least one word")
    n = p.n
    sig = np.empty((n, len(words)), dtype=np.int64)
    for col, g in enumerate(words):
        inv = inverse_permutation(evaluate(a, g))
        sig[:, col] = p.labels[inv]
    _, first_pos, inverse = np.unique(
        sig, axis=0, return_index=True, return_inverse=True
    )
    order = np.argsort(first_pos, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.shape[0])
    return Observable(rank[inverse.ravel()], int(order.shape[0]))


_LOWER = string.ascii_lowercase


def parse_word(text: str, rank: int) -> ReducedWord:
    """Parse ``"a B a"`` style words: lowercase generator, uppercase inverse."""
    text = text.strip()
    if text in ("", "e"):
        return ReducedWord()
    letters = []
    for tok in text.split():
        if len(tok) != 1 or tok.lower() not in _LOWER:
            raise ValueError(f"bad word token {tok!r}")
        idx = _LOWER.index(tok.lower()) + 1
        if idx > rank:
            raise ValueError(f"token {tok!r} exceeds rank {rank}")
        letters.append(idx if tok.islower() else -idx)
    return reduce_word(letters)


def format_word(w: ReducedWord) -> str:
    if w.is_identity:
        return "e"
    out = []
    for v in w.letters:
        ch = _LOWER[abs(v) - 1]
        out.append(ch if v > 0 else ch.upper())
    return " ".join(out)
