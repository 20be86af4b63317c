"""Braid (Hurwitz) moves on tuples of group elements and orbit sections.

A braid word is a tuple of nonzero ints in *application order*: ``+i`` is
the move sigma_i, ``-i`` its inverse, and the first entry acts first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .aut import AutGroup
from .groups import ClassData, FiniteGroup

BraidWord = tuple[int, ...]


class SetNotInvariant(AssertionError):
    """A generator moved a tuple outside the set being partitioned."""


def apply_sigma(G: FiniteGroup, t: Sequence[int], i: int, sign: int = 1) -> tuple[int, ...]:
    """``sigma_i^{sign}`` on a tuple; ``i`` is 1-based.

    ``sigma_i`` replaces ``(g_i, g_{i+1})`` by ``(g_i g_{i+1} g_i^-1, g_i)`` and
    its inverse by ``(g_{i+1}, g_{i+1}^-1 g_i g_{i+1})``.
    """
    r = len(t)
    if not 1 <= i <= r - 1:
        raise IndexError(f"braid generator index {i} out of range for r={r}")
    mul, inv = G.mul, G.inverse
    a, b = t[i - 1], t[i]
    out = list(t)
    if sign > 0:
        out[i - 1] = mul[mul[a][b]][inv[a]]
        out[i] = a
    else:
        out[i - 1] = b
        out[i] = mul[mul[inv[b]][a]][b]
    return tuple(out)


def apply_word(G: FiniteGroup, t: Sequence[int], word: BraidWord) -> tuple[int, ...]:
    t = tuple(t)
    for move in word:
        t = apply_sigma(G, t, abs(move), 1 if move > 0 else -1)
    return t


def apply_automorphism(phi: Sequence[int], t: Sequence[int]) -> tuple[int, ...]:
    return tuple(int(phi[x]) for x in t)


def pure_braid_word(i: int, j: int, r: int) -> BraidWord:
    """``A_ij = sigma_{j-1} ... sigma_{i+1} sigma_i^2 sigma_{i+1}^-1 ... sigma_{j-1}^-1``.

    Returned in application order (rightmost factor first).
    """
    if not 1 <= i < j <= r:
        raise IndexError(f"bad pure braid indices ({i}, {j}) for r={r}")
    inner = tuple(-k for k in range(j - 1, i, -1))
    return inner + (i, i) + tuple(range(i + 1, j))


def permute_classes(cvec: Sequence[int], word: BraidWord) -> tuple[int, ...]:
    """Induced action of a braid word on a class vector (adjacent swaps)."""
    c = list(cvec)
    for move in word:
        k = abs(move)
        c[k - 1], c[k] = c[k], c[k - 1]
    return tuple(c)


def sorting_word(cvec: Sequence[int]) -> BraidWord:
    """Adjacent swaps (bubble sort) taking ``cvec`` to its nondecreasing rearrangement."""
    c = list(cvec)
    moves = []
    n = len(c)
    for end in range(n - 1, 0, -1):
        for k in range(end):
            if c[k] > c[k + 1]:
                c[k], c[k + 1] = c[k + 1], c[k]
                moves.append(k + 1)
    return tuple(moves)


@dataclass
class StabilizerGenerators:
    """Generators of the stabilizer ``H_c`` of a sorted class vector.

    Each pair is a braid word and an automorphism image array (``None`` means
    the identity automorphism).
    """

    base: tuple[int, ...]
    pairs: list[tuple[BraidWord, np.ndarray | None]] = field(default_factory=list)

    def fixes_base(self, cd: ClassData) -> bool:
        for word, phi in self.pairs:
            c = self.base
            if phi is not None:
                c = tuple(int(cd.class_of[phi[cd.classes[k].representative]]) for k in c)
            if permute_classes(c, word) != self.base:
                return False
        return True


def braid_stabilizer_words(cvec: Sequence[int]) -> list[BraidWord]:
    """Generators of the braids fixing a nondecreasing vector of labels."""
    r = len(cvec)
    words: list[BraidWord] = []
    for i in range(1, r):
        for j in range(i + 1, r + 1):
            if cvec[i - 1] != cvec[j - 1]:
                words.append(pure_braid_word(i, j, r))
    for i in range(1, r):
        if cvec[i - 1] == cvec[i]:
            words.append((i,))
    return words


def stabilizer_generators(cvec: Sequence[int], G: FiniteGroup, A: AutGroup) -> StabilizerGenerators:
    cvec = tuple(cvec)
    if list(cvec) != sorted(cvec):
        raise ValueError("class vector must be nondecreasing")
    gens = StabilizerGenerators(cvec)
    for word in braid_stabilizer_words(cvec):
        gens.pairs.append((word, None))
    cd = A.classes
    for phi in A.multiset_stabilizer(cvec):
        image = tuple(int(cd.class_of[phi[cd.classes[k].representative]]) for k in cvec)
        gens.pairs.append((sorting_word(image), phi))
    return gens


# ---------------------------------------------------------------------------
# vectorized action and orbit partition


def apply_word_array(G: FiniteGroup, X: np.ndarray, word: BraidWord) -> np.ndarray:
    t, inv = G.table, G.inv
    Y = X.copy()
    for move in word:
        k = abs(move)
        a = Y[:, k - 1].copy()
        b = Y[:, k].copy()
        if move > 0:
            Y[:, k - 1] = t[t[a, b], inv[a]]
            Y[:, k] = a
        else:
            Y[:, k - 1] = b
            Y[:, k] = t[t[inv[b], a], b]
    return Y


class TupleIndex:
    """Row lookup for an (N, r) array of element ids."""

    def __init__(self, X: np.ndarray, d: int):
        self.X = X
        self.d = d
        r = X.shape[1]
        self.packed = d ** r < 2**62
        if self.packed:
            self.weights = np.asarray([d ** (r - 1 - k) for k in range(r)], dtype=np.int64)
            self.keys = X.astype(np.int64) @ self.weights
            self.order = np.argsort(self.keys, kind="stable")
            self.sorted_keys = self.keys[self.order]
            if len(self.sorted_keys) > 1 and (np.diff(self.sorted_keys) == 0).any():
                raise ValueError("duplicate tuples")
        else:
            self.lookup_dict = {tuple(row): i for i, row in enumerate(X.tolist())}

    def lex_rank(self) -> np.ndarray:
        """Position of each row in lexicographic order."""
        if self.packed:
            rank = np.empty(len(self.keys), dtype=np.int64)
            rank[self.order] = np.arange(len(self.keys))
            return rank
        order = np.lexsort(self.X.T[::-1])
        rank = np.empty(len(order), dtype=np.int64)
        rank[order] = np.arange(len(order))
        return rank

    def find(self, Y: np.ndarray) -> np.ndarray:
        """Row indices of ``Y`` in ``X``; raises if a row is missing."""
        if self.packed:
            keys = Y.astype(np.int64) @ self.weights
            pos = np.searchsorted(self.sorted_keys, keys)
            pos = np.minimum(pos, len(self.sorted_keys) - 1)
            if not (self.sorted_keys[pos] == keys).all():
                raise SetNotInvariant("set not invariant under the generators")
            return self.order[pos]
        out = np.empty(len(Y), dtype=np.int64)
        for n, row in enumerate(Y.tolist()):
            idx = self.lookup_dict.get(tuple(row))
            if idx is None:
                raise SetNotInvariant("set not invariant under the generators")
            out[n] = idx
        return out


@dataclass
class OrbitPartition:
    labels: np.ndarray
    representatives: list[tuple[int, ...]]
    sizes: list[int]

    def __len__(self) -> int:
        return len(self.representatives)


def orbit_partition(G: FiniteGroup, X: Sequence[Sequence[int]] | np.ndarray,
                    gens: StabilizerGenerators | Sequence[tuple[BraidWord, np.ndarray | None]]) -> OrbitPartition:
    """Orbits of the group generated by ``gens`` on the finite set ``X``.

    Blocks are the connected components of the graph joining each tuple to
    its images; each block is represented by its lexicographically smallest
    tuple, and blocks are listed in order of their representatives.
    """
    X = np.asarray(X, dtype=np.int32)
    if X.ndim != 2:
        X = X.reshape(len(X), -1)
    N = len(X)
    if N == 0:
        return OrbitPartition(np.zeros(0, dtype=np.int64), [], [])
    pairs = gens.pairs if isinstance(gens, StabilizerGenerators) else list(gens)
    index = TupleIndex(X, G.order)
    src, dst = [], []
    for word, phi in pairs:
        Y = X if phi is None else np.asarray(phi, dtype=np.int32)[X]
        Y = apply_word_array(G, Y, word)
        j = index.find(Y)
        src.append(np.arange(N))
        dst.append(j)
    if src:
        src_a = np.concatenate(src)
        dst_a = np.concatenate(dst)
        graph = coo_matrix((np.ones(len(src_a), dtype=np.int8), (src_a, dst_a)), shape=(N, N))
        _, labels = connected_components(graph, directed=True, connection="weak")
    else:
        labels = np.arange(N)
    rank = index.lex_rank()
    # smallest rank per label
    best = np.full(labels.max() + 1, np.iinfo(np.int64).max, dtype=np.int64)
    np.minimum.at(best, labels, rank)
    by_rank = np.empty(N, dtype=np.int64)
    by_rank[rank] = np.arange(N)
    rep_rows = by_rank[best]
    order = np.argsort(best)
    relabel = np.empty(len(order), dtype=np.int64)
    relabel[order] = np.arange(len(order))
    sizes = np.bincount(labels, minlength=len(best))
    reps = [tuple(int(x) for x in X[rep_rows[k]]) for k in order]
    return OrbitPartition(relabel[labels], reps, [int(sizes[k]) for k in order])
