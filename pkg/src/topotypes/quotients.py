"""Finite quotients of orbifold groups by low-index normal subgroup search.

The orbifold group of a signature ``(m_1, ..., m_r)`` is

    < x_1, ..., x_{r-1} | x_i^{m_i}, (x_1 ... x_{r-1})^{m_r} >

and every group with a spherical system of generators of that signature is a
quotient of it in which each generator keeps its exact order.  Normal
subgroups of index ``d`` are found by a coset-table backtrack: an undefined
entry is either sent to a fresh coset or to an existing one, in which case
the resulting Schreier relator is forced into the kernel and scanned at every
coset.  Coincidences prune the branch.
"""

from __future__ import annotations

import logging
import sys
from math import lcm
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .aut import isomorphism
from .groups import FiniteGroup, build_group, conjugacy_classes, subgroup_closure
from .signatures import SignatureStore
from .storage import Catalog, CatalogEntry, standard_name

log = logging.getLogger(__name__)

DEFAULT_NODE_LIMIT = 10**7


class SearchLimitExceeded(RuntimeError):
    pass


def _inv(c: int) -> int:
    return c ^ 1


def _free_reduce(w: list[int]) -> list[int]:
    out: list[int] = []
    for c in w:
        if out and out[-1] == _inv(c):
            out.pop()
        else:
            out.append(c)
    while len(out) > 1 and out[0] == _inv(out[-1]):
        out = out[1:-1]
    return out


def _cyclic_conjugates(rel: list[int]) -> list[list[int]]:
    res = []
    for w in (rel, [_inv(c) for c in reversed(rel)]):
        for s in range(len(w)):
            res.append(w[s:] + w[:s])
    return res


def orbifold_relators(m: Sequence[int]) -> list[list[int]]:
    """Relators over letters ``2i`` (``x_i``) and ``2i+1`` (its inverse)."""
    k = len(m) - 1
    rels = [[2 * i] * m[i] for i in range(k)]
    rels.append(list(range(0, 2 * k, 2)) * m[-1])
    return rels


class _Search:
    def __init__(self, m: Sequence[int], d: int, node_limit: int):
        self.m = tuple(m)
        self.d = d
        self.k = len(m) - 1
        self.ncol = 2 * self.k
        self.node_limit = node_limit
        self.nodes = 0
        self.results: list[list[list[int]]] = []

    def _define(self, t, v, c, u, queue) -> bool:
        if t[v][c] >= 0:
            return t[v][c] == u
        if t[u][_inv(c)] >= 0 and t[u][_inv(c)] != v:
            return False
        t[v][c] = u
        t[u][_inv(c)] = v
        queue.append((v, c, u))
        return True

    def _scan(self, t, x, w, queue) -> bool:
        f, i, n = x, 0, len(w)
        while i < n and t[f][w[i]] >= 0:
            f = t[f][w[i]]
            i += 1
        if i == n:
            return f == x
        b, j = x, n - 1
        while j >= i and t[b][_inv(w[j])] >= 0:
            b = t[b][_inv(w[j])]
            j -= 1
        if j < i:
            return f == b
        if j == i:
            return self._define(t, f, w[i], b, queue)
        return True

    def _propagate(self, t, ncosets, conj, edge, newrels) -> bool:
        queue: list[tuple[int, int, int]] = []
        if not self._define(t, *edge, queue):
            return False
        for rel in newrels:
            for cw in _cyclic_conjugates(rel):
                conj.setdefault(cw[0], []).append(cw)
        for rel in newrels:
            for x in range(ncosets):
                if not self._scan(t, x, rel, queue):
                    return False
        while queue:
            v, c, u = queue.pop()
            for cw in conj.get(c, ()):
                if not self._scan(t, v, cw, queue):
                    return False
            for cw in conj.get(_inv(c), ()):
                if not self._scan(t, u, cw, queue):
                    return False
        return True

    def run(self) -> list[list[list[int]]]:
        conj: dict[int, list[list[int]]] = {}
        for rel in orbifold_relators(self.m):
            for cw in _cyclic_conjugates(rel):
                conj.setdefault(cw[0], []).append(cw)
        limit = sys.getrecursionlimit()
        sys.setrecursionlimit(max(limit, 4 * self.d * self.ncol + 1000))
        try:
            self._rec([[-1] * self.ncol], [[]], conj)
        finally:
            sys.setrecursionlimit(limit)
        return self.results

    def _rec(self, table, words, conj):
        self.nodes += 1
        if self.nodes > self.node_limit:
            raise SearchLimitExceeded(f"quotient search for {self.m}, index {self.d}: node limit reached")
        n = len(words)
        hole = next(((v, c) for v in range(n) for c in range(self.ncol) if table[v][c] < 0), None)
        if hole is None:
            if n == self.d:
                self.results.append([row[:] for row in table])
            return
        v, c = hole
        targets = list(range(n)) + ([n] if n < self.d else [])
        for u in targets:
            t2 = [row[:] for row in table]
            w2 = list(words)
            c2 = {key: list(val) for key, val in conj.items()}
            if u == n:
                t2.append([-1] * self.ncol)
                w2.append(words[v] + [c])
                newrels = []
            else:
                if t2[u][_inv(c)] >= 0:
                    continue
                rel = _free_reduce(words[v] + [c] + [_inv(x) for x in reversed(words[u])])
                newrels = [rel] if rel else []
            if self._propagate(t2, len(w2), c2, (v, c, u), newrels):
                self._rec(t2, w2, c2)


def normal_subgroup_actions(m: Sequence[int], d: int, node_limit: int = DEFAULT_NODE_LIMIT) -> list[list[list[int]]]:
    """Regular coset actions of the orbifold group on ``d`` points, one per normal
    subgroup of index ``d``; each is given by the images of ``x_1..x_{r-1}``."""
    search = _Search(m, d, node_limit)
    out = []
    for table in search.run():
        out.append([[table[p][2 * i] for p in range(d)] for i in range(search.k)])
    return out


def _perm_order(p: Sequence[int]) -> int:
    seen = [False] * len(p)
    order = 1
    for s in range(len(p)):
        if seen[s]:
            continue
        n, x = 0, s
        while not seen[x]:
            seen[x] = True
            x = p[x]
            n += 1
        order = lcm(order, n)
    return order


def _compose(p: Sequence[int], q: Sequence[int]) -> list[int]:
    """Apply ``p`` then ``q``."""
    return [q[x] for x in p]


def exact_order_quotients(m: Sequence[int], d: int, node_limit: int = DEFAULT_NODE_LIMIT) -> list[list[list[int]]]:
    """Quotient actions in which every ``x_i`` and the product keep exact orders."""
    out = []
    for gens in normal_subgroup_actions(m, d, node_limit):
        prod = list(range(d))
        for p in gens:
            prod = _compose(prod, p)
        orders = [_perm_order(p) for p in gens] + [_perm_order(prod)]
        if tuple(orders) == tuple(m):
            out.append(gens)
    return out


# ---------------------------------------------------------------------------
# assembling a catalog


def invariant_key(G: FiniteGroup) -> tuple:
    """Isomorphism invariant used to order and bucket groups of one order."""
    cd = conjugacy_classes(G)
    center = sum(1 for c in cd.classes if c.size == 1)
    return (G.order, not G.is_abelian, tuple(sorted(Counter(G.element_order).items())),
            tuple(sorted(zip(cd.sizes, cd.orders))), center)


def small_degree_generators(G: FiniteGroup) -> tuple[int, list[list[int]]]:
    """Permutation generators of small degree: the coset action on the largest
    core-free cyclic subgroup, falling back to the regular action."""
    d = G.order
    gens = list(G.generating_set)
    best: set[int] | None = None
    for x in sorted(range(1, d), key=lambda y: -G.element_order[y]):
        if best is not None and G.element_order[x] <= len(best):
            break
        H = subgroup_closure(G, [x])
        core = set(H)
        for g in range(d):
            core &= {G.conj(h, g) for h in H}
            if len(core) == 1:
                break
        if len(core) == 1:
            best = H
    if best is None:
        return d, [[G.mul[p][s] for p in range(d)] for s in gens]
    # right cosets Hg, acted on by right multiplication
    coset_of = [-1] * d
    reps = []
    for g in range(d):
        if coset_of[g] < 0:
            idx = len(reps)
            reps.append(g)
            for h in best:
                coset_of[G.mul[h][g]] = idx
    perms = [[coset_of[G.mul[r][s]] for r in reps] for s in gens]
    return len(reps), perms


@dataclass
class FoundGroup:
    group: FiniteGroup
    signatures: list[tuple[int, ...]]


def collect_groups(tasks: Iterable[tuple[int, Sequence[int]]], node_limit: int = DEFAULT_NODE_LIMIT,
                   progress=None) -> dict[int, list[FoundGroup]]:
    """Distinct groups (up to isomorphism) admitting each ``(d, m)`` in ``tasks``."""
    found: dict[int, list[FoundGroup]] = {}
    keys: dict[int, list[tuple]] = {}
    for d, m in tasks:
        quots = exact_order_quotients(m, d, node_limit)
        if progress:
            progress(d, m, len(quots))
        for gens in quots:
            G = build_group(gens, d)
            key = invariant_key(G)
            bucket = found.setdefault(d, [])
            kb = keys.setdefault(d, [])
            for entry, k in zip(bucket, kb):
                if k == key and isomorphism(G, entry.group) is not None:
                    if tuple(m) not in entry.signatures:
                        entry.signatures.append(tuple(m))
                    break
            else:
                bucket.append(FoundGroup(G, [tuple(m)]))
                kb.append(key)
    for d in found:
        found[d].sort(key=lambda e: invariant_key(e.group))
    return found


def build_catalog(g_max: int, node_limit: int = DEFAULT_NODE_LIMIT, progress=None) -> Catalog:
    """Every group with a spherical system of generators of genus ``2..g_max``.

    Ids are ``order.index`` with groups of one order ordered by
    :func:`invariant_key`; generators are stored in a small permutation degree.
    """
    store = SignatureStore(g_max)
    found = collect_groups([(s.d, s.m) for s in store.signatures], node_limit, progress)
    entries = []
    for d in sorted(found):
        for k, fg in enumerate(found[d], start=1):
            degree, gens = small_degree_generators(fg.group)
            entries.append(CatalogEntry(f"{d}.{k}", d, degree, gens, standard_name(fg.group)))
    return Catalog(entries, complete_genus=g_max)
