"""Finite groups as dense multiplication tables.

Elements are the integers ``0..order-1`` with ``0`` the identity.  Products
follow the left-to-right permutation convention: ``i^(xy) = (i^x)^y``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

DEFAULT_ORDER_CAP = 4096


class GroupError(ValueError):
    pass


class FiniteGroup:
    """A finite group given by its multiplication table.

    ``table[x, y]`` is the id of ``x*y``.  ``perms`` optionally holds a
    faithful permutation realization (one image array per element).
    """

    def __init__(
        self,
        table: np.ndarray,
        label: str | None = None,
        perms: np.ndarray | None = None,
        generators: Sequence[int] | None = None,
    ):
        table = np.asarray(table, dtype=np.int32)
        if table.ndim != 2 or table.shape[0] != table.shape[1]:
            raise GroupError("multiplication table must be square")
        self.table = table
        self.order = int(table.shape[0])
        self.label = label
        self.perms = perms
        self.generators = tuple(int(g) for g in generators) if generators else None
        self.mul = table.tolist()
        self.inv = np.argmax(table == 0, axis=1).astype(np.int32)
        self.inverse = self.inv.tolist()
        self.orders = self._element_orders()
        self.element_order = self.orders.tolist()

    def __repr__(self) -> str:
        return f"FiniteGroup(order={self.order}, label={self.label!r})"

    @property
    def degree(self) -> int | None:
        return None if self.perms is None else int(self.perms.shape[1])

    def _element_orders(self) -> np.ndarray:
        d = self.order
        orders = np.zeros(d, dtype=np.int32)
        idx = np.arange(d)
        cur = idx.copy()
        k = 1
        while (orders == 0).any():
            done = (cur == 0) & (orders == 0)
            orders[done] = k
            cur = self.table[cur, idx]
            k += 1
            if k > d + 1:
                raise GroupError("table is not a group table")
        return orders

    def power(self, x: int, k: int) -> int:
        k %= self.element_order[x]
        result = 0
        base = x
        mul = self.mul
        while k:
            if k & 1:
                result = mul[result][base]
            base = mul[base][base]
            k >>= 1
        return result

    def conj(self, x: int, g: int) -> int:
        """``g^-1 x g``."""
        return self.mul[self.mul[self.inverse[g]][x]][g]

    def product(self, elems: Iterable[int]) -> int:
        mul = self.mul
        p = 0
        for e in elems:
            p = mul[p][e]
        return p

    @cached_property
    def is_abelian(self) -> bool:
        return bool((self.table == self.table.T).all())

    @cached_property
    def generating_set(self) -> tuple[int, ...]:
        """A short generating sequence, preferring elements of large order."""
        cand = sorted(range(1, self.order), key=lambda x: (-self.element_order[x], x))
        chosen: list[int] = []
        sub = subgroup_closure(self, [])
        target = self.order
        while len(sub) < target:
            best = None
            best_size = -1
            for x in cand:
                if x in sub:
                    continue
                size = len(subgroup_closure(self, chosen + [x]))
                if size > best_size:
                    best, best_size = x, size
                    if size == target:
                        break
            chosen.append(best)
            sub = subgroup_closure(self, chosen)
        return tuple(chosen)

    def check_axioms(self) -> None:
        """Exhaustive associativity/identity/inverse check; raises on failure."""
        t = self.table
        d = self.order
        if not (t[0] == np.arange(d)).all() or not (t[:, 0] == np.arange(d)).all():
            raise GroupError("0 is not the identity")
        for row in t:
            if len(set(row.tolist())) != d:
                raise GroupError("table is not a Latin square")
        # (xy)z == x(yz) for all x, y, z
        for x in range(d):
            if not (t[t[x]][:, :] == t[x][t]).all():
                raise GroupError("table is not associative")
        if not (t[np.arange(d), self.inv] == 0).all():
            raise GroupError("missing inverses")


def subgroup_closure(G: FiniteGroup, gens: Iterable[int], limit: int | None = None) -> set[int]:
    """Elements of the subgroup generated by ``gens``; stops early at ``limit`` elements."""
    gens = [g for g in set(gens) if g != 0]
    mul = G.mul
    seen = {0}
    frontier = [0]
    cap = G.order if limit is None else limit
    while frontier:
        nxt = []
        for x in frontier:
            row = mul[x]
            for s in gens:
                y = row[s]
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        if len(seen) >= cap:
            break
        frontier = nxt
    return seen


def generates(G: FiniteGroup, elems: Iterable[int]) -> bool:
    """True iff ``elems`` generate all of ``G``."""
    gens = [g for g in set(elems) if g != 0]
    d = G.order
    if d == 1:
        return True
    if not gens:
        return False
    if len(gens) == 1:
        return G.element_order[gens[0]] == d
    mul = G.mul
    seen = bytearray(d)
    seen[0] = 1
    count = 1
    stack = [0]
    while stack:
        x = stack.pop()
        row = mul[x]
        for s in gens:
            y = row[s]
            if not seen[y]:
                seen[y] = 1
                count += 1
                if count == d:
                    return True
                stack.append(y)
    return count == d


# ---------------------------------------------------------------------------
# construction


def _check_perm(p: Sequence[int], degree: int) -> tuple[int, ...]:
    p = tuple(int(x) for x in p)
    if len(p) != degree or sorted(p) != list(range(degree)):
        raise GroupError(f"invalid permutation: {list(p)}")
    return p


def build_group(
    generators: Sequence[Sequence[int]],
    degree: int,
    label: str | None = None,
    order_cap: int = DEFAULT_ORDER_CAP,
) -> FiniteGroup:
    """Close permutation generators into a :class:`FiniteGroup`.

    Element ids follow breadth-first discovery order from the identity, so
    the same generator list always gives the same table.
    """
    gens = [_check_perm(p, degree) for p in generators]
    ident = tuple(range(degree))
    elements = [ident]
    index = {ident: 0}
    # right multiplication by each generator, recorded as we go
    right: list[list[int]] = [[] for _ in gens]
    parent: list[tuple[int, int]] = [(-1, -1)]
    i = 0
    while i < len(elements):
        x = elements[i]
        for j, s in enumerate(gens):
            y = tuple(s[k] for k in x)  # apply x then s
            yid = index.get(y)
            if yid is None:
                yid = len(elements)
                if yid >= order_cap:
                    raise GroupError(f"group too large (order exceeds cap {order_cap})")
                index[y] = yid
                elements.append(y)
                parent.append((i, j))
            right[j].append(yid)
        i += 1
    d = len(elements)
    R = [np.asarray(r, dtype=np.int32) for r in right]
    table = np.empty((d, d), dtype=np.int32)
    table[:, 0] = np.arange(d)
    for y in range(1, d):
        p, j = parent[y]
        table[:, y] = R[j][table[:, p]]
    perms = np.asarray(elements, dtype=np.int32).reshape(d, degree)
    gen_ids = [index[s] for s in gens if index[s] != 0]
    return FiniteGroup(table, label=label, perms=perms, generators=gen_ids)


def regular_permutations(G: FiniteGroup, elems: Iterable[int]) -> list[list[int]]:
    """Right-regular permutation images of ``elems`` (degree ``|G|``)."""
    return [G.table[:, e].tolist() for e in elems]


def group_from_function(elements: Sequence, mul, label: str | None = None) -> FiniteGroup:
    """Regular representation of a group given by an element list and a product."""
    index = {e: i for i, e in enumerate(elements)}
    d = len(elements)
    full = np.asarray([[index[mul(a, b)] for b in elements] for a in elements], dtype=np.int32)
    ident = [i for i in range(d) if (full[i] == np.arange(d)).all()]
    if len(ident) != 1:
        raise GroupError("no unique identity")
    G0 = FiniteGroup(_relabel_identity(full, ident[0]))
    gen_ids = G0.generating_set
    return build_group(regular_permutations(G0, gen_ids), d, label=label)


def _relabel_identity(table: np.ndarray, e: int) -> np.ndarray:
    d = table.shape[0]
    perm = np.arange(d)
    perm[0], perm[e] = e, 0
    # new id i corresponds to old element perm[i]
    old_to_new = np.empty(d, dtype=np.int32)
    old_to_new[perm] = np.arange(d)
    return old_to_new[table[np.ix_(perm, perm)]]


def _cycle(points: Sequence[int], degree: int) -> list[int]:
    p = list(range(degree))
    for a, b in zip(points, list(points[1:]) + [points[0]]):
        p[a] = b
    return p


def standard_group(family: str, *params, order_cap: int = DEFAULT_ORDER_CAP) -> FiniteGroup:
    """Groups from the usual families.

    ``cyclic(n)``, ``abelian(n1, n2, ...)`` by invariant factors,
    ``dihedral(n)`` of order ``2n``, ``generalized_dihedral(n1, ...)`` for
    ``A x| Z2`` with inversion on ``A = Z_n1 x ...``, ``symmetric(n)``,
    ``alternating(n)`` and ``direct_product(G, H)``.
    """
    family = family.lower()
    if family in ("cyclic", "c"):
        (n,) = params
        if n == 1:
            return build_group([], 1, label=f"C{n}")
        return build_group([_cycle(range(n), n)], n, label=f"C{n}", order_cap=order_cap)
    if family in ("abelian", "abelian_invariant_factors"):
        factors = [int(n) for n in params if int(n) > 1]
        degree = sum(factors) or 1
        gens, start = [], 0
        for n in factors:
            gens.append(_cycle(range(start, start + n), degree))
            start += n
        label = "x".join(f"C{n}" for n in factors) or "C1"
        return build_group(gens, degree, label=label, order_cap=order_cap)
    if family in ("dihedral", "d"):
        (n,) = params
        if n < 3:
            return standard_group("generalized_dihedral", n, order_cap=order_cap) if n > 1 \
                else standard_group("cyclic", 2)
        rot = _cycle(range(n), n)
        refl = [(-i) % n for i in range(n)]
        return build_group([rot, refl], n, label=f"D{n}", order_cap=order_cap)
    if family in ("generalized_dihedral", "gdihedral"):
        factors = [int(n) for n in params if int(n) > 1]
        elems = [(a, s) for a in np.ndindex(*factors) for s in (0, 1)] if factors else [((), 0), ((), 1)]

        def mul(x, y):
            (a, s), (b, t) = x, y
            sign = -1 if s else 1
            return (tuple((ai + sign * bi) % n for ai, bi, n in zip(a, b, factors)), (s + t) % 2)

        if 2 * math.prod(factors) > order_cap:
            raise GroupError("group too large")
        label = "Dih(" + "x".join(f"C{n}" for n in factors) + ")"
        return group_from_function(elems, mul, label=label)
    if family in ("symmetric", "s"):
        (n,) = params
        if n < 2:
            return build_group([], max(n, 1), label=f"S{n}")
        gens = [_cycle([0, 1], n)]
        if n > 2:
            gens.append(_cycle(range(n), n))
        return build_group(gens, n, label=f"S{n}", order_cap=order_cap)
    if family in ("alternating", "a"):
        (n,) = params
        if n < 3:
            return build_group([], max(n, 1), label=f"A{n}")
        gens = [_cycle([i, i + 1, i + 2], n) for i in range(n - 2)]
        return build_group(gens, n, label=f"A{n}", order_cap=order_cap)
    if family in ("direct_product", "product"):
        G, H = params
        return direct_product(G, H, order_cap=order_cap)
    raise GroupError(f"unknown group family {family!r}")


def direct_product(G: FiniteGroup, H: FiniteGroup, order_cap: int = DEFAULT_ORDER_CAP) -> FiniteGroup:
    if G.order * H.order > order_cap:
        raise GroupError("group too large")
    pg = G.perms if G.perms is not None else G.table.T
    ph = H.perms if H.perms is not None else H.table.T
    n, m = pg.shape[1], ph.shape[1]
    gens = []
    for g in G.generating_set:
        gens.append(list(pg[g]) + [n + i for i in range(m)])
    for h in H.generating_set:
        gens.append(list(range(n)) + [n + int(i) for i in ph[h]])
    label = f"{G.label}x{H.label}" if G.label and H.label else None
    return build_group(gens, n + m, label=label, order_cap=order_cap)


# ---------------------------------------------------------------------------
# conjugacy classes


@dataclass(frozen=True)
class ConjugacyClass:
    id: int
    representative: int
    members: tuple[int, ...]
    element_order: int

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class ClassData:
    """Conjugacy classes in the fixed total order used everywhere.

    Class ids are positions in the order: ascending size, then element
    order, then smallest member id.
    """

    classes: tuple[ConjugacyClass, ...]
    class_of: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.classes)

    @property
    def sizes(self) -> list[int]:
        return [c.size for c in self.classes]

    @property
    def orders(self) -> list[int]:
        return [c.element_order for c in self.classes]

    @cached_property
    def class_list(self) -> list[int]:
        return self.class_of.tolist()


def conjugacy_classes(G: FiniteGroup) -> ClassData:
    d = G.order
    gens = G.generating_set
    t = G.table
    conj_maps = [t[t[G.inv[s]], s] for s in gens]  # x -> s^-1 x s
    conj_maps = [m.tolist() for m in conj_maps]
    label = [-1] * d
    orbits: list[list[int]] = []
    for x in range(d):
        if label[x] >= 0:
            continue
        k = len(orbits)
        label[x] = k
        orbit = [x]
        i = 0
        while i < len(orbit):
            y = orbit[i]
            for cm in conj_maps:
                z = cm[y]
                if label[z] < 0:
                    label[z] = k
                    orbit.append(z)
            i += 1
        orbits.append(sorted(orbit))
    orbits.sort(key=lambda o: (len(o), G.element_order[o[0]], o[0]))
    classes = tuple(
        ConjugacyClass(i, o[0], tuple(o), G.element_order[o[0]]) for i, o in enumerate(orbits)
    )
    class_of = np.empty(d, dtype=np.int32)
    for c in classes:
        class_of[list(c.members)] = c.id
    return ClassData(classes, class_of)


# ---------------------------------------------------------------------------
# abelianization


def normal_closure(G: FiniteGroup, elems: Iterable[int]) -> set[int]:
    gens = set(elems)
    while True:
        H = subgroup_closure(G, gens)
        conj = {G.conj(h, s) for h in gens for s in G.generating_set}
        if conj <= H:
            return H
        gens |= conj


def derived_subgroup(G: FiniteGroup) -> set[int]:
    gens = G.generating_set
    mul, inv = G.mul, G.inverse
    comms = {mul[mul[inv[a]][inv[b]]][mul[a][b]] for a in gens for b in gens}
    return normal_closure(G, comms)


def _prime_factors(n: int) -> list[int]:
    ps, p = [], 2
    while p * p <= n:
        if n % p == 0:
            ps.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        ps.append(n)
    return ps


def abelianization_min_generators(G: FiniteGroup) -> int:
    """Number of invariant factors of ``G/[G,G]``.

    For a finite abelian group this is the largest p-rank over primes p, and
    the p-rank is read off from how many cosets have p-th power in the
    derived subgroup.
    """
    D = derived_subgroup(G)
    index = G.order // len(D)
    best = 0
    for p in _prime_factors(index):
        in_D = np.zeros(G.order, dtype=bool)
        in_D[list(D)] = True
        powers = np.asarray([G.power(x, p) for x in range(G.order)])
        count = int(in_D[powers].sum()) // len(D)
        rank = round(math.log(count, p))
        best = max(best, rank)
    return best
