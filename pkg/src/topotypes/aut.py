"""Automorphism groups of table groups, as permutations of element ids."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .groups import ClassData, FiniteGroup, conjugacy_classes

DEFAULT_AUT_CAP = 10**7


class AutomorphismCapExceeded(RuntimeError):
    pass


def _extend(G: FiniteGroup, H: FiniteGroup, gens: Sequence[int], images: Sequence[int]):
    """Extend ``gens[i] -> images[i]`` to an injective homomorphism on ``<gens>``.

    Returns the partial image array (``-1`` outside the subgroup) or ``None``
    when the assignment is inconsistent.
    """
    gmul, hmul = G.mul, H.mul
    phi = [-1] * G.order
    used = bytearray(H.order)
    phi[0] = 0
    used[0] = 1
    queue = [0]
    pairs = list(zip(gens, images))
    for x in queue:
        px = hmul[phi[x]]
        gx = gmul[x]
        for s, t in pairs:
            y = gx[s]
            img = px[t]
            py = phi[y]
            if py < 0:
                if used[img]:
                    return None
                used[img] = 1
                phi[y] = img
                queue.append(y)
            elif py != img:
                return None
    return phi


def _candidates(G: FiniteGroup, cdG: ClassData, H: FiniteGroup, cdH: ClassData, s: int) -> list[int]:
    order = G.element_order[s]
    size = cdG.classes[cdG.class_list[s]].size
    hsizes = cdH.sizes
    hcls = cdH.class_list
    return [t for t in range(H.order)
            if H.element_order[t] == order and hsizes[hcls[t]] == size]


def _search(G, H, gens, cands, fixed):
    j = len(fixed)
    if j == len(gens):
        phi = _extend(G, H, gens, fixed)
        return phi if phi is not None and min(phi) >= 0 else None
    for t in cands[j]:
        if _extend(G, H, gens[: j + 1], list(fixed) + [t]) is None:
            continue
        phi = _search(G, H, gens, cands, list(fixed) + [t])
        if phi is not None:
            return phi
    return None


def isomorphism(G: FiniteGroup, H: FiniteGroup) -> list[int] | None:
    """An isomorphism ``G -> H`` as an image array, or ``None``."""
    if G.order != H.order:
        return None
    if sorted(G.element_order) != sorted(H.element_order):
        return None
    cdG, cdH = conjugacy_classes(G), conjugacy_classes(H)
    if sorted(zip(cdG.sizes, cdG.orders)) != sorted(zip(cdH.sizes, cdH.orders)):
        return None
    gens = list(G.generating_set)
    cands = [_candidates(G, cdG, H, cdH, s) for s in gens]
    return _search(G, H, gens, cands, [])


@dataclass
class AutGroup:
    """The full automorphism group of ``group``.

    ``elements[a]`` is the image array of the a-th automorphism (row 0 is the
    identity); ``class_perms[a, k]`` is the class that automorphism ``a``
    sends class ``k`` to.
    """

    group: FiniteGroup
    classes: ClassData
    generators: list[np.ndarray]
    elements: np.ndarray = field(repr=False)
    class_perms: np.ndarray = field(repr=False)
    _stab_cache: dict = field(default_factory=dict, repr=False)

    @property
    def order(self) -> int:
        return int(self.elements.shape[0])

    def class_perm(self, phi: np.ndarray) -> np.ndarray:
        reps = [c.representative for c in self.classes.classes]
        return self.classes.class_of[phi[reps]]

    @property
    def class_generators(self) -> list[tuple[int, ...]]:
        """Induced class permutations of the generators, deduplicated, no identity."""
        ident = tuple(range(len(self.classes)))
        seen = []
        for phi in self.generators:
            p = tuple(self.class_perm(phi).tolist())
            if p != ident and p not in seen:
                seen.append(p)
        return seen

    def multiset_stabilizer(self, c: Sequence[int]) -> list[np.ndarray]:
        """Generators of ``(Aut G)_c``, the automorphisms permuting the multiset ``c``."""
        key = tuple(sorted(c))
        if key in self._stab_cache:
            return self._stab_cache[key]
        imgs = np.sort(self.class_perms[:, list(key)], axis=1)
        mask = (imgs == np.asarray(key)).all(axis=1)
        idx = np.flatnonzero(mask)
        gens = _greedy_generators(self.elements[idx])
        self._stab_cache[key] = gens
        return gens


def _closure(gens: list[np.ndarray], d: int, cap: int) -> np.ndarray:
    ident = np.arange(d, dtype=np.int32)
    elems = [ident]
    seen = {ident.tobytes()}
    i = 0
    while i < len(elems):
        x = elems[i]
        for g in gens:
            y = g[x]
            key = y.tobytes()
            if key not in seen:
                seen.add(key)
                elems.append(y)
                if len(elems) > cap:
                    raise AutomorphismCapExceeded(f"automorphism group too large (cap {cap})")
        i += 1
    return np.asarray(elems, dtype=np.int32).reshape(len(elems), d)


def _greedy_generators(elements: np.ndarray) -> list[np.ndarray]:
    """Pick a generating subset of a finite set of automorphisms closed under composition."""
    if len(elements) == 0:
        return []
    d = elements.shape[1]
    gens: list[np.ndarray] = []
    sub = {np.arange(d, dtype=np.int32).tobytes()}
    for row in elements:
        if row.tobytes() in sub:
            continue
        gens.append(row.astype(np.int32))
        sub = {e.tobytes() for e in _closure(gens, d, len(elements) + 1)}
        if len(sub) == len(elements):
            break
    return gens


def automorphism_group(G: FiniteGroup, cap: int = DEFAULT_AUT_CAP,
                       classes: ClassData | None = None) -> AutGroup:
    """Aut(G) by a pointwise-stabilizer search over a fixed generating sequence.

    At each level, the orbit of the next generator under the automorphisms
    already found is grown until every admissible image has been either
    reached or ruled out by exhaustive backtracking.
    """
    cd = classes or conjugacy_classes(G)
    gens = list(G.generating_set)
    k = len(gens)
    cands = [_candidates(G, cd, G, cd, s) for s in gens]
    found: list[np.ndarray] = []
    total = 1
    for level in reversed(range(k)):
        prefix = gens[:level]
        s = gens[level]
        orbit = _orbit(s, found)
        for t in cands[level]:
            if t in orbit or _extend(G, G, gens[: level + 1], prefix + [t]) is None:
                continue
            phi = _search(G, G, gens, cands, prefix + [t])
            if phi is not None:
                found.append(np.asarray(phi, dtype=np.int32))
                orbit = _orbit(s, found)
        total *= len(orbit)
        if total > cap:
            raise AutomorphismCapExceeded(f"automorphism group too large ({total} > cap {cap})")
    elements = _closure(found, G.order, cap)
    if len(elements) != total:
        raise AssertionError("automorphism closure disagrees with orbit count")
    reps = [c.representative for c in cd.classes]
    class_perms = cd.class_of[elements[:, reps]]
    return AutGroup(G, cd, found, elements, class_perms)


def _orbit(s: int, gens: list[np.ndarray]) -> set[int]:
    orbit = {s}
    stack = [s]
    while stack:
        x = stack.pop()
        for g in gens:
            y = int(g[x])
            if y not in orbit:
                orbit.add(y)
                stack.append(y)
    return orbit


def is_automorphism(G: FiniteGroup, phi: Sequence[int]) -> bool:
    """Exhaustive check that ``phi`` is a bijective homomorphism."""
    phi = np.asarray(phi)
    if sorted(phi.tolist()) != list(range(G.order)):
        return False
    t = G.table
    return bool((phi[t] == t[np.ix_(phi, phi)]).all())


def inner_automorphism(G: FiniteGroup, g: int) -> np.ndarray:
    """``x -> g^-1 x g``."""
    t = G.table
    return t[t[G.inv[g]], g].astype(np.int32)
