"""Brute-force Hurwitz orbits, kept deliberately naive for cross-checking.

Every spherical system whose orders are some arrangement of ``m`` is
enumerated, and orbits are grown by repeatedly applying all braid moves and
automorphism generators until nothing new appears.  Nothing here reuses the
fiber/section machinery of the classifier.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

from .aut import AutGroup, automorphism_group
from .groups import FiniteGroup

DEFAULT_ORACLE_CAP = 10**6


class OracleTooLarge(RuntimeError):
    pass


def _generated(G: FiniteGroup, elems) -> int:
    seen = {0}
    todo = [0]
    while todo:
        x = todo.pop()
        for s in elems:
            y = G.mul[x][s]
            if y not in seen:
                seen.add(y)
                todo.append(y)
    return len(seen)


def spherical_systems(G: FiniteGroup, m: Sequence[int], cap: int = DEFAULT_ORACLE_CAP) -> list[tuple[int, ...]]:
    """All ``(g_1..g_r)`` with product 1, generating ``G``, and orders a rearrangement of ``m``."""
    r = len(m)
    if G.order ** (r - 1) > cap:
        raise OracleTooLarge(f"|G|^(r-1) = {G.order ** (r - 1)} exceeds oracle cap {cap}")
    target = sorted(m)
    allowed = [x for x in range(G.order) if G.element_order[x] in set(m)]
    out = []
    for head in itertools.product(allowed, repeat=r - 1):
        p = 0
        for x in head:
            p = G.mul[p][x]
        last = G.inverse[p]
        t = head + (last,)
        if sorted(G.element_order[x] for x in t) != target:
            continue
        if _generated(G, t) == G.order:
            out.append(t)
    return out


def _neighbours(G: FiniteGroup, t: tuple[int, ...], auts) -> list[tuple[int, ...]]:
    mul, inv = G.mul, G.inverse
    out = []
    for i in range(len(t) - 1):
        a, b = t[i], t[i + 1]
        out.append(t[:i] + (mul[mul[a][b]][inv[a]], a) + t[i + 2:])
        out.append(t[:i] + (b, mul[mul[inv[b]][a]][b]) + t[i + 2:])
    for phi in auts:
        out.append(tuple(int(phi[x]) for x in t))
    return out


@dataclass
class OracleResult:
    orbits: list[set[tuple[int, ...]]]
    representatives: list[tuple[int, ...]]

    @property
    def count(self) -> int:
        return len(self.orbits)

    def orbit_of(self, t: Sequence[int]) -> int:
        t = tuple(t)
        for k, orb in enumerate(self.orbits):
            if t in orb:
                return k
        raise KeyError(t)


def brute_force_orbits(G: FiniteGroup, m: Sequence[int], A: AutGroup | None = None,
                       cap: int = DEFAULT_ORACLE_CAP) -> OracleResult:
    """Hurwitz orbits of spherical systems with signature ``m``.

    Representatives are the lexicographically smallest member of each orbit
    whose orders are exactly ``m`` in the given (nondecreasing) order.
    """
    m = tuple(sorted(m))
    systems = spherical_systems(G, m, cap)
    auts = (A or automorphism_group(G)).generators
    unseen = set(systems)
    orbits = []
    for start in systems:
        if start not in unseen:
            continue
        orbit = {start}
        frontier = [start]
        while frontier:
            nxt = []
            for t in frontier:
                for u in _neighbours(G, t, auts):
                    if u not in orbit:
                        orbit.add(u)
                        nxt.append(u)
            frontier = nxt
        unseen -= orbit
        orbits.append(orbit)
    reps = []
    for orbit in orbits:
        aligned = [t for t in orbit if tuple(G.element_order[x] for x in t) == m]
        reps.append(min(aligned))
    order = sorted(range(len(orbits)), key=lambda k: reps[k])
    return OracleResult([orbits[k] for k in order], [reps[k] for k in order])
