"""Class-algebra constants, character tables and the two fiber filters.

Frobenius counts are exact integers obtained by folding class sums; the
complex character table is only used for Scott's inequality (and as an
independent cross-check of the counts).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .groups import ClassData, FiniteGroup

ORTHOGONALITY_TOL = 1e-9
INTEGRALITY_TOL = 1e-6


class CharacterTableError(ArithmeticError):
    pass


@dataclass(frozen=True)
class StructureConstants:
    """``a[i][j][k]``: number of pairs ``(x, y)`` in ``C_i x C_j`` with ``xy = z_k``
    for a fixed ``z_k`` in ``C_k``."""

    a: tuple[tuple[tuple[int, ...], ...], ...]
    sizes: tuple[int, ...]
    inverse_class: tuple[int, ...]
    group_order: int

    @property
    def nclasses(self) -> int:
        return len(self.sizes)

    def matrix(self, i: int) -> np.ndarray:
        """Class multiplication matrix ``(M_i)_{jk} = a_{ijk}``."""
        return np.asarray(self.a[i], dtype=float)


def structure_constants(cd: ClassData, G: FiniteGroup) -> StructureConstants:
    n = len(cd)
    t = G.table
    class_of = cd.class_of
    reps = np.asarray([c.representative for c in cd.classes])
    members = [np.asarray(c.members) for c in cd.classes]
    a = np.zeros((n, n, n), dtype=np.int64)
    for i in range(n):
        for j in range(i, n):
            prods = t[np.ix_(members[i], members[j])].ravel()
            counts = np.bincount(prods, minlength=G.order)
            a[i, j] = counts[reps]
            a[j, i] = a[i, j]  # class sums commute
    inverse_class = tuple(int(class_of[G.inverse[c.representative]]) for c in cd.classes)
    return StructureConstants(
        tuple(tuple(tuple(int(v) for v in row) for row in block) for block in a),
        tuple(cd.sizes),
        inverse_class,
        G.order,
    )


def product_distribution(sc: StructureConstants, classes: Sequence[int]) -> list[int]:
    """``P[k]`` = number of tuples in ``C_1 x ... x C_j`` whose product is a fixed
    element of class ``k``."""
    n = sc.nclasses
    P = [0] * n
    P[classes[0]] = 1
    for c in classes[1:]:
        Q = [0] * n
        for l, pl in enumerate(P):
            if pl:
                row = sc.a[l][c]
                for k in range(n):
                    if row[k]:
                        Q[k] += pl * row[k]
        P = Q
    return P


def frobenius_count(sc: StructureConstants, cvec: Sequence[int]) -> int:
    """Exact number of tuples in ``C_1 x ... x C_r`` with product 1."""
    if len(cvec) < 2:
        raise ValueError("need at least two classes")
    *head, last = cvec
    P = product_distribution(sc, head)
    return P[sc.inverse_class[last]] * sc.sizes[last]


@dataclass(frozen=True)
class CharacterTable:
    """Irreducible complex characters; ``values[t, k] = chi_t(C_k)``.

    ``power_map[k][j]`` is the class of ``g^j`` for ``g`` in ``C_k``.
    """

    values: np.ndarray = field(repr=False)
    degrees: tuple[int, ...]
    sizes: tuple[int, ...]
    power_map: tuple[tuple[int, ...], ...]
    group_order: int

    def orthogonality_residual(self) -> float:
        X = self.values
        w = np.asarray(self.sizes, dtype=float)
        gram = (X * w) @ X.conj().T / self.group_order
        return float(np.abs(gram - np.eye(len(X))).max())

    def fixed_dimensions(self) -> np.ndarray:
        """``dim V_t^g`` for each irreducible ``t`` and class representative ``g``."""
        X = self.values
        out = np.empty(X.shape)
        for k, powers in enumerate(self.power_map):
            m = len(powers)
            avg = X[:, list(powers)].sum(axis=1) / m
            if np.abs(avg.imag).max() > INTEGRALITY_TOL or \
                    np.abs(avg.real - np.round(avg.real)).max() > INTEGRALITY_TOL:
                raise CharacterTableError("character inconsistency: non-integral fixed dimension")
            out[:, k] = np.round(avg.real)
        return out.astype(int)

    def codimensions(self) -> np.ndarray:
        """``v_t(C_k) = chi_t(1) - dim V_t^g``."""
        return np.asarray(self.degrees)[:, None] - self.fixed_dimensions()


def _power_map(cd: ClassData, G: FiniteGroup) -> tuple[tuple[int, ...], ...]:
    out = []
    for c in cd.classes:
        g = c.representative
        row, x = [], 0
        for _ in range(c.element_order):
            row.append(cd.class_list[x])
            x = G.mul[x][g]
        out.append(tuple(row))
    return tuple(out)


def _common_eigenvectors(mats: list[np.ndarray], rng: np.random.Generator, depth: int = 0) -> list[np.ndarray]:
    """Split ``R^n`` into common eigenvectors of commuting diagonalizable matrices."""
    n = mats[0].shape[0]
    M = sum(rng.standard_normal() * A for A in mats)
    vals, vecs = np.linalg.eig(M)
    scale = max(1.0, np.abs(vals).max())
    order = np.argsort(vals.real + 1e-3 * vals.imag)
    groups: list[list[int]] = []
    for i in order:
        for grp in groups:
            if abs(vals[grp[0]] - vals[i]) < 1e-7 * scale:
                grp.append(i)
                break
        else:
            groups.append([i])
    if len(groups) == n:
        return [vecs[:, i] for i in range(n)]
    if depth > 20:
        raise CharacterTableError("character table failed: eigenspaces did not split")
    out = []
    for grp in groups:
        V = vecs[:, grp]
        if len(grp) == 1:
            out.append(V[:, 0])
            continue
        # orthonormal basis of the cluster's span, then restrict every matrix to it
        Q, _ = np.linalg.qr(V)
        pinv = np.linalg.pinv(Q)
        sub = [pinv @ A @ Q for A in mats]
        for w in _common_eigenvectors(sub, rng, depth + 1):
            out.append(Q @ w)
    return out


def character_table(cd: ClassData, sc: StructureConstants, G: FiniteGroup | None = None,
                    seed: int = 0, attempts: int = 5) -> CharacterTable:
    """Burnside's method: common eigenvectors of the class matrices are the central
    characters ``omega_t(C_k) = |C_k| chi_t(g_k) / chi_t(1)``."""
    if G is None:
        raise ValueError("the group is needed for power maps")
    n = sc.nclasses
    d = sc.group_order
    sizes = np.asarray(sc.sizes, dtype=float)
    inv = list(sc.inverse_class)
    mats = [sc.matrix(i) for i in range(n)]
    power_map = _power_map(cd, G)
    last_error = None
    for attempt in range(attempts):
        rng = np.random.default_rng(seed + attempt)
        try:
            vecs = _common_eigenvectors(mats, rng)
        except np.linalg.LinAlgError as exc:  # pragma: no cover - numerical failure
            last_error = exc
            continue
        rows = []
        degrees = []
        for v in vecs:
            omega = v / v[0]
            norm = (omega * omega[inv] / sizes).sum()
            deg2 = d / norm
            deg = np.sqrt(deg2.real)
            chi = omega * deg / sizes
            rows.append(chi)
            degrees.append(deg)
        deg_int = [int(round(x)) for x in degrees]
        if any(abs(x - y) > INTEGRALITY_TOL for x, y in zip(degrees, deg_int)) or \
                sum(x * x for x in deg_int) != d or len(rows) != n:
            last_error = CharacterTableError("character table failed: degrees not integral")
            continue
        X = np.asarray(rows)
        X[:, 0] = deg_int
        # trivial character first, then by degree and descending values
        key = [(deg_int[t], tuple(-np.round(X[t].real, 6)), tuple(-np.round(X[t].imag, 6)))
               for t in range(n)]
        X = X[sorted(range(n), key=lambda t: key[t])]
        table = CharacterTable(X, tuple(sorted(deg_int)), tuple(sc.sizes), power_map, d)
        if table.orthogonality_residual() < ORTHOGONALITY_TOL:
            return table
        last_error = CharacterTableError("character table failed: orthogonality")
    raise last_error or CharacterTableError("character table failed")


def frobenius_character_sum(ct: CharacterTable, cvec: Sequence[int]) -> int:
    """Frobenius's formula evaluated with characters, rounded to an integer."""
    X = ct.values
    r = len(cvec)
    deg = np.asarray(ct.degrees, dtype=float)
    terms = np.prod(X[:, list(cvec)], axis=1) / deg ** (r - 2)
    total = terms.sum() * np.prod([float(ct.sizes[c]) for c in cvec]) / ct.group_order
    return int(round(total.real))


def scott_test(ct: CharacterTable, cvec: Sequence[int], codims: np.ndarray | None = None) -> bool:
    """Scott's inequality ``sum v(g_i) >= v(G) + v(G*)`` for every irreducible.

    For a nontrivial irreducible ``V`` both ``V^G`` and ``(V*)^G`` vanish, so the
    right side is ``2 dim V``; the trivial character contributes ``0 >= 0``.
    """
    v = ct.codimensions() if codims is None else codims
    lhs = v[:, list(cvec)].sum(axis=1)
    rhs = 2 * np.asarray(ct.degrees)
    trivial = (v == 0).all(axis=1)
    return bool(((lhs >= rhs) | trivial).all())


@dataclass
class Filters:
    """Frobenius/Scott pruning for one group, each filter individually switchable."""

    sc: StructureConstants
    ct: CharacterTable | None
    frobenius: bool = True
    scott: bool = True
    _codims: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.ct is not None:
            self._codims = self.ct.codimensions()

    def passes(self, cvec: Sequence[int]) -> bool:
        if self.frobenius and frobenius_count(self.sc, cvec) == 0:
            return False
        if self.scott and self.ct is not None and not scott_test(self.ct, cvec, self._codims):
            return False
        return True


def passes_filters(sc: StructureConstants, ct: CharacterTable | None, cvec: Sequence[int],
                   frobenius: bool = True, scott: bool = True) -> bool:
    return Filters(sc, ct, frobenius, scott).passes(cvec)
