"""Classification of spherical systems of generators up to Hurwitz equivalence."""

from __future__ import annotations

import itertools
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .aut import DEFAULT_AUT_CAP, AutGroup, AutomorphismCapExceeded, automorphism_group
from .class_algebra import (CharacterTable, CharacterTableError, Filters, character_table,
                            structure_constants)
from .groups import (ClassData, FiniteGroup, abelianization_min_generators, conjugacy_classes,
                     generates, subgroup_closure)
from .hurwitz import TupleIndex, orbit_partition, sorting_word, apply_word, stabilizer_generators
from .signatures import Signature, genus

log = logging.getLogger(__name__)

DEFAULT_FIBER_CAP = 5 * 10**7
CHUNK = 1 << 20


class FiberTooLarge(RuntimeError):
    pass


@dataclass
class ClassifyConfig:
    frobenius: bool = True
    scott: bool = True
    dihedral_fast_path: bool = True
    abelian_fast_path: bool = True
    fiber_cap: int = DEFAULT_FIBER_CAP
    aut_cap: int = DEFAULT_AUT_CAP
    seed: int = 0


@dataclass
class GroupContext:
    """Everything precomputed once per group and shared by all its signatures."""

    group_id: str
    group: FiniteGroup
    classes: ClassData
    aut: AutGroup
    filters: Filters
    character_table_ok: bool
    dihedral_4k2: bool
    abelian_rank: int


def is_dihedral_4k2(G: FiniteGroup) -> bool:
    """Dihedral of order 4k+2: an odd cyclic subgroup of index 2 inverted by the rest."""
    d = G.order
    if d % 4 != 2 or d < 6:
        return False
    half = d // 2
    for a in range(d):
        if G.element_order[a] == half:
            H = subgroup_closure(G, [a])
            b = next(x for x in range(d) if x not in H)
            return G.conj(a, b) == G.inverse[a]
    return False


def prepare_group(group_id: str, G: FiniteGroup, config: ClassifyConfig | None = None) -> GroupContext:
    config = config or ClassifyConfig()
    cd = conjugacy_classes(G)
    A = automorphism_group(G, cap=config.aut_cap, classes=cd)
    sc = structure_constants(cd, G)
    try:
        ct: CharacterTable | None = character_table(cd, sc, G, seed=config.seed)
        ok = True
    except CharacterTableError as exc:
        log.warning("group %s: %s; falling back to Frobenius-only pruning", group_id, exc)
        ct, ok = None, False
    filters = Filters(sc, ct, frobenius=config.frobenius, scott=config.scott)
    return GroupContext(group_id, G, cd, A, filters, ok, is_dihedral_4k2(G),
                        abelianization_min_generators(G))


@dataclass(frozen=True)
class TopologicalType:
    group_id: str
    order: int
    signature: tuple[int, ...]
    genus: int
    classes: tuple[int, ...]
    representative: tuple[int, ...]
    orbit_size: int | None
    fast_path: str = "none"


# ---------------------------------------------------------------------------
# prefilter


def group_prefilter(ctx: GroupContext, m: Sequence[int], g: int) -> bool:
    G = ctx.group
    present = set(G.element_order)
    if any(mi not in present for mi in m):
        return False
    # no automorphism of a genus g surface has order above 4g+2, whatever r is;
    # the sharper 4(g-1) for r > 3 would wrongly drop e.g. C6 with (2,2,3,3)
    if max(G.element_order) > 4 * g + 2:
        return False
    if ctx.abelian_rank > len(m) - 1:
        return False
    return True


# ---------------------------------------------------------------------------
# section of class vectors (Algorithm 2)


def class_vectors(cd: ClassData, m: Sequence[int]) -> list[tuple[int, ...]]:
    """All nondecreasing class vectors whose multiset of element orders is ``m``."""
    need = Counter(m)
    by_order: dict[int, list[int]] = {}
    for c in cd.classes:
        by_order.setdefault(c.element_order, []).append(c.id)
    choices = []
    for o in sorted(need):
        pool = by_order.get(o, [])
        if not pool:
            return []
        choices.append(list(itertools.combinations_with_replacement(pool, need[o])))
    out = {tuple(sorted(itertools.chain.from_iterable(parts))) for parts in itertools.product(*choices)}
    return sorted(out)


def aut_section(K: Sequence[tuple[int, ...]], perms: Sequence[Sequence[int]], nclasses: int) -> list[tuple[int, ...]]:
    """Lexicographically smallest member of each orbit of the induced class action on ``K``."""
    if not K:
        return []
    X = np.asarray(K, dtype=np.int64)
    N = len(X)
    if not perms:
        return list(K)
    index = TupleIndex(X, nclasses)
    src, dst = [], []
    for p in perms:
        Y = np.sort(np.asarray(p)[X], axis=1)
        src.append(np.arange(N))
        dst.append(index.find(Y))
    s, t = np.concatenate(src), np.concatenate(dst)
    graph = coo_matrix((np.ones(len(s), dtype=np.int8), (s, t)), shape=(N, N))
    _, labels = connected_components(graph, directed=True, connection="weak")
    # K is sorted, so the first index seen for each label is the smallest
    _, first = np.unique(labels, return_index=True)
    return [K[i] for i in sorted(first)]


@dataclass
class SectionF:
    """Filtered section, split by the set of classes among the first r-1 entries."""

    components: dict[frozenset, list[tuple[int, ...]]] = field(default_factory=dict)
    candidates: int = 0
    section_size: int = 0

    def __iter__(self):
        return iter(self.components.items())

    @property
    def vectors(self) -> list[tuple[int, ...]]:
        return [c for comp in self.components.values() for c in comp]


def build_section_F(ctx: GroupContext, m: Sequence[int], use_filters: bool = True) -> SectionF:
    K = class_vectors(ctx.classes, m)
    S = aut_section(K, ctx.aut.class_generators, len(ctx.classes))
    F = SectionF(candidates=len(K), section_size=len(S))
    for c in S:
        if use_filters and not ctx.filters.passes(c):
            continue
        F.components.setdefault(frozenset(c[:-1]), []).append(c)
    return F


# ---------------------------------------------------------------------------
# fibers (Algorithm 3)


@dataclass
class UnderlyingSetCache:
    generating: set = field(default_factory=set)
    notgenerating: set = field(default_factory=set)
    tests: int = 0

    def check(self, G: FiniteGroup, key: tuple[int, ...]) -> bool:
        if key in self.notgenerating:
            return False
        if key in self.generating:
            return True
        self.tests += 1
        if generates(G, key):
            self.generating.add(key)
            return True
        self.notgenerating.add(key)
        return False


def _fiber_chunks(G: FiniteGroup, members: list[np.ndarray]) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Blocks of ``C_1 x ... x C_{r-1}`` (lexicographic order) with their products."""
    t = G.table
    k = len(members)
    # vectorize the longest suffix that fits in a chunk
    split = k
    size = 1
    while split > 0 and size * len(members[split - 1]) <= CHUNK:
        split -= 1
        size *= len(members[split])
    if split == k:
        split = k - 1
    suffix = members[split:]
    for prefix in itertools.product(*members[:split]):
        p = 0
        for x in prefix:
            p = G.mul[p][int(x)]
        H = np.full((1, 0), 0, dtype=np.int32)
        P = np.asarray([p], dtype=np.int32)
        for C in suffix:
            H = np.concatenate([np.repeat(H, len(C), axis=0), np.tile(C, len(H))[:, None]], axis=1)
            P = t[np.repeat(P, len(C)), np.tile(C, len(P))]
        if prefix:
            H = np.concatenate([np.tile(np.asarray(prefix, dtype=np.int32), (len(H), 1)), H], axis=1)
        yield H, P


def fiber_size(ctx: GroupContext, cvec: Sequence[int]) -> int:
    return math.prod(ctx.classes.classes[c].size for c in cvec[:-1])


def fiber_generating_systems(ctx: GroupContext, cvec: Sequence[int], cache: UnderlyingSetCache,
                             cap: int = DEFAULT_FIBER_CAP, first_only: bool = False) -> list[tuple[int, ...]]:
    """Spherical systems of generators in ``p^-1(cvec)``, in lexicographic order."""
    G, cd = ctx.group, ctx.classes
    if fiber_size(ctx, cvec) > cap:
        raise FiberTooLarge(f"fiber of {tuple(cvec)} has {fiber_size(ctx, cvec)} tuples (cap {cap})")
    members = [np.asarray(cd.classes[c].members, dtype=np.int32) for c in cvec[:-1]]
    last_class = cvec[-1]
    out: list[tuple[int, ...]] = []
    for H, P in _fiber_chunks(G, members):
        last = G.inv[P]
        keep = np.flatnonzero(cd.class_of[last] == last_class)
        for row, gr in zip(H[keep].tolist(), last[keep].tolist()):
            key = tuple(sorted(set(row)))
            if cache.check(G, key):
                out.append(tuple(row) + (gr,))
                if first_only:
                    return out
    return out


def order_sorted(G: FiniteGroup, t: Sequence[int]) -> tuple[int, ...]:
    """Move a tuple by braid moves until its element orders are nondecreasing."""
    return apply_word(G, t, sorting_word([G.element_order[x] for x in t]))


def _make_type(ctx: GroupContext, m, g, cvec, rep, size, tag) -> TopologicalType:
    return TopologicalType(ctx.group_id, ctx.group.order, tuple(m), g, tuple(cvec),
                           order_sorted(ctx.group, rep), size, tag)


@dataclass
class TaskResult:
    group_id: str
    signature: tuple[int, ...]
    genus: int
    types: list[TopologicalType] = field(default_factory=list)
    status: str = "ok"
    reason: str | None = None
    path: str = "general"
    section_size: int = 0
    filtered_size: int = 0
    generation_tests: int = 0

    @property
    def key(self) -> str:
        return task_key(self.group_id, self.signature)


def task_key(group_id: str, m: Sequence[int]) -> str:
    return f"{group_id}|{','.join(map(str, m))}"


def abelian_fast_path(ctx: GroupContext, m: Sequence[int], g: int) -> list[TopologicalType]:
    """Classes are single elements: test each section member directly."""
    G, cd = ctx.group, ctx.classes
    K = class_vectors(cd, m)
    S = aut_section(K, ctx.aut.class_generators, len(cd))
    out = []
    for c in S:
        t = tuple(cd.classes[k].representative for k in c)
        if G.product(t) == 0 and generates(G, t):
            out.append(_make_type(ctx, m, g, c, t, 1, "abelian"))
    return out


def dihedral_fast_path(ctx: GroupContext, cvec: Sequence[int], cache: UnderlyingSetCache,
                       cap: int = DEFAULT_FIBER_CAP) -> tuple[int, ...] | None:
    """First spherical system in the fiber; for dihedral groups of order 4k+2 a fiber
    holds at most one orbit."""
    found = fiber_generating_systems(ctx, cvec, cache, cap, first_only=True)
    return found[0] if found else None


def classify_Gm(ctx: GroupContext, m: Sequence[int], config: ClassifyConfig | None = None,
                g: int | None = None) -> TaskResult:
    """One representative per Hurwitz class of spherical systems of ``G`` with signature ``m``."""
    config = config or ClassifyConfig()
    m = tuple(sorted(m))
    g = genus(ctx.group.order, m) if g is None else g
    res = TaskResult(ctx.group_id, m, g)
    G = ctx.group
    try:
        if G.is_abelian and config.abelian_fast_path:
            res.path = "abelian"
            res.types = abelian_fast_path(ctx, m, g)
            return res
        use_dihedral = ctx.dihedral_4k2 and config.dihedral_fast_path
        res.path = "dihedral" if use_dihedral else "general"
        filters = ctx.filters
        filters.frobenius, filters.scott = config.frobenius, config.scott
        F = build_section_F(ctx, m)
        res.section_size = F.section_size
        res.filtered_size = len(F.vectors)
        for _, component in F:
            cache = UnderlyingSetCache()
            for cvec in component:
                if use_dihedral:
                    rep = dihedral_fast_path(ctx, cvec, cache, config.fiber_cap)
                    if rep is not None:
                        res.types.append(_make_type(ctx, m, g, cvec, rep, None, "dihedral"))
                    continue
                X = fiber_generating_systems(ctx, cvec, cache, config.fiber_cap)
                if not X:
                    continue
                H = stabilizer_generators(cvec, G, ctx.aut)
                orbits = orbit_partition(G, X, H)
                for rep, size in zip(orbits.representatives, orbits.sizes):
                    res.types.append(_make_type(ctx, m, g, cvec, rep, size, "none"))
            res.generation_tests += cache.tests
    except (FiberTooLarge, AutomorphismCapExceeded, MemoryError) as exc:
        res.status, res.reason, res.types = "skipped", str(exc) or type(exc).__name__, []
    return res


# ---------------------------------------------------------------------------
# genus driver


@dataclass
class CatalogGroup:
    id: str
    group: FiniteGroup
    name: str | None = None


def genus_tasks(signatures: Iterable[Signature], groups: Sequence[CatalogGroup]) -> Iterator[tuple[Signature, CatalogGroup]]:
    by_order: dict[int, list[CatalogGroup]] = {}
    for entry in groups:
        by_order.setdefault(entry.group.order, []).append(entry)
    for sig in sorted(signatures, key=lambda s: (s.g, s.d, s.m)):
        for entry in by_order.get(sig.d, []):
            yield sig, entry


class ContextCache:
    def __init__(self, config: ClassifyConfig):
        self.config = config
        self._ctx: dict[str, GroupContext | Exception] = {}

    def get(self, entry: CatalogGroup) -> GroupContext:
        ctx = self._ctx.get(entry.id)
        if ctx is None:
            try:
                ctx = prepare_group(entry.id, entry.group, self.config)
            except AutomorphismCapExceeded as exc:
                ctx = exc
            self._ctx[entry.id] = ctx
        if isinstance(ctx, Exception):
            raise ctx
        return ctx


def run_task(cache: ContextCache, sig: Signature, entry: CatalogGroup) -> TaskResult | None:
    """Prefilter and classify one (group, signature) pair; ``None`` when excluded."""
    try:
        ctx = cache.get(entry)
    except AutomorphismCapExceeded as exc:
        return TaskResult(entry.id, sig.m, sig.g, status="skipped", reason=str(exc))
    if not group_prefilter(ctx, sig.m, sig.g):
        return None
    return classify_Gm(ctx, sig.m, cache.config, sig.g)


def classify_genus(signatures: Iterable[Signature], groups: Sequence[CatalogGroup],
                   config: ClassifyConfig | None = None, skip: set[str] | frozenset = frozenset()
                   ) -> Iterator[tuple[str, TaskResult | None]]:
    """Yield ``(task key, result)`` for every (signature, group) pair in a fixed order.

    Excluded pairs yield ``None`` so callers can checkpoint them too.
    """
    cache = ContextCache(config or ClassifyConfig())
    for sig, entry in genus_tasks(signatures, groups):
        key = task_key(entry.id, sig.m)
        if key in skip:
            continue
        yield key, run_task(cache, sig, entry)
