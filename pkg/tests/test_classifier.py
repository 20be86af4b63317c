from __future__ import annotations

import itertools

import pytest

from topotypes.classifier import (CatalogGroup, ClassifyConfig, UnderlyingSetCache, build_section_F,
                                  class_vectors, classify_genus, classify_Gm, fiber_generating_systems,
                                  group_prefilter, is_dihedral_4k2, prepare_group)
from topotypes.groups import generates, standard_group
from topotypes.oracle import brute_force_orbits
from topotypes.signatures import genus

GENERAL = ClassifyConfig(dihedral_fast_path=False, abelian_fast_path=False)


def ctx_of(*group_spec):
    return prepare_group("-".join(map(str, group_spec)), standard_group(*group_spec))


def s4_ids(ctx):
    cd = ctx.classes
    T = next(c.id for c in cd.classes if c.size == 6 and c.element_order == 2)
    D = next(c.id for c in cd.classes if c.size == 3)
    return T, D


def test_s4_section_for_four_involutions():
    ctx = ctx_of("symmetric", 4)
    T, D = s4_ids(ctx)
    K = class_vectors(ctx.classes, (2, 2, 2, 2))
    assert len(K) == 5
    assert sorted(K) == sorted(tuple(sorted((T,) * k + (D,) * (4 - k))) for k in range(5))
    unfiltered = build_section_F(ctx, (2, 2, 2, 2), use_filters=False)
    assert unfiltered.section_size == 5 and len(unfiltered.vectors) == 5
    ctx.filters.scott = False
    frob_only = build_section_F(ctx, (2, 2, 2, 2))
    assert sorted(v.count(T) for v in frob_only.vectors) == [0, 2, 4]
    ctx.filters.scott = True
    # the 3-dimensional representation also rules out k = 4 when r = 4
    assert build_section_F(ctx, (2, 2, 2, 2)).vectors == []


def test_section_components_keyed_by_head_classes():
    ctx = ctx_of("dihedral", 4)
    F = build_section_F(ctx, (2, 2, 2, 4))
    for key, comp in F:
        for c in comp:
            assert frozenset(c[:-1]) == key
            assert list(c) == sorted(c)


def test_abelian_class_vectors_are_element_tuples():
    ctx = ctx_of("abelian", 2, 2)
    K = class_vectors(ctx.classes, (2, 2, 2))
    assert len(K) == len(list(itertools.combinations_with_replacement(range(3), 3)))
    # Aut = S3 permutes the three involutions: orbits aaa, aab, abc
    F = build_section_F(ctx, (2, 2, 2), use_filters=False)
    assert F.section_size == 3
    assert build_section_F(ctx, (2, 2, 2)).vectors == [(1, 2, 3)]


def test_fiber_examples():
    ctx = ctx_of("cyclic", 2)
    assert fiber_generating_systems(ctx, (1,) * 6, UnderlyingSetCache()) == [(1,) * 6]
    ctx = ctx_of("symmetric", 4)
    T, D = s4_ids(ctx)
    assert fiber_generating_systems(ctx, (D, D, D), UnderlyingSetCache()) == []


def test_fiber_matches_direct_enumeration():
    ctx = ctx_of("alternating", 4)
    G, cd = ctx.group, ctx.classes
    for c in itertools.combinations_with_replacement(range(1, len(cd)), 4):
        got = fiber_generating_systems(ctx, c, UnderlyingSetCache())
        want = sorted(t for t in itertools.product(*(cd.classes[k].members for k in c))
                      if G.product(t) == 0 and generates(G, t))
        assert got == want


def test_cache_never_retests_an_underlying_set():
    ctx = ctx_of("symmetric", 4)
    F = build_section_F(ctx, (2, 2, 2, 3), use_filters=False)
    for _, comp in F:
        cache = UnderlyingSetCache()
        seen = set()
        cd, G = ctx.classes, ctx.group
        for c in comp:
            fiber_generating_systems(ctx, c, cache)
            for head in itertools.product(*(cd.classes[k].members for k in c[:-1])):
                if cd.class_of[G.inverse[G.product(head)]] == c[-1]:
                    seen.add(tuple(sorted(set(head))))
        assert cache.tests == len(seen)
        assert not cache.generating & cache.notgenerating


def test_cyclic_two_hyperelliptic():
    res = classify_Gm(ctx_of("cyclic", 2), (2,) * 6)
    assert len(res.types) == 1
    assert res.types[0].representative == (1,) * 6


def test_dihedral_detection():
    assert is_dihedral_4k2(standard_group("dihedral", 3))
    assert is_dihedral_4k2(standard_group("dihedral", 5))
    assert not is_dihedral_4k2(standard_group("dihedral", 6))
    assert not is_dihedral_4k2(standard_group("cyclic", 10))
    assert not is_dihedral_4k2(standard_group("abelian", 2, 5))


@pytest.mark.parametrize("n,m", [(3, (2, 2, 3, 3)), (3, (2, 2, 2, 2)), (5, (2, 2, 5, 5)), (5, (2, 2, 2, 5)),
                                 (7, (2, 2, 7)), (3, (2, 2, 2, 2, 2, 2))])
def test_dihedral_fast_path_agrees(n, m):
    ctx = ctx_of("dihedral", n)
    fast = classify_Gm(ctx, m)
    slow = classify_Gm(ctx, m, GENERAL)
    assert fast.path == "dihedral" and slow.path == "general"
    assert [t.representative for t in fast.types] == [t.representative for t in slow.types]
    # exactly one orbit per surviving class vector
    assert len({t.classes for t in slow.types}) == len(slow.types)
    assert all(t.orbit_size is None for t in fast.types)


def test_dihedral_twelve_uses_general_path():
    assert classify_Gm(ctx_of("dihedral", 6), (2, 2, 2, 3)).path == "general"


@pytest.mark.parametrize("group_spec,m", [(("cyclic", 2), (2,) * 6), (("cyclic", 3), (3, 3, 3, 3)),
                                    (("abelian", 2, 2), (2, 2, 2, 2)), (("abelian", 2, 2), (2, 2, 2, 2, 2)),
                                    (("cyclic", 6), (2, 2, 3, 3)), (("abelian", 2, 4), (2, 4, 4, 4))])
def test_abelian_fast_path_matches_oracle(group_spec, m):
    ctx = ctx_of(*group_spec)
    res = classify_Gm(ctx, m)
    assert res.path == "abelian"
    orc = brute_force_orbits(ctx.group, m, ctx.aut)
    assert sorted(orc.orbit_of(t.representative) for t in res.types) == list(range(orc.count))


def test_prefilter():
    s4 = ctx_of("symmetric", 4)
    assert not group_prefilter(s4, (2, 2, 5), 3)
    assert group_prefilter(s4, (2, 2, 2, 4), genus(24, (2, 2, 2, 4)))
    assert not group_prefilter(ctx_of("cyclic", 20), (2, 2, 20, 20), 2)
    assert not group_prefilter(ctx_of("abelian", 2, 2, 2), (2, 2, 2), 2)
    # C6 acts on a genus 2 curve with four branch points
    assert group_prefilter(ctx_of("cyclic", 6), (2, 2, 3, 3), 2)


def test_skipped_when_fiber_too_large():
    res = classify_Gm(ctx_of("symmetric", 4), (2, 2, 2, 3), ClassifyConfig(fiber_cap=10))
    assert res.status == "skipped" and "cap" in res.reason and res.types == []


def test_genus_two_total(catalog, store):
    groups = [CatalogGroup(e.id, e.group, e.name) for e in catalog]
    results = [r for _, r in classify_genus(store.by_genus(2), groups) if r is not None]
    assert sum(len(r.types) for r in results) == 19
    assert all(r.status == "ok" for r in results)


def test_representatives_are_spherical(catalog, store):
    groups = [CatalogGroup(e.id, e.group, e.name) for e in catalog]
    for _, res in classify_genus(store.by_genus(3), groups):
        if res is None:
            continue
        G = next(g.group for g in groups if g.id == res.group_id)
        for t in res.types:
            rep = t.representative
            assert 0 not in rep
            assert G.product(rep) == 0
            assert generates(G, rep)
            assert tuple(G.element_order[x] for x in rep) == t.signature
            assert genus(G.order, t.signature) == t.genus == 3
