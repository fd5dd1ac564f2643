from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy.combinatorics import Permutation as SymPerm
from sympy.combinatorics import PermutationGroup as SymGroup
from sympy.utilities.iterables import multiset_partitions

from graphdisc.builders import cycle_graph
from graphdisc.errors import ElementBoundExceeded, InvalidAction, NotASubgroup, NotTransitive
from graphdisc.graph import VertexPartition
from graphdisc.permgrp import (Domain, GroupAction, PermGroup, Permutation, action_kernel, all_subgroups,
                               graph_automorphism_perm, index, intersection, is_invariant_partition, is_normal,
                               minimal_block_systems, normal_core, orbit_partition, point_stabilizer,
                               product_set, small_index_core, subgroup_ops)


def grp(points, *cycle_lists):
    d = Domain(points)
    return PermGroup(d, [Permutation.from_cycles(c, d) for c in cycle_lists])


def rand_group(seed: int, n: int = 5, k: int = 2) -> PermGroup:
    rng = random.Random(seed)
    d = Domain(range(n))
    gens = []
    for _ in range(k):
        img = list(range(n))
        rng.shuffle(img)
        gens.append(Permutation.from_mapping(dict(enumerate(img)), d))
    return PermGroup(d, gens)


def sym_order(G: PermGroup) -> int:
    gens = [SymPerm([G.domain.index[g(x)] for x in G.domain.points]) for g in G.generators]
    return SymGroup(gens or [SymPerm(list(range(len(G.domain))))]).order()


def test_left_action_convention():
    d = Domain([1, 2, 3])
    a = Permutation.from_cycles([(1, 2)], d)
    b = Permutation.from_cycles([(2, 3)], d)
    assert (a * b)(3) == a(b(3)) == 1


def test_orbit_examples():
    assert orbit_partition(grp([1, 2, 3, 4], [(1, 2, 3)])).as_sets() == {frozenset({1, 2, 3}), frozenset({4})}
    assert orbit_partition(PermGroup.trivial(Domain([1, 2]))).is_trivial()
    assert orbit_partition(grp([1, 2, 3, 4], [(1, 2)], [(3, 4)])).as_sets() == {frozenset({1, 2}),
                                                                               frozenset({3, 4})}


def test_stabilizer_examples():
    S3 = PermGroup.symmetric([1, 2, 3])
    s = point_stabilizer(S3, 1)
    assert s.order() == 2 and Permutation.from_cycles([(2, 3)], S3.domain) in s
    assert point_stabilizer(grp([1, 2, 3, 4], [(1, 2, 3, 4)]), 1).order() == 1
    D4 = grp([1, 2, 3, 4], [(1, 2, 3, 4)], [(1, 3)])
    stab = point_stabilizer(D4, 1)
    fixing = [g for g in D4.elements() if g(1) == 1]
    assert stab.order() == len(fixing) == 2


@given(st.integers(0, 10**6), st.integers(3, 6))
@settings(max_examples=40, deadline=None)
def test_orbit_stabilizer_and_order_oracle(seed, n):
    G = rand_group(seed, n)
    assert G.order() == sym_order(G)
    for x in G.domain.points:
        assert G.order() == len(G.orbit(x)) * point_stabilizer(G, x).order()


def _brute_minimal_blocks(G: PermGroup) -> set:
    pts = list(G.domain.points)
    invariant = []
    for parts in multiset_partitions(pts):
        if 1 < len(parts) < len(pts):
            p = VertexPartition(parts)
            if is_invariant_partition(G.generators, p):
                invariant.append(p)
    # minimal: no strictly finer nontrivial invariant partition
    out = set()
    for p in invariant:
        if not any(q != p and all(any(b <= c for c in p.blocks) for b in q.blocks) for q in invariant):
            out.add(frozenset(p.blocks))
    return out


@pytest.mark.parametrize("cycles,expected", [
    ([[(1, 2, 3, 4)], [(1, 3)]], {frozenset({frozenset({1, 3}), frozenset({2, 4})})}),
    ([[(1, 2, 3, 4)]], {frozenset({frozenset({1, 3}), frozenset({2, 4})})}),
    ([[(1, 2)], [(1, 2, 3, 4)]], set()),
])
def test_block_system_examples(cycles, expected):
    G = grp([1, 2, 3, 4], *cycles)
    got = {frozenset(p.blocks) for p in minimal_block_systems(G)}
    assert got == expected == _brute_minimal_blocks(G)


@given(st.integers(0, 10**6))
@settings(max_examples=30, deadline=None)
def test_block_systems_against_brute_force(seed):
    G = rand_group(seed, 6)
    if not G.is_transitive():
        with pytest.raises(NotTransitive):
            minimal_block_systems(G)
        return
    got = minimal_block_systems(G)
    for p in got:
        assert is_invariant_partition(G.generators, p)
    assert {frozenset(p.blocks) for p in got} == _brute_minimal_blocks(G)


def test_action_kernel_examples():
    c = cycle_graph(4)
    G = grp([0, 1, 2, 3], [(0, 1, 2, 3)])
    rot = graph_automorphism_perm(c, {i: (i + 1) % 4 for i in range(4)},
                                  {d: next(x for x in c.darts if c.iota(x) == (c.iota(d) + 1) % 4
                                           and c.tau(x) == (c.tau(d) + 1) % 4) for d in c.darts})
    assert action_kernel(GroupAction(G, c, [rot])).order() == 1
    S3 = PermGroup.symmetric([1, 2, 3])
    triv = GroupAction(S3, c, [Permutation.identity(rot.domain)] * len(S3.generators))
    assert action_kernel(triv).order() == 6


def test_action_must_be_homomorphism():
    c = cycle_graph(4)
    G = grp([0, 1], [(0, 1)])
    rot = graph_automorphism_perm(c, {i: (i + 1) % 4 for i in range(4)},
                                  {d: next(x for x in c.darts if c.iota(x) == (c.iota(d) + 1) % 4
                                           and c.tau(x) == (c.tau(d) + 1) % 4) for d in c.darts})
    with pytest.raises(InvalidAction):
        GroupAction(G, c, [rot])


def test_subgroup_examples():
    S3 = PermGroup.symmetric([1, 2, 3])
    C3 = PermGroup(S3.domain, [Permutation.from_cycles([(1, 2, 3)], S3.domain)])
    assert subgroup_ops(S3, C3, kind="index") == index(S3, C3) == 2
    S4 = PermGroup.symmetric([1, 2, 3, 4])
    assert normal_core(S4, point_stabilizer(S4, 1)).order() == 1
    V = S4.domain
    a = PermGroup(V, [Permutation.from_cycles([(1, 2), (3, 4)], V)])
    b = PermGroup(V, [Permutation.from_cycles([(1, 3), (2, 4)], V)])
    assert product_set(a, b).order() == 4
    c = PermGroup(V, [Permutation.from_cycles([(1, 2)], V)])
    d = PermGroup(V, [Permutation.from_cycles([(2, 3)], V)])
    with pytest.raises(NotASubgroup):
        product_set(c, d)


def test_element_bound_is_explicit():
    G = PermGroup(Domain(range(8)), PermGroup.symmetric(range(8)).generators, bound=100)
    with pytest.raises(ElementBoundExceeded):
        G.order()


@given(st.integers(0, 10**6))
@settings(max_examples=25, deadline=None)
def test_index_identity(seed):
    rng = random.Random(seed)
    G = grp([1, 2, 3, 4], [(1, 2)], [(1, 2, 3, 4)])
    subs = all_subgroups(G)
    A, C = rng.choice(subs), rng.choice(subs)
    Bs = [B for B in subs if B.is_subgroup_of(C)]
    B = rng.choice(Bs)
    try:
        AC, AB = product_set(A, C), product_set(A, B)
        ACB = product_set(intersection(A, C), B)
    except NotASubgroup:
        return
    assert AC.order() // AB.order() == C.order() // ACB.order()


def test_subgroup_lattice_and_core():
    S4 = PermGroup.symmetric([1, 2, 3, 4])
    assert len(all_subgroups(S4)) == 30
    assert small_index_core(S4, 2).order() == 12
    assert small_index_core(S4, 3).order() == 4
    assert small_index_core(S4, 4).order() == 1
    assert is_normal(S4, small_index_core(S4, 3))


def test_kernel_of_product_action():
    # D4 x Z2 on the 4-cycle, the Z2 factor acting trivially
    c = cycle_graph(4)
    G = grp([0, 1, 2, 3, "a", "b"], [(0, 1, 2, 3)], [(0, 2)], [("a", "b")])

    def image(g):
        vm = {i: g(i) for i in range(4)}
        dm = {d: next(x for x in c.darts if c.iota(x) == vm[c.iota(d)] and c.tau(x) == vm[c.tau(d)])
              for d in c.darts}
        return graph_automorphism_perm(c, vm, dm)
    a = GroupAction(G, c, [image(g) for g in G.generators])
    K = action_kernel(a)
    assert K.order() == 2 and is_normal(G, K)
    assert all(a.image(k).is_identity() for k in K.elements())
