from __future__ import annotations

import random

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphdisc.autgrp import (Coloring, automorphism_action, automorphism_group, canonical_form,
                              find_isomorphism, gos_automorphisms, orbit_bound_via_stabilizers,
                              vertex_stabilizer_orbit_bound)
from graphdisc.builders import (add_leaf_pairs, asymmetric_six, bouquet, complete_bipartite, complete_graph,
                                cycle_graph, decorated_cycle, path_graph)
from graphdisc.catalog import decorated_cycle_action
from graphdisc.gos import trivial_gos
from graphdisc.graph import SerreGraph
from graphdisc.permgrp import GroupAction, PermGroup, graph_points, is_normal
from graphdisc.voltage import random_connected_graph


def _nx(g: SerreGraph) -> nx.MultiGraph:
    h = nx.MultiGraph()
    h.add_nodes_from(g.vertices)
    for e in g.geometric_edges():
        h.add_edge(g.iota(e), g.tau(e))
    return h


def _nx_aut_count(g: SerreGraph) -> int:
    # simple graphs only: vertex maps determine dart maps
    h = nx.Graph(_nx(g))
    return sum(1 for _ in nx.algorithms.isomorphism.GraphMatcher(h, h).isomorphisms_iter())


def _shuffle(g: SerreGraph, rng: random.Random) -> SerreGraph:
    vs = list(g.vertices)
    new = list(range(len(vs)))
    rng.shuffle(new)
    vm = {v: ("x", n) for v, n in zip(vs, new)}
    ds = list(g.darts)
    dn = list(range(len(ds)))
    rng.shuffle(dn)
    dm = {d: ("y", n) for d, n in zip(ds, dn)}
    return g.relabel(vm, dm)


@pytest.mark.parametrize("g,order", [
    (complete_graph(4), 24),
    (decorated_cycle(4), 128),
    (cycle_graph(5), 10),
    (complete_bipartite(3, 3), 72),
    (asymmetric_six(), 1),
])
def test_automorphism_orders(g, order):
    assert automorphism_group(g).order() == order == _nx_aut_count(g)


def test_loops_and_multi_edges():
    # a loop can be flipped; k loops can also be permuted
    assert automorphism_group(bouquet(1)).order() == 2
    assert automorphism_group(bouquet(2)).order() == 8


@given(st.integers(0, 10**6))
@settings(max_examples=30, deadline=None)
def test_order_matches_networkx_on_simple_graphs(seed):
    g = random_connected_graph(random.Random(seed), 6, 4)
    if not g.is_simple():
        return
    assert automorphism_group(g).order() == _nx_aut_count(g)


def test_colors_are_respected():
    c = cycle_graph(4)
    col = Coloring(vertex={0: "red"})
    assert automorphism_group(c, col).order() == 2


@pytest.mark.parametrize("n", [4, 5, 6])
def test_dihedral_orbit_bound(n):
    a = automorphism_action(cycle_graph(n))
    bound, pair = vertex_stabilizer_orbit_bound(a)
    assert bound == 2 == orbit_bound_via_stabilizers(a)
    assert pair is not None


def test_orbit_bound_examples():
    a, _ = decorated_cycle_action(4)
    assert vertex_stabilizer_orbit_bound(a)[0] == 2
    # the full automorphism group also contains reflections
    full = automorphism_action(decorated_cycle(4))
    assert vertex_stabilizer_orbit_bound(full)[0] == 4
    g = asymmetric_six()
    triv = GroupAction.natural(PermGroup.trivial(graph_points(g)), g)
    assert vertex_stabilizer_orbit_bound(triv)[0] == 1


@given(st.integers(0, 10**6))
@settings(max_examples=20, deadline=None)
def test_orbit_bound_two_routes(seed):
    g = random_connected_graph(random.Random(seed), 6, 4)
    a = automorphism_action(g)
    assert vertex_stabilizer_orbit_bound(a)[0] == orbit_bound_via_stabilizers(a)


@given(st.integers(0, 10**6), st.integers(0, 10**6))
@settings(max_examples=40, deadline=None)
def test_canonical_form_is_invariant(seed, seed2):
    rng = random.Random(seed)
    g = random_connected_graph(rng, 6, 4)
    h = _shuffle(g, random.Random(seed2))
    assert canonical_form(g).certificate == canonical_form(h).certificate
    assert find_isomorphism(g, h) is not None


@given(st.integers(0, 10**6), st.integers(0, 10**6))
@settings(max_examples=60, deadline=None)
def test_canonical_form_decides_isomorphism(s1, s2):
    g = random_connected_graph(random.Random(s1), 5, 3)
    h = random_connected_graph(random.Random(s2), 5, 3)
    same = canonical_form(g).certificate == canonical_form(h).certificate
    assert same == nx.is_isomorphic(_nx(g), _nx(h))
    assert (find_isomorphism(g, h) is not None) == same


def test_isomorphism_is_a_graph_map():
    g = cycle_graph(6)
    h = _shuffle(g, random.Random(1))
    f = find_isomorphism(g, h)
    assert f.is_isomorphism()
    assert find_isomorphism(cycle_graph(6), complete_bipartite(2, 3)) is None


def test_gos_automorphisms_of_trivial_pieces():
    assert len(gos_automorphisms(trivial_gos(cycle_graph(3)))) == 6
    auts = gos_automorphisms(trivial_gos(path_graph(1)))
    assert len(auts) == 2
    assert sum(a.swaps_pieces() for a in auts) == 1
    assert sum(a.is_identity() for a in auts) == 1


@pytest.mark.parametrize("n", [3, 4, 5])
def test_leaf_pairs_on_cycles(n):
    assert automorphism_group(decorated_cycle(n)).order() == 2 ** n * 2 * n


@given(st.integers(0, 10**6))
@settings(max_examples=15, deadline=None)
def test_leaf_pairs_multiply_the_group(seed):
    g = random_connected_graph(random.Random(seed), 5, 3)
    assert automorphism_group(add_leaf_pairs(g)).order() >= 2 ** g.num_vertices() * automorphism_group(g).order()


def test_leaf_swaps_are_normal():
    X = decorated_cycle(4)
    full = automorphism_group(X)
    _, K = decorated_cycle_action(4)
    assert K.order() == 16 and K.is_subgroup_of(full) and is_normal(full, K)
