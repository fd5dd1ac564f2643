from __future__ import annotations

import random

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from util import gos_base, to_nx, walk_map

from graphdisc.autgrp import gos_automorphisms
from graphdisc.builders import cycle_graph, path_graph, single_vertex
from graphdisc.catalog import covering_catalog, wrap_cycle
from graphdisc.errors import EdgeInversion, InvalidGraphOfSpaces, NonCommuting, NotFree
from graphdisc.gos import (GoSMorphism, GraphOfSpaces, check_gos_covering, deck_group, fiber_product,
                           gos_voltage_cover, identity_gos_morphism, is_fiber_product_diagram, quotient_gos,
                           total_space, trivial_gos)
from graphdisc.graph import GraphMorphism, SerreGraph, disjoint_union, identity_morphism, is_covering
from graphdisc.voltage import random_connected_cover, random_connected_graph


def test_total_space_counts():
    y = gos_base()
    ts = total_space(y).graph
    assert ts.num_vertices() == 6 + 2
    assert ts.num_darts() == 10 + 2 * 4
    assert ts.is_connected()
    # H1 rank: path contributes 0, each rung pair closes one cycle
    assert ts.num_edges() - ts.num_vertices() + 1 == 2


def test_total_space_of_trivial_pieces():
    g = cycle_graph(5)
    ts = total_space(trivial_gos(g)).graph
    # the total space subdivides every edge
    assert nx.is_isomorphic(to_nx(ts), nx.cycle_graph(10))


def test_disjointness_is_opt_in():
    L = path_graph(2)
    X = path_graph(2)
    pt = single_vertex()
    at = {e: GraphMorphism(pt, X, {0: 0}, {}) for e in L.darts}
    GraphOfSpaces(L, {v: X for v in L.vertices}, {r: pt for r in L.geometric_edges()}, at)
    with pytest.raises(InvalidGraphOfSpaces):
        GraphOfSpaces(L, {v: X for v in L.vertices}, {r: pt for r in L.geometric_edges()}, at,
                      require_disjoint=True)


def test_invalid_gos():
    L = path_graph(1)
    pt = single_vertex()
    two = SerreGraph([0, 1], {})
    with pytest.raises(InvalidGraphOfSpaces):
        GraphOfSpaces(L, {0: two, 1: pt}, {L.geometric_edges()[0]: pt}, {e: ({0: 0}, {}) for e in L.darts})
    with pytest.raises(InvalidGraphOfSpaces):
        GraphOfSpaces(L, {0: pt, 1: pt}, {L.geometric_edges()[0]: pt}, {})


def test_six_cycles_over_triangle():
    f = wrap_cycle(6, 3)
    fp = fiber_product(f, f)
    assert len(fp.components) == 2
    for c, p1, p2 in fp.components:
        assert nx.is_isomorphic(to_nx(c), nx.cycle_graph(6))
        assert is_covering(p1).degree == 1 and is_covering(p2).degree == 1
    assert is_fiber_product_diagram(fp.pi1, fp.pi2, f, f)


def test_four_and_six_cycles_over_bigon():
    fp = fiber_product(wrap_cycle(4, 2), wrap_cycle(6, 2))
    assert len(fp.components) == 1
    assert nx.is_isomorphic(to_nx(fp.graph), nx.cycle_graph(12))


def test_fiber_product_witnesses():
    f = wrap_cycle(6, 3)
    fp = fiber_product(f, f)
    c, p1, p2 = fp.components[0]
    rep = is_fiber_product_diagram(p1, p2, f, f)
    assert not rep and rep.witness["reason"] == "existence"
    doubled = disjoint_union({0: fp.graph, 1: fp.graph})
    q1 = GraphMorphism(doubled, f.source, {x: fp.pi1.vmap[x[1]] for x in doubled.vertices},
                       {d: fp.pi1.dmap[d[1]] for d in doubled.darts})
    q2 = GraphMorphism(doubled, f.source, {x: fp.pi2.vmap[x[1]] for x in doubled.vertices},
                       {d: fp.pi2.dmap[d[1]] for d in doubled.darts})
    rep = is_fiber_product_diagram(q1, q2, f, f)
    assert not rep and rep.witness["reason"] == "uniqueness"
    with pytest.raises(NonCommuting):
        is_fiber_product_diagram(fp.pi1, fp.pi1, f, wrap_cycle(6, 3).compose(
            GraphMorphism(f.source, f.source, {i: (i + 1) % 6 for i in range(6)},
                          {(i, s): ((i + 1) % 6, s) for i in range(6) for s in (1, -1)})))


@given(st.integers(0, 10**6))
@settings(max_examples=100, deadline=None)
def test_pullback_of_cover_is_cover(seed):
    rng = random.Random(seed)
    g = random_connected_graph(rng, 5, 4)
    top = 3 if g.num_edges() >= g.num_vertices() else 1
    _, f1 = random_connected_cover(g, rng.randint(1, top), rng)
    f2 = walk_map(g, rng.randint(1, 6), rng) if rng.random() < 0.5 else random_connected_cover(g, top, rng)[1]
    fp = fiber_product(f1, f2)
    deg = is_covering(f1).degree
    for c, p1, p2 in fp.components:
        rep = is_covering(p2)
        assert rep.is_covering
    assert sum(c.num_vertices() for c, _, _ in fp.components) == deg * f2.source.num_vertices()
    assert is_fiber_product_diagram(fp.pi2, fp.pi1, f2, f1)


def test_catalog_covers_pair_with_walks():
    rng = random.Random(5)
    for name, f in covering_catalog().items():
        for _ in range(3):
            h = walk_map(f.target, 4, rng)
            fp = fiber_product(f, h)
            assert all(is_covering(p2) for _, _, p2 in fp.components), name


def test_gos_voltage_covers_verify():
    y = gos_base()
    y2, f2 = gos_voltage_cover(y, 2, {(0, 1): (1, 0)})
    rep = check_gos_covering(f2)
    assert rep.is_covering and rep.degree == 2
    assert check_gos_covering(identity_gos_morphism(y)).degree == 1


def test_non_covering_gos_morphism():
    c3 = cycle_graph(3)
    y = trivial_gos(c3)
    p = path_graph(2)
    src = trivial_gos(p)
    base = GraphMorphism(p, c3, {0: 0, 1: 1, 2: 2}, {(0, 1): (0, 1), (0, -1): (0, -1), (1, 1): (1, 1),
                                                      (1, -1): (1, -1)})
    pt = identity_morphism(single_vertex())
    f = GoSMorphism(src, y, base, {v: pt for v in p.vertices}, {r: pt for r in p.geometric_edges()})
    assert not check_gos_covering(f)


def test_deck_groups():
    y = gos_base()
    _, f2 = gos_voltage_cover(y, 2, {(0, 1): (1, 0)})
    d = deck_group(f2)
    assert d.order() == 2 and d.regular
    _, f3 = gos_voltage_cover(y, 3, {(0, 1): (1, 2, 0), (1, 1): (0, 2, 1)})
    d = deck_group(f3)
    assert d.degree == 3 and d.order() == 1 and not d.regular


def test_quotient_by_deck_group():
    y = gos_base()
    y2, f2 = gos_voltage_cover(y, 2, {(0, 1): (1, 0)})
    gens = [a for a in deck_group(f2).elements if not a.is_identity()]
    q, proj = quotient_gos(y2, gens)
    assert q.graph.num_vertices() == 1 and q.graph.num_edges() == 2
    assert q.vertex_space(q.graph.vertices[0]).num_vertices() == 6
    assert check_gos_covering(proj).degree == 2


def test_quotient_rejections():
    auts = gos_automorphisms(trivial_gos(path_graph(1)))
    flip = next(a for a in auts if a.swaps_pieces())
    with pytest.raises(EdgeInversion):
        quotient_gos(trivial_gos(path_graph(1)), [flip])
    y = trivial_gos(cycle_graph(4))
    auts = gos_automorphisms(y)
    refl = next(a for a in auts if a.vmap[0] == 0 and a.vmap[1] == 3)
    with pytest.raises((NotFree, EdgeInversion)):
        quotient_gos(y, [refl])
    rot2 = next(a for a in auts if all(a.vmap[i] == (i + 2) % 4 for i in range(4)))
    q, proj = quotient_gos(y, [rot2])
    assert q.graph.num_vertices() == 2 and q.graph.num_edges() == 2
    assert check_gos_covering(proj).degree == 2
