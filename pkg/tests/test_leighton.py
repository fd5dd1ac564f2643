from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from util import gos_base

from graphdisc.autgrp import Coloring
from graphdisc.builders import complete_bipartite, complete_graph, cycle_graph, path_graph, star_graph, theta_graph
from graphdisc.errors import NoCommonCover
from graphdisc.gos import check_gos_covering, gos_voltage_cover
from graphdisc.graph import is_covering
from graphdisc.leighton import (brute_force_common_cover, common_cover_gos, common_cover_graphs, degree_refinement,
                                find_covering_map, joint_refinement, profiles_match, refinement_preserved)
from graphdisc.voltage import random_connected_cover, random_connected_graph


def _naive_classes(g) -> set:
    """Coarsest equitable partition by plain iteration of neighbor-count signatures."""
    col = {v: 0 for v in g.vertices}
    while True:
        sig = {v: (col[v], tuple(sorted(col[g.tau(e)] for e in g.out_darts(v)))) for v in g.vertices}
        names = {s: i for i, s in enumerate(sorted(set(sig.values())))}
        new = {v: names[sig[v]] for v in g.vertices}
        if len(set(new.values())) == len(set(col.values())):
            break
        col = new
    out = {}
    for v, c in col.items():
        out.setdefault(c, set()).add(v)
    return {frozenset(b) for b in out.values()}


def _is_equitable(g, classes) -> bool:
    cls = {v: i for i, b in enumerate(classes) for v in b}
    for b in classes:
        counts = {tuple(sorted(cls[g.tau(e)] for e in g.out_darts(v))) for v in b}
        if len(counts) != 1:
            return False
    return True


@pytest.mark.parametrize("g,n", [
    (cycle_graph(5), 1),
    (star_graph(3), 2),
    (path_graph(4), 3),
    (complete_bipartite(2, 3), 2),
    (theta_graph(3), 1),
])
def test_refinement_examples(g, n):
    p = degree_refinement(g)
    assert p.num_classes() == n
    assert set(p.classes) == _naive_classes(g)


@given(st.integers(0, 10**6))
@settings(max_examples=50, deadline=None)
def test_refinement_is_coarsest_equitable(seed):
    g = random_connected_graph(random.Random(seed), 7, 4)
    p = degree_refinement(g)
    assert _is_equitable(g, p.classes)
    assert set(p.classes) == _naive_classes(g)


@given(st.integers(0, 10**6))
@settings(max_examples=40, deadline=None)
def test_refinement_preserved_by_covers(seed):
    rng = random.Random(seed)
    g = random_connected_graph(rng, 6, 4)
    n = rng.randint(1, 3) if g.num_edges() >= g.num_vertices() else 1
    _, f = random_connected_cover(g, n, rng)
    assert refinement_preserved(f)
    assert profiles_match(f.source, g)


def test_joint_refinement_mismatch():
    j = joint_refinement(cycle_graph(3), star_graph(3))
    assert not j.matched and j.reason == "profile mismatch"
    with pytest.raises(NoCommonCover, match="profile mismatch"):
        common_cover_graphs(cycle_graph(3), star_graph(3))
    assert brute_force_common_cover(cycle_graph(3), star_graph(3)) is None


def test_oracle_examples():
    r = brute_force_common_cover(cycle_graph(4), cycle_graph(6))
    assert r.order == 12 and r.graph.num_vertices() == 12
    assert is_covering(r.p1).degree == 3 and is_covering(r.p2).degree == 2
    r = brute_force_common_cover(cycle_graph(3), cycle_graph(3))
    assert r.order == 3
    # K33 itself covers the theta graph
    assert brute_force_common_cover(theta_graph(3), complete_bipartite(3, 3)).order == 6
    assert brute_force_common_cover(theta_graph(3), complete_bipartite(2, 3)) is None


def test_common_cover_of_equal_graphs_is_identity():
    g = complete_graph(4)
    z, p1, p2 = common_cover_graphs(g, g)
    assert z is g and is_covering(p1).degree == 1


@pytest.mark.parametrize("x1,x2,mult", [
    (cycle_graph(4), cycle_graph(6), 12),
    (complete_graph(4), complete_bipartite(3, 3), 12),
    (theta_graph(3), complete_bipartite(3, 3), 6),
])
def test_common_cover_examples(x1, x2, mult):
    z, p1, p2 = common_cover_graphs(x1, x2)
    assert z.is_connected() and z.num_vertices() % mult == 0
    for p, x in ((p1, x1), (p2, x2)):
        rep = is_covering(p)
        assert rep and rep.degree * x.num_vertices() == z.num_vertices()
    # the covering relation is recoverable by search
    assert find_covering_map(z, x2) is not None


def test_colored_common_cover():
    c6, c3 = cycle_graph(6), cycle_graph(3)
    col6 = Coloring(vertex={i: i % 3 for i in range(6)})
    col3 = Coloring(vertex={i: i for i in range(3)})
    z, p1, p2 = common_cover_graphs(c6, c3, col6, col3)
    for v in z.vertices:
        assert col6.vcolor(p1.vmap[v]) == col3.vcolor(p2.vmap[v])
    with pytest.raises(NoCommonCover):
        common_cover_graphs(c6, c3, col6, Coloring(vertex={0: 1}))


@given(st.integers(0, 10**6))
@settings(max_examples=25, deadline=None)
def test_random_cover_pairs(seed):
    rng = random.Random(seed)
    g = random_connected_graph(rng, 5, 4)
    top = 3 if g.num_edges() >= g.num_vertices() else 1
    x1, _ = random_connected_cover(g, rng.randint(1, top), rng)
    x2, _ = random_connected_cover(g, rng.randint(1, top), rng)
    z, p1, p2 = common_cover_graphs(x1, x2)
    assert is_covering(p1) and is_covering(p2)
    assert refinement_preserved(p1) and refinement_preserved(p2)


def test_common_cover_of_graph_of_spaces():
    y = gos_base()
    y1, _ = gos_voltage_cover(y, 2, {(0, 1): (1, 0)})
    y2, _ = gos_voltage_cover(y, 3, {(0, 1): (1, 2, 0), (1, 1): (0, 2, 1)})
    zy, f1, f2 = common_cover_gos(y1, y2)
    r1, r2 = check_gos_covering(f1), check_gos_covering(f2)
    assert r1 and r2
    assert r1.degree * y1.graph.num_vertices() == zy.graph.num_vertices()
