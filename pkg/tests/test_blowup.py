from __future__ import annotations

import random
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphdisc.blowup import (BlowupInput, blowup_imprimitivity_quotient, collapse_refinement, construct_blowup,
                              normalize_input, refine_tree, verify_blowup, vertex_count_formula)
from graphdisc.catalog import blowup_catalog
from graphdisc.errors import ContainmentViolated, NotATree, NotEquivariantFamily, NotNormal, OrbitRepsInvalid
from graphdisc.builders import cycle_graph
from graphdisc.permgrp import GroupAction, PermGroup, Permutation, graph_points

CATALOG = blowup_catalog()
NAMES = sorted(CATALOG)


def test_catalog_shape():
    assert len(CATALOG) >= 10
    for inp in CATALOG.values():
        assert inp.G.order() <= 48 and inp.T.num_vertices() <= 9 and inp.T.is_tree()
    inv = CATALOG["z2-inversion"]
    g = inv.G.generators[0]
    e = inv.T.geometric_edges()[0]
    assert inv.action.act_dart(g, e) == inv.T.bar(e)


@pytest.mark.parametrize("name", NAMES)
def test_catalog_blowups_verify(name):
    inp = CATALOG[name]
    r = construct_blowup(inp)
    rep = verify_blowup(r)
    assert rep.ok, rep.witnesses
    # coset count computed directly from the element sets
    cosets = {frozenset(g * k for k in inp.K.elements()) for g in inp.G.elements()}
    assert r.X.num_vertices() == vertex_count_formula(r) == len(cosets) * len(inp.omega0)


@pytest.mark.parametrize("name", NAMES)
def test_normalized_input(name):
    inp = CATALOG[name]
    for w in inp.omega0:
        Gw = inp.stabilizer(w)
        assert inp.K.is_subgroup_of(Gw)
        assert PermGroup(inp.G.domain, list(inp.K.generators) + list(inp.S[w])).order() == Gw.order()
    assert inp.G.identity in inp.F
    assert normalize_input(inp).K == inp.K


def test_inversion_example():
    r = construct_blowup(CATALOG["z2-inversion"])
    assert r.X.num_vertices() == 4
    assert {t for t in r.edge_type.values()} == {"I", "II"}


def test_missing_stabilizer_generators_disconnect_fibers():
    inp = CATALOG["sym3-edge"]
    raw = BlowupInput(inp.G, inp.T, inp.action, inp.omega0, inp.K, {}, [inp.G.identity])
    rep = verify_blowup(construct_blowup(raw))
    assert not rep.checks["vertex_fibers_connected"] and not rep.checks["connected"]
    assert rep.witnesses["vertex_fibers_connected"]["vertex"] in ("u", "v")


@pytest.mark.parametrize("name", ["sym3-edge", "z2-inversion", "d4-star", "sym3-spider"])
def test_perturbations_are_caught(name):
    r = construct_blowup(CATALOG[name])
    rng = random.Random(name)
    X = r.X
    d = rng.choice([e for e in X.darts if r.edge_type[e] == "II"])
    flipped = dict(r.edge_type)
    flipped[d] = "I"
    rep = verify_blowup(replace(r, edge_type=flipped))
    assert not rep.checks["type_dichotomy"] and rep.witnesses["type_dichotomy"]["dart"] in (d, X.bar(d))

    x = X.iota(d)
    moved = dict(r.p_vertex)
    moved[x] = r.p_vertex[X.tau(d)]
    rep = verify_blowup(replace(r, p_vertex=moved))
    assert not rep.ok

    dropped = dict(r.p_dart)
    dropped[d] = None
    rep = verify_blowup(replace(r, p_dart=dropped))
    assert not rep.checks["simplicial"]


def test_bad_reps_rejected():
    inp = CATALOG["sym3-star"]
    with pytest.raises(OrbitRepsInvalid):
        normalize_input(BlowupInput(inp.G, inp.T, inp.action, [("v", 0), ("v", 1), ("v", 2)], inp.K))
    with pytest.raises(OrbitRepsInvalid):
        normalize_input(BlowupInput(inp.G, inp.T, inp.action, [("v", 0)], inp.K))
    c = cycle_graph(3)
    triv = PermGroup.trivial(graph_points(c))
    with pytest.raises(NotATree):
        normalize_input(BlowupInput(triv, c, GroupAction.natural(triv, c), [], triv))


def test_refine_tree_examples():
    inp = CATALOG["sym3-star"]
    a, triv = inp.action, PermGroup.trivial(inp.G.domain)
    ref = refine_tree(inp.T, a, {0: triv, 1: triv})
    assert ref.tree.num_vertices() == 4 + 3 + 3 and ref.tree.is_tree()
    ref = refine_tree(inp.T, a, {0: a.vertex_stabilizer(0), 1: triv})
    assert ref.tree.num_vertices() == 4 + 1 + 3
    assert collapse_refinement(ref) == inp.T
    # the center stabilizer fixes its own refined link
    for k in a.vertex_stabilizer(0).elements():
        assert all(ref.action.act_dart(k, d) == d for d in ref.tree.link(0))


def test_refine_tree_rejections():
    inp = CATALOG["sym3-star"]
    a, triv = inp.action, PermGroup.trivial(inp.G.domain)
    d = inp.G.domain
    transposition = PermGroup(d, [Permutation.from_cycles([(1, 2)], d)])
    # not normal in the center stabilizer, so conjugates disagree
    with pytest.raises((NotEquivariantFamily, NotNormal)):
        refine_tree(inp.T, a, {0: transposition, 1: triv})
    with pytest.raises(NotEquivariantFamily):
        refine_tree(inp.T, a, {0: triv})
    with pytest.raises(NotEquivariantFamily):
        refine_tree(inp.T, a, {0: triv, 1: transposition})


@given(st.sampled_from(NAMES), st.integers(0, 10**6))
@settings(max_examples=30, deadline=None)
def test_refine_then_collapse(name, seed):
    inp = CATALOG[name]
    a = inp.action
    rng = random.Random(seed)
    fam = {}
    seen = set()
    for v in inp.T.vertices:
        if v in seen:
            continue
        seen |= a.vertex_orbit(v)
        Gv = a.vertex_stabilizer(v)
        choices = [Gv, PermGroup.trivial(inp.G.domain)]
        fam[v] = rng.choice(choices)
    ref = refine_tree(inp.T, a, fam)
    assert ref.tree.is_tree()
    assert collapse_refinement(ref) == inp.T


def test_quotient_examples():
    inp = CATALOG["sym3-edge"]
    r = construct_blowup(inp)
    q = blowup_imprimitivity_quotient(r, {"u": inp.G, "v": inp.G})
    assert q.result.X.num_vertices() == 3 and verify_blowup(q.result).ok
    assert all(q.trivial_on_stars.values())
    triv = PermGroup.trivial(inp.G.domain)
    q = blowup_imprimitivity_quotient(r, {"u": triv, "v": triv})
    assert q.result.X.num_vertices() == r.X.num_vertices()

    inp = CATALOG["sym3-star"]
    r = construct_blowup(inp)
    q = blowup_imprimitivity_quotient(r, {0: PermGroup.trivial(inp.G.domain), 1: inp.action.vertex_stabilizer(1)})
    assert q.result.X.num_vertices() == 12 and verify_blowup(q.result).ok


def test_quotient_containment():
    inp = CATALOG["sym3-star"]
    r = construct_blowup(inp)
    a = inp.action
    with pytest.raises(ContainmentViolated):
        blowup_imprimitivity_quotient(r, {0: a.vertex_stabilizer(0), 1: PermGroup.trivial(inp.G.domain)})
