from __future__ import annotations

from dataclasses import replace

import pytest
from util import glues

from graphdisc.autgrp import automorphism_group
from graphdisc.catalog import hat_instances
from graphdisc.errors import GluingMismatch, HatConditionViolated, NotFree, NotNormal
from graphdisc.graph import GraphMorphism
from graphdisc.hatcover import (CONDITIONS, assemble_hat_ball, check_ball_vertex, check_hat_conditions,
                                twist_attachment, verify_and_glue_hat)
from graphdisc.permgrp import PermGroup, Permutation, index, split_graph_perm

INSTANCES = hat_instances()
MUTABLE = [n for n, d in INSTANCES.items()
           if any(automorphism_group(d.edge_space(e)).order() > 1 for e in d.quotient.geometric_edges())]


def test_instance_count():
    assert len(INSTANCES) >= 3 and len(MUTABLE) >= 3


@pytest.mark.parametrize("name", sorted(INSTANCES))
def test_instances_glue(name):
    data = INSTANCES[name]
    assert check_hat_conditions(data) == {c: "pass" for c in CONDITIONS}
    glue = verify_and_glue_hat(data)
    for (v, lattice), vc in glue.covers.items():
        assert vc.regular
        assert vc.degree == vc.deck_order == index(getattr(data, lattice)[v], data.Qhat[v])
    for v, piece in glue.vertex_pieces.items():
        assert piece.graph.num_vertices() * data.Qhat[v].order() == data.vertex_spaces[v].num_vertices()


@pytest.mark.parametrize("name", MUTABLE)
def test_twists_match_oracle(name):
    data = INSTANCES[name]
    assert glues(data)
    hits = 0
    for l in data.quotient.darts:
        E = data.edge_space(l)
        for p in automorphism_group(E).sorted_elements():
            if p.is_identity():
                continue
            vm, dm = split_graph_perm(p)
            t = twist_attachment(data, l, GraphMorphism(E, E, vm, dm))
            if glues(t):
                verify_and_glue_hat(t)
            else:
                hits += 1
                with pytest.raises(GluingMismatch):
                    verify_and_glue_hat(t)
                assert check_hat_conditions(t)["GluingCondition"] != "pass"
    assert hits > 0


def test_condition_failures_are_reported():
    data = INSTANCES["hexagon"]
    v = data.quotient.vertices[0]
    refl = next(g for g in data.Q[v].generators if g(("v", 0)) == ("v", 0))
    bad = replace(data, Qhat={**data.Qhat, v: PermGroup(data.Q[v].domain, [refl])})
    rep = check_hat_conditions(bad)
    assert rep["Free"] == "pass"
    assert rep["Equivariance"] != "pass" and rep["VertexSpaceCommonCovers"] != "pass"
    with pytest.raises((HatConditionViolated, NotNormal)):
        verify_and_glue_hat(bad)
    bad = replace(data, Gamma={**data.Gamma, v: PermGroup(data.Q[v].domain, [refl])})
    assert check_hat_conditions(bad)["Free"] != "pass"
    with pytest.raises(NotFree):
        verify_and_glue_hat(bad)


@pytest.mark.parametrize("name", sorted(INSTANCES))
@pytest.mark.parametrize("r", [0, 1, 2])
def test_balls_verify(name, r):
    data = INSTANCES[name]
    ball = assemble_hat_ball(data, r)
    assert ball.ok
    S = ball.gos.graph
    assert S.is_tree() and S.is_connected()
    assert len(ball.checks) == 2 * sum(1 for s in S.vertices if len(s) < r)
    assert set(ball.boundary) == {s for s in S.vertices if len(s) == r}


def test_boundary_vertices_are_incomplete():
    data = INSTANCES["hexagon-z6"]
    glue = verify_and_glue_hat(data)
    ball = assemble_hat_ball(data, 1, glue=glue)
    leaf = ball.boundary[0]
    assert not check_ball_vertex(data, glue, ball, leaf)["ok"]
    assert check_ball_vertex(data, glue, ball, ball.root)["ok"]


def test_ball_rejects_negative_radius():
    with pytest.raises(ValueError):
        assemble_hat_ball(INSTANCES["hexagon"], -1)
