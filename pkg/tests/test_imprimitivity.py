from __future__ import annotations

import pytest

from graphdisc.autgrp import automorphism_action
from graphdisc.builders import cycle_graph
from graphdisc.catalog import decorated_cycle_action
from graphdisc.errors import NotInvariant, NotNormal
from graphdisc.graph import VertexPartition
from graphdisc.imprimitivity import (check_invariant, imprimitivity_from_normal, induced_quotient_action,
                                     orbit_bound_estimate, quotient_graph)
from graphdisc.permgrp import PermGroup, all_subgroups, is_normal


@pytest.mark.parametrize("n", [3, 4])
def test_decorated_cycle_blocks(n):
    a, K = decorated_cycle_action(n)
    p = imprimitivity_from_normal(a, K)
    expected = {frozenset({v}) for v in range(n)} | {frozenset({(v, "leaf", 0), (v, "leaf", 1)})
                                                     for v in range(n)}
    assert p.as_sets() == expected
    q, induced, kernel = induced_quotient_action(a, p)
    assert q.num_vertices() == 2 * n
    assert kernel.order() == 2 ** n and kernel == K


def test_quotient_graph_shape():
    a, K = decorated_cycle_action(4)
    q = quotient_graph(a, K)
    assert sorted(q.degree(v) for v in q.vertices) == [1] * 4 + [3] * 4


def test_non_normal_rejected():
    a, _ = decorated_cycle_action(3)
    bad = next(S for S in all_subgroups(a.group) if not is_normal(a.group, S))
    with pytest.raises(NotNormal):
        imprimitivity_from_normal(a, bad)


def test_non_invariant_partition():
    a = automorphism_action(cycle_graph(4))
    with pytest.raises(NotInvariant):
        check_invariant(a, VertexPartition([[0, 1], [2, 3]]))
    check_invariant(a, VertexPartition([[0, 2], [1, 3]]))


def test_every_normal_subgroup_gives_invariant_blocks():
    a, _ = decorated_cycle_action(3)
    G = a.group
    for K in all_subgroups(G):
        if not is_normal(G, K):
            continue
        p = imprimitivity_from_normal(a, K)
        check_invariant(a, p)
        _, _, kernel = induced_quotient_action(a, p)
        # K acts trivially on its own orbits
        assert K.is_subgroup_of(kernel)
        for x in a.graph.vertices:
            est = orbit_bound_estimate(a, K, x)
            for y in a.graph.vertices:
                assert len(a.vertex_orbit(y, a.vertex_stabilizer(x).elements())) <= est


def test_quotient_of_trivial_group_is_identity():
    a, K = decorated_cycle_action(3)
    triv = PermGroup.trivial(a.group.domain)
    p = imprimitivity_from_normal(a, triv)
    assert p == VertexPartition.singletons(a.graph.vertices)
