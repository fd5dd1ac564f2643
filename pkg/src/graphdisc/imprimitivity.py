"""Imprimitivity systems from normal subgroups and induced quotient actions."""
from __future__ import annotations

from .errors import NotInvariant
from .graph import SerreGraph, VertexPartition, quotient_by_partition
from .permgrp import (GroupAction, PermGroup, action_kernel, intersection,
                      require_normal)


def imprimitivity_from_normal(a: GroupAction, K: PermGroup) -> VertexPartition:
    """K-orbits of vertices; invariant under ``a.group`` because K is normal."""
    require_normal(a.group, K)
    kels = K.elements()
    seen = set()
    blocks = []
    for v in a.graph.vertices:
        if v in seen:
            continue
        orb = a.vertex_orbit(v, kels)
        seen |= orb
        blocks.append(orb)
    p = VertexPartition(blocks)
    check_invariant(a, p)
    return p


def check_invariant(a: GroupAction, p: VertexPartition) -> None:
    for g in a.group.generators:
        for b in p.blocks:
            if len({p.rep(a.act_vertex(g, v)) for v in b}) != 1:
                raise NotInvariant(f"block {sorted(b, key=repr)!r} is split by a generator")


def induced_quotient_action(a: GroupAction, p: VertexPartition):
    """Quotient graph, the induced action ``g.[v] = [g.v]`` and its kernel."""
    check_invariant(a, p)
    q, proj = quotient_by_partition(a.graph, p)
    maps = []
    for g in a.group.generators:
        vm = {r: p.rep(a.act_vertex(g, r)) for r in q.vertices}
        dm = {(x, y): (vm[x], vm[y]) for (x, y) in q.darts}
        maps.append((vm, dm))
    induced = GroupAction.from_maps(a.group, q, maps)
    return q, induced, action_kernel(induced)


def max_orbit_size(a: GroupAction, H: PermGroup) -> int:
    els = H.elements()
    return max((len(a.vertex_orbit(v, els)) for v in a.graph.vertices), default=1)


def orbit_bound_estimate(a: GroupAction, K: PermGroup, x) -> int:
    """``[G_x : K ∩ G_x] * max K-orbit size``: an upper bound for every ``|G_x . y|``."""
    gx = a.vertex_stabilizer(x)
    kx = intersection(K, gx)
    return (gx.order() // kx.order()) * max_orbit_size(a, K)


def quotient_graph(a: GroupAction, K: PermGroup) -> SerreGraph:
    return induced_quotient_action(a, imprimitivity_from_normal(a, K))[0]
