"""Committed finite instances: group actions on trees for blowups, decorated
cycles, graphs of spaces and hat-cover data."""
from __future__ import annotations

from .blowup import BlowupInput, act_on_rep, normalize_input
from .builders import add_leaf_pairs, cycle_graph, decorated_cycle, path_graph, single_vertex, star_graph
from .graph import GraphMorphism, SerreGraph, graph_from_edges
from .hatcover import HatCoverData
from .ids import sorted_ids
from .permgrp import (Domain, GroupAction, PermGroup, Permutation, graph_automorphism_perm,
                      graph_points)


def vertex_map_perm(g: SerreGraph, vm: dict) -> Permutation:
    """Automorphism of a simple graph from its vertex map (missing vertices fixed)."""
    full = {v: vm.get(v, v) for v in g.vertices}
    by_ends = {(g.iota(e), g.tau(e)): e for e in g.darts}
    dm = {e: by_ends[(full[g.iota(e)], full[g.tau(e)])] for e in g.darts}
    return graph_automorphism_perm(g, full, dm)


def embedding(src: SerreGraph, dst: SerreGraph, vm: dict) -> GraphMorphism:
    """Morphism between simple graphs determined by its vertex map."""
    by_ends = {(dst.iota(e), dst.tau(e)): e for e in dst.darts}
    dm = {e: by_ends[(vm[src.iota(e)], vm[src.tau(e)])] for e in src.darts}
    return GraphMorphism(src, dst, vm, dm)


def action_from_vertex_maps(G: PermGroup, T: SerreGraph, rule) -> GroupAction:
    """``rule(generator) -> vertex map``; the tree must be simple."""
    return GroupAction(G, T, [vertex_map_perm(T, rule(g)) for g in G.generators])


def orbit_reps(a: GroupAction) -> list:
    """Least representative of every vertex orbit and geometric-edge orbit."""
    els = a.group.sorted_elements()
    out, seen = [], set()
    T = a.graph
    for w in [("v", x) for x in T.vertices] + [("e", e) for e in T.geometric_edges()]:
        if w in seen:
            continue
        out.append(w)
        seen |= {act_on_rep(a, g, w) for g in els}
    return out


def _group(points, cycles_list) -> PermGroup:
    d = Domain(points)
    return PermGroup(d, [Permutation.from_cycles(c, d) for c in cycles_list])


# ---------------------------------------------------------------------------
# blowup actions


def _edge():
    return graph_from_edges([("u", "v")])


def _blowup(name, G, T, rule, K=None, omega0=None, S=None, F=None, action=None):
    a = action if action is not None else action_from_vertex_maps(G, T, rule)
    K = K if K is not None else PermGroup.trivial(G.domain)
    raw = BlowupInput(G, T, a, omega0 if omega0 is not None else orbit_reps(a), K, S or {}, F or [])
    return name, raw


def blowup_catalog() -> dict:
    """Name -> normalized BlowupInput; every group has order at most 48 and
    every tree at most 9 vertices."""
    items = []
    S3 = PermGroup.symmetric([1, 2, 3])
    items.append(_blowup("sym3-edge", S3, _edge(), lambda g: {}))

    T = _edge()
    Z2 = _group([0, 1], [[(0, 1)]])
    swap = graph_automorphism_perm(T, {"u": "v", "v": "u"}, {(0, 1): (0, -1), (0, -1): (0, 1)})
    inv = GroupAction(Z2, T, [swap])
    e = T.geometric_edges()[0]
    items.append(_blowup("z2-inversion", Z2, T, None, action=inv, omega0=[("v", "u"), ("e", e)],
                         S={("e", e): [Z2.generators[0]]}, F=[Z2.identity, Z2.generators[0]]))

    st3 = star_graph(3)
    Z3 = _group([1, 2, 3], [[(1, 2, 3)]])
    items.append(_blowup("z3-star", Z3, st3, lambda g: {i: g(i) for i in (1, 2, 3)}))
    items.append(_blowup("sym3-star", S3, st3, lambda g: {i: g(i) for i in (1, 2, 3)}))
    items.append(_blowup("sym3-star-k2", S3, st3, lambda g: {i: g(i) for i in (1, 2, 3)},
                         K=PermGroup(S3.domain, [Permutation.from_cycles([(1, 2)], S3.domain)])))

    st4 = star_graph(4)
    S4 = PermGroup.symmetric([1, 2, 3, 4])
    items.append(_blowup("sym4-star", S4, st4, lambda g: {i: g(i) for i in (1, 2, 3, 4)}))
    D4 = _group([1, 2, 3, 4], [[(1, 2, 3, 4)], [(1, 3)]])
    items.append(_blowup("d4-star", D4, st4, lambda g: {i: g(i) for i in (1, 2, 3, 4)}))
    Z4 = _group([1, 2, 3, 4], [[(1, 2, 3, 4)]])
    items.append(_blowup("z4-star-k2", Z4, st4, lambda g: {i: g(i) for i in (1, 2, 3, 4)},
                         K=PermGroup(Z4.domain, [Permutation.from_cycles([(1, 3), (2, 4)], Z4.domain)])))

    S4xZ2 = _group([1, 2, 3, 4, "a", "b"], [[(1, 2)], [(1, 2, 3, 4)], [("a", "b")]])
    items.append(_blowup("sym4xz2-star", S4xZ2, st4, lambda g: {i: g(i) for i in (1, 2, 3, 4)}))

    p2 = path_graph(2)
    refl = _group([0, 2], [[(0, 2)]])
    items.append(_blowup("z2-path-reflection", refl, p2, lambda g: {0: g(0), 2: g(2)}))

    p3 = path_graph(3)
    refl3 = _group([0, 1, 2, 3], [[(0, 3), (1, 2)]])
    items.append(_blowup("z2-path3-inversion", refl3, p3, lambda g: {i: g(i) for i in range(4)}))

    spider = graph_from_edges([(0, 1), (1, 2), (0, 3), (3, 4), (0, 5), (5, 6)], range(7))
    S3legs = _group([1, 3, 5], [[(1, 3)], [(1, 3, 5)]])

    def legs(g):
        m = {}
        for a in (1, 3, 5):
            m[a] = g(a)
            m[a + 1] = g(a) + 1
        return m
    items.append(_blowup("sym3-spider", S3legs, spider, legs))

    double = graph_from_edges([(0, 1), (0, 2), (0, 3), (0, 4), (4, 5), (4, 6), (4, 7)], range(8))
    # S3 permuting both leaf triples simultaneously, times the swap of the two centers
    Dd = _group([1, 2, 3, 5, 6, 7, 0, 4], [[(1, 2), (5, 6)], [(1, 2, 3), (5, 6, 7)],
                                           [(0, 4), (1, 5), (2, 6), (3, 7)]])
    items.append(_blowup("s3xz2-double-star", Dd, double, lambda g: {v: g(v) for v in range(8)}))

    triv = PermGroup.trivial(Domain([0]))
    items.append(_blowup("trivial-vertex", triv, single_vertex(), lambda g: {}))

    Z2t = _group([0, 1], [[(0, 1)]])
    items.append(_blowup("z2-trivial-path-kfull", Z2t, path_graph(2), lambda g: {}, K=Z2t))

    return {name: normalize_input(raw) for name, raw in items}


# ---------------------------------------------------------------------------
# coverings


def wrap_cycle(n: int, m: int) -> GraphMorphism:
    """``C_n -> C_m`` winding ``n / m`` times."""
    if n % m:
        raise ValueError("m must divide n")
    src, dst = cycle_graph(n), cycle_graph(m)
    dm = {(i, s): (i % m, s) for i in range(n) for s in (1, -1)}
    return GraphMorphism(src, dst, {i: i % m for i in range(n)}, dm)


def covering_catalog() -> dict:
    """Name -> covering map between small connected graphs."""
    from .builders import bouquet, complete_graph, theta_graph
    from .graph import identity_morphism
    from .voltage import voltage_cover

    out = {
        "c3-identity": identity_morphism(cycle_graph(3)),
        "c6-over-c3": wrap_cycle(6, 3),
        "c9-over-c3": wrap_cycle(9, 3),
        "c4-over-bigon": wrap_cycle(4, 2),
        "c6-over-bigon": wrap_cycle(6, 2),
        "c5-over-loop": wrap_cycle(5, 1),
    }
    th = theta_graph(3)
    e0, e1, _ = th.geometric_edges()
    out["theta-double"] = voltage_cover(th, 2, {e0: (1, 0)})[1]
    out["theta-triple"] = voltage_cover(th, 3, {e0: (1, 2, 0), e1: (1, 0, 2)})[1]
    b2 = bouquet(2)
    a, b = b2.geometric_edges()
    out["bouquet-irregular-3"] = voltage_cover(b2, 3, {a: (1, 2, 0), b: (0, 2, 1)})[1]
    out["bouquet-regular-4"] = voltage_cover(b2, 4, {a: (1, 0, 3, 2), b: (2, 3, 0, 1)})[1]
    k4 = complete_graph(4)
    out["k4-double"] = voltage_cover(k4, 2, {k4.geometric_edges()[0]: (1, 0)})[1]
    return out


# ---------------------------------------------------------------------------
# decorated cycles


def decorated_cycle_action(n: int) -> tuple[GroupAction, PermGroup]:
    """Leaf swaps at every cycle vertex and the rotation, acting on the
    decorated n-cycle.  Returns the action and the leaf-swap subgroup."""
    X = decorated_cycle(n)
    swaps = [vertex_map_perm(X, {(v, "leaf", 0): (v, "leaf", 1), (v, "leaf", 1): (v, "leaf", 0)})
             for v in range(n)]
    rot = {}
    for v in range(n):
        rot[v] = (v + 1) % n
        for k in (0, 1):
            rot[(v, "leaf", k)] = ((v + 1) % n, "leaf", k)
    rotation = vertex_map_perm(X, rot)
    d = graph_points(X)
    G = PermGroup(d, swaps + [rotation])
    K = PermGroup(d, swaps)
    return GroupAction.natural(G, X), K


# ---------------------------------------------------------------------------
# hat-cover instances


def cube_graph(d: int) -> SerreGraph:
    n = 1 << d
    return graph_from_edges([(i, i ^ (1 << k)) for i in range(n) for k in range(d) if i < i ^ (1 << k)],
                            range(n))


def _cycle_group(X: SerreGraph, n: int, steps, reflect: bool = False) -> PermGroup:
    gens = [vertex_map_perm(X, {i: (i + s) % n for i in range(n)}) for s in steps]
    if reflect:
        gens.append(vertex_map_perm(X, {i: (-i) % n for i in range(n)}))
    return PermGroup(graph_points(X), gens)


def _translations(X: SerreGraph, masks) -> PermGroup:
    return PermGroup(graph_points(X), [vertex_map_perm(X, {i: i ^ m for i in X.vertices}) for m in masks])


def _polygon_instance(name, n, gamma, gamma2, qhat) -> HatCoverData:
    L = _edge()
    X = cycle_graph(n)
    pt = single_vertex()
    att = {l: embedding(pt, X, {0: 0}) for l in L.darts}
    Q = _cycle_group(X, n, [1], reflect=True)
    groups = {k: {v: _cycle_group(X, n, s) for v in L.vertices} for k, s in
              (("Gamma", gamma), ("Gamma2", gamma2), ("Qhat", qhat))}
    return HatCoverData(L, {v: X for v in L.vertices}, {L.geometric_edges()[0]: pt}, att,
                        {v: Q for v in L.vertices}, groups["Gamma"], groups["Gamma2"], groups["Qhat"], name)


def tesseract_instance() -> HatCoverData:
    """Two vertex orbits; pieces are 4-cubes, edge pieces 3-cubes glued along
    the facets of the last coordinate; all groups are translation groups."""
    L = _edge()
    X, E = cube_graph(4), cube_graph(3)
    att = {l: embedding(E, X, {i: i for i in range(8)}) for l in L.darts}
    Q = _translations(X, [1, 2, 4, 8])
    G1 = _translations(X, [3, 12])
    G2 = _translations(X, [3, 10])
    Qh = _translations(X, [3])
    vs = L.vertices
    return HatCoverData(L, {v: X for v in vs}, {L.geometric_edges()[0]: E}, att, {v: Q for v in vs},
                        {v: G1 for v in vs}, {v: G2 for v in vs}, {v: Qh for v in vs}, "tesseract")


def skew_tesseract_instance() -> HatCoverData:
    """4-cube pieces; the edge piece is a 3-cube glued along the facet with
    last coordinate 0 at one end and with third coordinate 0 at the other."""
    L = _edge()
    X, E = cube_graph(4), cube_graph(3)
    e = L.geometric_edges()[0]
    u, v = L.tau(L.bar(e)), L.tau(e)

    def skew(i):
        return (i & 3) | ((i & 4) << 1)
    att = {L.bar(e): embedding(E, X, {i: i for i in range(8)}), e: embedding(E, X, {i: skew(i) for i in range(8)})}
    Q = _translations(X, [1, 2, 4, 8])
    return HatCoverData(L, {u: X, v: X}, {e: E}, att, {u: Q, v: Q},
                        {u: _translations(X, [3, 12]), v: _translations(X, [3, 12])},
                        {u: _translations(X, [3, 10]), v: _translations(X, [3, 6])},
                        {u: _translations(X, [3]), v: _translations(X, [3])}, "skew-tesseract")


def penteract_loop_instance() -> HatCoverData:
    """One vertex orbit with a loop; the piece is a 5-cube whose 3-faces with
    last coordinate 0 and 1 carry the two ends of the loop."""
    L = graph_from_edges([(0, 0)], [0])
    X, E = cube_graph(5), cube_graph(3)
    e = L.geometric_edges()[0]
    b = L.bar(e)
    att = {e: embedding(E, X, {i: i for i in range(8)}), b: embedding(E, X, {i: i + 16 for i in range(8)})}
    Q = _translations(X, [1, 2, 4, 8])
    return HatCoverData(L, {0: X}, {e: E}, att, {0: Q}, {0: _translations(X, [3, 12])},
                        {0: _translations(X, [3, 10])}, {0: _translations(X, [3])}, "penteract-loop")


def hat_instances() -> dict:
    out = [
        _polygon_instance("hexagon", 6, [2], [2], [2]),
        _polygon_instance("hexagon-z6", 6, [1], [1], [2]),
        _polygon_instance("dodecagon", 12, [2], [3], [6]),
        skew_tesseract_instance(),
        tesseract_instance(),
        penteract_loop_instance(),
    ]
    return {d.name: d for d in out}
