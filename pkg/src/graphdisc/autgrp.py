"""Automorphism groups, isomorphisms and canonical forms of colored graphs.

Search strategy: joint color refinement, then individualization with
backtracking.  Automorphism groups are assembled level by level along a base
(each level contributes coset representatives of the next point stabilizer),
and the result is cross-checked against closure enumeration.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial
from typing import Mapping

from .errors import GraphDiscError
from .graph import GraphMorphism, SerreGraph
from .ids import idkey, min_id, sorted_ids
from .permgrp import (DEFAULT_ELEMENT_BOUND, GroupAction, PermGroup, Permutation,
                      graph_points, point_stabilizer)


@dataclass
class Coloring:
    """Vertex and dart labels; missing entries default to ``0``."""

    vertex: dict = field(default_factory=dict)
    dart: dict = field(default_factory=dict)

    def vcolor(self, v):
        return self.vertex.get(v, 0)

    def dcolor(self, e):
        return self.dart.get(e, 0)


def _ranked(values: Mapping, universe) -> dict:
    order = {c: i for i, c in enumerate(sorted(set(universe), key=idkey))}
    return {k: order[c] for k, c in values.items()}


def _initial(graphs, colorings):
    """Integer vertex/dart colors, ranked jointly over all graphs."""
    colorings = [c or Coloring() for c in colorings]
    vraw = [{v: c.vcolor(v) for v in g.vertices} for g, c in zip(graphs, colorings)]
    draw = [{e: c.dcolor(e) for e in g.darts} for g, c in zip(graphs, colorings)]
    vuni = [x for d in vraw for x in d.values()]
    duni = [x for d in draw for x in d.values()]
    return [_ranked(d, vuni) for d in vraw], [_ranked(d, duni) for d in draw]


def refine(graphs, vcols, dcols) -> list:
    """Joint color refinement; returns stable integer vertex colorings.

    A vertex signature is its color plus the multiset of
    ``(dart color, bar color, color of the far endpoint)`` over its link.
    """
    cols = [dict(c) for c in vcols]
    ncls = len({x for c in cols for x in c.values()})
    while True:
        sigs = []
        for g, c, dc in zip(graphs, cols, dcols):
            sigs.append({
                v: (c[v], tuple(sorted((dc[e], dc[g.bar(e)], c[g.iota(e)]) for e in g.link(v))))
                for v in g.vertices
            })
        allsig = sorted({s for d in sigs for s in d.values()})
        rank = {s: i for i, s in enumerate(allsig)}
        cols = [{v: rank[s] for v, s in d.items()} for d in sigs]
        if len(allsig) == ncls:
            return cols
        ncls = len(allsig)


def _cells(c: Mapping) -> dict:
    cells = {}
    for v, x in c.items():
        cells.setdefault(x, []).append(v)
    return cells


def _target_cell(c: Mapping):
    """Smallest non-singleton cell (ties: smallest color); None if discrete."""
    best = None
    for x, vs in _cells(c).items():
        if len(vs) > 1 and (best is None or (len(vs), x) < best[0]):
            best = ((len(vs), x), vs)
    return None if best is None else sorted_ids(best[1])


def _individualize(c: Mapping, v) -> dict:
    out = dict(c)
    out[v] = max(c.values()) + 1
    return out


def _dart_buckets(g: SerreGraph, dc: Mapping) -> dict:
    b = {}
    for e in g.darts:
        b.setdefault((g.iota(e), g.tau(e), dc[e], dc[g.bar(e)]), []).append(e)
    return b


def lift_vertex_map(g1: SerreGraph, dc1: Mapping, g2: SerreGraph, dc2: Mapping, vmap: Mapping):
    """A color-preserving dart bijection over ``vmap``, or None."""
    if g1.num_darts() != g2.num_darts():
        return None
    buckets = _dart_buckets(g2, dc2)
    used = set()
    dmap = {}
    pos = {}
    for e in g1.geometric_edges():
        be = g1.bar(e)
        key = (vmap[g1.iota(e)], vmap[g1.tau(e)], dc1[e], dc1[be])
        bucket = buckets.get(key, ())
        i = pos.get(key, 0)
        while i < len(bucket) and bucket[i] in used:
            i += 1
        pos[key] = i
        if i == len(bucket):
            return None
        f = bucket[i]
        bf = g2.bar(f)
        if bf in used:
            return None
        used.add(f)
        used.add(bf)
        dmap[e] = f
        dmap[be] = bf
    return dmap


def _search(g1, c1, dc1, g2, c2, dc2):
    """Individualization-refinement search for one color-preserving
    isomorphism; ``c1, c2`` must be jointly refined."""
    cells1, cells2 = _cells(c1), _cells(c2)
    if {x: len(v) for x, v in cells1.items()} != {x: len(v) for x, v in cells2.items()}:
        return None
    cell = _target_cell(c1)
    if cell is None:
        vmap = {vs[0]: cells2[x][0] for x, vs in cells1.items()}
        dmap = lift_vertex_map(g1, dc1, g2, dc2, vmap)
        return None if dmap is None else (vmap, dmap)
    v = cell[0]
    for w in sorted_ids(cells2[c1[v]]):
        n1, n2 = refine([g1, g2], [_individualize(c1, v), _individualize(c2, w)], [dc1, dc2])
        res = _search(g1, n1, dc1, g2, n2, dc2)
        if res is not None:
            return res
    return None


def find_isomorphism(g1: SerreGraph, g2: SerreGraph, c1: Coloring | None = None,
                     c2: Coloring | None = None) -> GraphMorphism | None:
    """A color-preserving isomorphism ``g1 -> g2`` or None."""
    if g1.num_vertices() != g2.num_vertices() or g1.num_darts() != g2.num_darts():
        return None
    (v1, v2), (d1, d2) = _initial([g1, g2], [c1, c2])
    r1, r2 = refine([g1, g2], [v1, v2], [d1, d2])
    res = _search(g1, r1, d1, g2, r2, d2)
    if res is None:
        return None
    return GraphMorphism(g1, g2, res[0], res[1])


def _tagged_perm(g: SerreGraph, vmap: Mapping, dmap: Mapping) -> Permutation:
    m = {("v", v): ("v", w) for v, w in vmap.items()}
    m.update({("d", e): ("d", f) for e, f in dmap.items()})
    return Permutation.from_mapping(m, graph_points(g))


def _kernel_generators(g: SerreGraph, dc: Mapping) -> tuple[list, int]:
    """Vertex-fixing automorphisms (parallel-edge swaps, loop flips) and the
    order of the group they generate."""
    gens = []
    order = 1
    for key, ds in sorted(_dart_buckets(g, dc).items(), key=lambda kv: idkey(kv[0])):
        u, v, a, b = key
        if u == v and a == b:
            loops = sorted_ids({g.edge_rep(e) for e in ds})
            for e in loops:
                gens.append({e: g.bar(e), g.bar(e): e})
            order *= factorial(len(loops)) * 2 ** len(loops)
            reps = loops
        else:
            if idkey(key) > idkey((v, u, b, a)):
                continue
            reps = ds
            order *= factorial(len(reps))
        for x, y in zip(reps, reps[1:]):
            gens.append({x: y, y: x, g.bar(x): g.bar(y), g.bar(y): g.bar(x)})
    return gens, order


@dataclass
class AutomorphismData:
    group: PermGroup
    base: list
    orbit_sizes: list
    kernel_order: int


def automorphism_data(g: SerreGraph, c: Coloring | None = None,
                      bound: int = DEFAULT_ELEMENT_BOUND) -> AutomorphismData:
    (vc,), (dc,) = _initial([g], [c])
    cur = refine([g], [vc], [dc])[0]
    levels = []  # (base point, generators fixing earlier base points)
    while True:
        cell = _target_cell(cur)
        if cell is None:
            break
        b = cell[0]
        found = []
        orbit = {b}
        for w in cell[1:]:
            if w in orbit:
                continue
            n1, n2 = refine([g, g], [_individualize(cur, b), _individualize(cur, w)], [dc, dc])
            res = _search(g, n1, dc, g, n2, dc)
            if res is None:
                continue
            found.append(res[0])
            # orbit of b under the generators found so far on this level
            todo = [b]
            orbit = {b}
            while todo:
                x = todo.pop()
                for vm in found:
                    y = vm[x]
                    if y not in orbit:
                        orbit.add(y)
                        todo.append(y)
        levels.append((b, found))
        cur = refine([g], [_individualize(cur, b)], [dc])[0]
    ident_v = {v: v for v in g.vertices}
    gens = []
    for _, found in levels:
        for vm in found:
            gens.append(_tagged_perm(g, vm, lift_vertex_map(g, dc, g, dc, vm)))
    kgens, korder = _kernel_generators(g, dc)
    for dm in kgens:
        full = {e: dm.get(e, e) for e in g.darts}
        gens.append(_tagged_perm(g, ident_v, full))
    G = PermGroup(graph_points(g), gens, bound)
    # orbit sizes along the base, using all generators of deeper levels
    sizes = []
    for i, (b, _) in enumerate(levels):
        vgens = [vm for _, f in levels[i:] for vm in f]
        orbit = {b}
        todo = [b]
        while todo:
            x = todo.pop()
            for vm in vgens:
                y = vm[x]
                if y not in orbit:
                    orbit.add(y)
                    todo.append(y)
        sizes.append(len(orbit))
    return AutomorphismData(G, [b for b, _ in levels], sizes, korder)


def automorphism_group(g: SerreGraph, c: Coloring | None = None,
                       bound: int = DEFAULT_ELEMENT_BOUND) -> PermGroup:
    """Full color-preserving automorphism group acting on ``graph_points(g)``.

    Every generator is checked to be a color-preserving automorphism and the
    enumerated order must equal the base-orbit product.
    """
    data = automorphism_data(g, c, bound)
    G = data.group
    col = c or Coloring()
    for p in G.generators:
        m = p.mapping()
        for e in g.darts:
            f = m[("d", e)][1]
            if (g.bar(f) != m[("d", g.bar(e))][1] or g.iota(f) != m[("v", g.iota(e))][1]
                    or g.tau(f) != m[("v", g.tau(e))][1] or col.dcolor(e) != col.dcolor(f)):
                raise GraphDiscError("internal: generator is not an automorphism")
        for v in g.vertices:
            if col.vcolor(v) != col.vcolor(m[("v", v)][1]):
                raise GraphDiscError("internal: generator does not preserve colors")
    expected = data.kernel_order
    for s in data.orbit_sizes:
        expected *= s
    if G.order() != expected:
        raise GraphDiscError(f"internal: closure order {G.order()} != base product {expected}")
    return G


def automorphism_action(g: SerreGraph, c: Coloring | None = None,
                        bound: int = DEFAULT_ELEMENT_BOUND) -> GroupAction:
    return GroupAction.natural(automorphism_group(g, c, bound), g)


def vertex_stabilizer_orbit_bound(a: GroupAction) -> tuple[int, tuple]:
    """``max |G_x . y|`` over vertices ``x, y`` with an attaining pair."""
    best = (0, None)
    els = a.group.elements()
    for x in a.graph.vertices:
        stab = [g for g in els if a.act_vertex(g, x) == x]
        seen = set()
        for y in a.graph.vertices:
            if y in seen:
                continue
            orb = {a.act_vertex(g, y) for g in stab}
            seen |= orb
            if len(orb) > best[0]:
                best = (len(orb), (x, y))
    return best


def orbit_bound_via_stabilizers(a: GroupAction) -> int:
    """Same quantity computed from ``point_stabilizer`` on the tagged domain."""
    img = a.image_group()
    best = 0
    for x in a.graph.vertices:
        st = point_stabilizer(img, ("v", x))
        for y in a.graph.vertices:
            best = max(best, len(st.orbit(("v", y))))
    return best


# ---------------------------------------------------------------------------
# canonical forms


@dataclass(frozen=True)
class CanonicalForm:
    """``certificate`` is equal for two colored graphs iff they are isomorphic;
    ``order`` lists the vertices in canonical position."""

    certificate: tuple
    order: tuple

    def position(self) -> dict:
        return {v: i for i, v in enumerate(self.order)}


def _leaf_code(g, c, col: Coloring):
    # colors are discrete at a leaf
    order = sorted(g.vertices, key=lambda v: c[v])
    pos = {v: i for i, v in enumerate(order)}
    vcode = tuple(col.vcolor(v) for v in order)
    dcode = tuple(sorted(((pos[g.iota(e)], pos[g.tau(e)], col.dcolor(e), col.dcolor(g.bar(e)))
                          for e in g.darts), key=idkey))
    return (vcode, dcode), tuple(order)


def canonical_form(g: SerreGraph, c: Coloring | None = None) -> CanonicalForm:
    """Exhaustive individualization tree; the minimal leaf encoding wins."""
    col = c or Coloring()
    (vc,), (dc,) = _initial([g], [col])
    best = [None]

    def walk(cur):
        cell = _target_cell(cur)
        if cell is None:
            code, order = _leaf_code(g, cur, col)
            k = idkey(code)
            if best[0] is None or k < best[0][0]:
                best[0] = (k, code, order)
            return
        for v in cell:
            walk(refine([g], [_individualize(cur, v)], [dc])[0])

    if g.num_vertices() == 0:
        return CanonicalForm(((), ()), ())
    walk(refine([g], [vc], [dc])[0])
    return CanonicalForm(best[0][1], best[0][2])


# ---------------------------------------------------------------------------
# graphs of spaces


@dataclass(frozen=True)
class GoSAutomorphism:
    """Underlying-graph automorphism plus vertex/edge piece isomorphisms."""

    vmap: dict
    dmap: dict
    vertex_isos: dict  # v -> GraphMorphism X_v -> X_{vmap[v]}
    edge_isos: dict    # geometric edge rep e -> GraphMorphism X_e -> X_{dmap[e]}

    def is_identity(self) -> bool:
        return (all(k == x for k, x in self.vmap.items())
                and all(k == x for k, x in self.dmap.items())
                and all(all(a == b for a, b in m.vmap.items()) and all(a == b for a, b in m.dmap.items())
                        for m in list(self.vertex_isos.values()) + list(self.edge_isos.values())))

    def swaps_pieces(self) -> bool:
        return any(k != x for k, x in self.vmap.items())


def _all_isos(g1, g2):
    first = find_isomorphism(g1, g2)
    if first is None:
        return []
    out = []
    for p in automorphism_group(g2).sorted_elements():
        m = p.mapping()
        vm = {v: m[("v", first.vmap[v])][1] for v in g1.vertices}
        dm = {e: m[("d", first.dmap[e])][1] for e in g1.darts}
        out.append(GraphMorphism(g1, g2, vm, dm, check=False))
    return out


def gos_automorphisms(y, bound: int = DEFAULT_ELEMENT_BOUND) -> list:
    """All automorphisms of a graph of spaces.

    Underlying automorphisms are enumerated first; for each, vertex piece
    isomorphisms are chosen independently and each edge piece isomorphism is
    forced by the attachment at the edge's initial vertex, then checked at the
    terminal vertex.
    """
    from itertools import product

    G = y.graph
    out = []
    for p in automorphism_group(G, bound=bound).sorted_elements():
        m = p.mapping()
        vmap = {v: m[("v", v)][1] for v in G.vertices}
        dmap = {e: m[("d", e)][1] for e in G.darts}
        choices = []
        for v in G.vertices:
            isos = _all_isos(y.vertex_space(v), y.vertex_space(vmap[v]))
            if not isos:
                break
            choices.append(isos)
        else:
            for combo in product(*choices):
                viso = dict(zip(G.vertices, combo))
                eiso = _forced_edge_isos(y, dmap, viso)
                if eiso is not None:
                    out.append(GoSAutomorphism(vmap, dmap, viso, eiso))
                    if len(out) > bound:
                        from .errors import ElementBoundExceeded
                        raise ElementBoundExceeded("too many graph-of-spaces automorphisms")
    return out


def _forced_edge_isos(y, dmap, viso):
    """Edge isomorphisms ``psi_e`` with ``phi_{d(e)} o psi_e = viso o phi_e`` for
    both darts of every edge, or None."""
    G = y.graph
    eiso = {}
    for e in G.geometric_edges():
        f = dmap[e]
        src, dst = y.edge_space(e), y.edge_space(f)
        psi_v, psi_d = {}, {}
        for dart in (e, G.bar(e)):
            img = dmap[dart]
            phi, phi2 = y.attachment(dart), y.attachment(img)
            h = viso[G.tau(dart)]
            inv_v = {b: a for a, b in phi2.vmap.items()}
            inv_d = {b: a for a, b in phi2.dmap.items()}
            for x in src.vertices:
                t = inv_v.get(h.vmap[phi.vmap[x]])
                if t is None or psi_v.setdefault(x, t) != t:
                    return None
            for d in src.darts:
                t = inv_d.get(h.dmap[phi.dmap[d]])
                if t is None or psi_d.setdefault(d, t) != t:
                    return None
        try:
            mor = GraphMorphism(src, dst, psi_v, psi_d)
        except GraphDiscError:
            return None
        if not mor.is_isomorphism():
            return None
        eiso[e] = mor
    return eiso
