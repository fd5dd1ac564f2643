"""Graphs of spaces over finite graphs.

Each vertex ``v`` of the underlying graph carries a connected graph
``X_v``; each geometric edge carries one graph shared by both of its darts,
attached into ``X_{tau(e)}`` by an injective morphism ``phi_e`` for each dart
``e``.  Attachment images at a vertex must be pairwise disjoint.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import EdgeInversion, GraphDiscError, InvalidGraphOfSpaces, NonCommuting, NotFree
from .graph import (CoveringReport, GraphMorphism, SerreGraph, deck_transformations, disjoint_union,
                    identity_morphism, is_covering)
from .ids import idkey, sorted_ids
from .permgrp import PermGroup, Permutation, graph_points
from .voltage import complete_voltages


class GraphOfSpaces:
    __slots__ = ("graph", "_vspace", "_espace", "_attach")

    def __init__(self, graph: SerreGraph, vertex_spaces: Mapping, edge_spaces: Mapping,
                 attach: Mapping, require_disjoint: bool = False):
        """``edge_spaces`` may be keyed by either dart of a geometric edge;
        ``attach[e]`` is a GraphMorphism ``X_e -> X_{tau(e)}`` or a pair of
        ``(vmap, dmap)`` dictionaries.

        Disjointness of attachment images is only enforced on request: graphs
        of spaces with point pieces and vertices of degree >= 2 violate it.
        """
        self.graph = graph
        self._vspace = {}
        for v in graph.vertices:
            if v not in vertex_spaces:
                raise InvalidGraphOfSpaces(f"vertex {v!r} has no space")
            self._vspace[v] = vertex_spaces[v]
        self._espace = {}
        for r in graph.geometric_edges():
            a, b = edge_spaces.get(r), edge_spaces.get(graph.bar(r))
            if a is None and b is None:
                raise InvalidGraphOfSpaces(f"edge {r!r} has no space")
            if a is not None and b is not None and a is not b and a != b:
                raise InvalidGraphOfSpaces(f"the two darts of edge {r!r} carry different spaces")
            self._espace[r] = a if a is not None else b
        self._attach = {}
        for e in graph.darts:
            if e not in attach:
                raise InvalidGraphOfSpaces(f"dart {e!r} has no attachment map")
            phi = attach[e]
            src, dst = self.edge_space(e), self._vspace[graph.tau(e)]
            try:
                if isinstance(phi, GraphMorphism):
                    phi = GraphMorphism(src, dst, phi.vmap, phi.dmap)
                else:
                    phi = GraphMorphism(src, dst, phi[0], phi[1])
            except GraphDiscError as exc:
                raise InvalidGraphOfSpaces(f"attachment of {e!r}: {exc}") from exc
            if not phi.is_injective():
                raise InvalidGraphOfSpaces(f"attachment of {e!r} is not injective")
            self._attach[e] = phi
        self._check()
        if require_disjoint:
            w = self.disjointness_witness()
            if w is not None:
                raise InvalidGraphOfSpaces(
                    f"attachments of {w[1]!r} and {w[2]!r} overlap at {w[3]!r} in {w[0]!r}")

    def _check(self):
        for v, X in self._vspace.items():
            if not X.is_connected():
                raise InvalidGraphOfSpaces(f"vertex space of {v!r} is not connected")
        for r, X in self._espace.items():
            if not X.is_connected():
                raise InvalidGraphOfSpaces(f"edge space of {r!r} is not connected")

    def disjointness_witness(self):
        """``(v, e1, e2, x)`` when two attachment images at ``v`` share ``x``."""
        for v in self.graph.vertices:
            used = {}
            for e in self.graph.link(v):
                for x in self._attach[e].vmap.values():
                    if x in used:
                        return (v, used[x], e, x)
                    used[x] = e
        return None

    def vertex_space(self, v) -> SerreGraph:
        return self._vspace[v]

    def edge_space(self, e) -> SerreGraph:
        return self._espace[self.graph.edge_rep(e)]

    def attachment(self, e) -> GraphMorphism:
        return self._attach[e]

    def edge_reps(self) -> list:
        return self.graph.geometric_edges()

    def __repr__(self):
        return f"GraphOfSpaces({self.graph!r})"


def trivial_gos(graph: SerreGraph) -> GraphOfSpaces:
    """Every vertex and edge space is a single vertex."""
    from .builders import single_vertex
    pt = single_vertex()
    return GraphOfSpaces(graph, {v: pt for v in graph.vertices}, {r: pt for r in graph.geometric_edges()},
                         {e: ({0: 0}, {}) for e in graph.darts})


# ---------------------------------------------------------------------------
# total space


@dataclass
class TotalSpace:
    graph: SerreGraph
    location: dict  # total vertex -> ("v", v) or ("e", r)


def total_space(y: GraphOfSpaces) -> TotalSpace:
    """Mapping-cylinder graph: vertex pieces ``("v", v, x)``, one copy of
    each edge piece ``("e", r, x)`` and rung darts ``("r", e, x)`` from the
    edge copy to ``phi_e(x)`` (bars ``("r-", e, x)``)."""
    G = y.graph
    vertices = []
    darts = {}
    loc = {}
    for v in G.vertices:
        X = y.vertex_space(v)
        for x in X.vertices:
            vertices.append(("v", v, x))
            loc[("v", v, x)] = ("v", v)
        for d in X.darts:
            darts[("v", v, d)] = (("v", v, X.iota(d)), ("v", v, X.tau(d)), ("v", v, X.bar(d)))
    for r in G.geometric_edges():
        X = y.edge_space(r)
        for x in X.vertices:
            vertices.append(("e", r, x))
            loc[("e", r, x)] = ("e", r)
        for d in X.darts:
            darts[("e", r, d)] = (("e", r, X.iota(d)), ("e", r, X.tau(d)), ("e", r, X.bar(d)))
    for e in G.darts:
        r = G.edge_rep(e)
        phi = y.attachment(e)
        for x in y.edge_space(e).vertices:
            a, b = ("e", r, x), ("v", G.tau(e), phi.vmap[x])
            darts[("r", e, x)] = (a, b, ("r-", e, x))
            darts[("r-", e, x)] = (b, a, ("r", e, x))
    return TotalSpace(SerreGraph(vertices, darts), loc)


# ---------------------------------------------------------------------------
# morphisms


class GoSMorphism:
    """Underlying morphism plus piece maps; attachment squares must commute."""

    __slots__ = ("source", "target", "base", "vertex_maps", "edge_maps")

    def __init__(self, source: GraphOfSpaces, target: GraphOfSpaces, base: GraphMorphism,
                 vertex_maps: Mapping, edge_maps: Mapping, check: bool = True):
        self.source = source
        self.target = target
        self.base = base
        self.vertex_maps = dict(vertex_maps)
        # keyed by source geometric edge representative
        self.edge_maps = {}
        for r in source.graph.geometric_edges():
            m = edge_maps.get(r)
            if m is None:
                m = edge_maps.get(source.graph.bar(r))
            if m is None:
                raise InvalidGraphOfSpaces(f"edge {r!r} has no piece map")
            self.edge_maps[r] = m
        if check:
            self._check()

    def edge_map(self, e) -> GraphMorphism:
        return self.edge_maps[self.source.graph.edge_rep(e)]

    def _check(self):
        S, T = self.source, self.target
        for e in S.graph.darts:
            fe = self.base.dmap[e]
            psi = self.edge_map(e)
            phi_s, phi_t = S.attachment(e), T.attachment(fe)
            fv = self.vertex_maps[S.graph.tau(e)]
            for x in S.edge_space(e).vertices:
                if phi_t.vmap[psi.vmap[x]] != fv.vmap[phi_s.vmap[x]]:
                    raise NonCommuting(f"attachment square at dart {e!r} fails at {x!r}")
            for d in S.edge_space(e).darts:
                if phi_t.dmap[psi.dmap[d]] != fv.dmap[phi_s.dmap[d]]:
                    raise NonCommuting(f"attachment square at dart {e!r} fails at dart {d!r}")

    def total_map(self, ts: TotalSpace | None = None, tt: TotalSpace | None = None) -> GraphMorphism:
        S, T = self.source, self.target
        ts = ts or total_space(S)
        tt = tt or total_space(T)
        vm, dm = {}, {}
        for x in ts.graph.vertices:
            tag, w, z = x
            if tag == "v":
                vm[x] = ("v", self.base.vmap[w], self.vertex_maps[w].vmap[z])
            else:
                vm[x] = ("e", T.graph.edge_rep(self.base.dmap[w]), self.edge_maps[w].vmap[z])
        for d in ts.graph.darts:
            tag, w, z = d
            if tag == "v":
                dm[d] = ("v", self.base.vmap[w], self.vertex_maps[w].dmap[z])
            elif tag == "e":
                dm[d] = ("e", T.graph.edge_rep(self.base.dmap[w]), self.edge_maps[w].dmap[z])
            else:
                dm[d] = (tag, self.base.dmap[w], self.edge_map(w).vmap[z])
        return GraphMorphism(ts.graph, tt.graph, vm, dm)


def identity_gos_morphism(y: GraphOfSpaces) -> GoSMorphism:
    return GoSMorphism(y, y, identity_morphism(y.graph),
                       {v: identity_morphism(y.vertex_space(v)) for v in y.graph.vertices},
                       {r: identity_morphism(y.edge_space(r)) for r in y.graph.geometric_edges()})


# ---------------------------------------------------------------------------
# fiber products


@dataclass
class FiberProductReport:
    ok: bool
    witness: dict | None = None

    def __bool__(self):
        return self.ok


def is_fiber_product_diagram(p1: GraphMorphism, p2: GraphMorphism, f1: GraphMorphism,
                             f2: GraphMorphism) -> FiberProductReport:
    """Square ``C' -p2-> A2 -f2-> B`` and ``C' -p1-> A1 -f1-> B``.

    Requires ``p1`` locally bijective; then checks that every compatible pair
    of vertices and of darts has exactly one preimage in the corner.
    """
    C = p1.source
    for x in C.vertices:
        if f1.vmap[p1.vmap[x]] != f2.vmap[p2.vmap[x]]:
            raise NonCommuting(f"square does not commute at vertex {x!r}")
    for d in C.darts:
        if f1.dmap[p1.dmap[d]] != f2.dmap[p2.dmap[d]]:
            raise NonCommuting(f"square does not commute at dart {d!r}")
    cov = is_covering(p1)
    if not cov:
        return FiberProductReport(False, {"reason": "corner map is not a covering", **cov.witness})
    for kind, items, m1, m2, g1, g2 in (
        ("vertex", C.vertices, p1.vmap, p2.vmap, f1.vmap, f2.vmap),
        ("dart", C.darts, p1.dmap, p2.dmap, f1.dmap, f2.dmap),
    ):
        count = {}
        for c in items:
            key = (m1[c], m2[c])
            count[key] = count.get(key, 0) + 1
        by_base = {}
        A2 = f2.source.vertices if kind == "vertex" else f2.source.darts
        for a2 in A2:
            by_base.setdefault(g2[a2], []).append(a2)
        A1 = f1.source.vertices if kind == "vertex" else f1.source.darts
        for a1 in A1:
            for a2 in by_base.get(g1[a1], ()):
                n = count.get((a1, a2), 0)
                if n != 1:
                    return FiberProductReport(False, {
                        "reason": "existence" if n == 0 else "uniqueness",
                        kind: [a1, a2], "count": n})
    return FiberProductReport(True)


@dataclass
class FiberProduct:
    graph: SerreGraph
    pi1: GraphMorphism
    pi2: GraphMorphism
    components: list  # (component graph, pi1 restricted, pi2 restricted)


def fiber_product(f1: GraphMorphism, f2: GraphMorphism) -> FiberProduct:
    A1, A2 = f1.source, f2.source
    by_base = {}
    for a2 in A2.vertices:
        by_base.setdefault(f2.vmap[a2], []).append(a2)
    dby_base = {}
    for d2 in A2.darts:
        dby_base.setdefault(f2.dmap[d2], []).append(d2)
    vertices = [(a1, a2) for a1 in A1.vertices for a2 in by_base.get(f1.vmap[a1], ())]
    darts = {}
    for d1 in A1.darts:
        for d2 in dby_base.get(f1.dmap[d1], ()):
            darts[(d1, d2)] = ((A1.iota(d1), A2.iota(d2)), (A1.tau(d1), A2.tau(d2)),
                               (A1.bar(d1), A2.bar(d2)))
    C = SerreGraph(vertices, darts)
    pi1 = GraphMorphism(C, A1, {x: x[0] for x in C.vertices}, {d: d[0] for d in C.darts}, check=False)
    pi2 = GraphMorphism(C, A2, {x: x[1] for x in C.vertices}, {d: d[1] for d in C.darts}, check=False)
    comps = []
    for vs in C.components():
        sub = C.induced_subgraph(vs)
        comps.append((sub, pi1.restrict(vs), pi2.restrict(vs)))
    comps.sort(key=lambda c: idkey(min(c[0].vertices, key=idkey)))
    return FiberProduct(C, pi1, pi2, comps)


# ---------------------------------------------------------------------------
# coverings of graphs of spaces


def _link_union(y: GraphOfSpaces, v, darts=None):
    """Disjoint union of the edge spaces of ``lk(v)`` and its map into ``X_v``."""
    G = y.graph
    lk = G.link(v) if darts is None else darts
    U = disjoint_union({e: y.edge_space(e) for e in lk})
    vm = {(e, x): y.attachment(e).vmap[x] for (e, x) in U.vertices}
    dm = {(e, d): y.attachment(e).dmap[d] for (e, d) in U.darts}
    return U, GraphMorphism(U, y.vertex_space(v), vm, dm, check=False)


def check_gos_covering(f: GoSMorphism) -> CoveringReport:
    S, T = f.source, f.target
    for v, m in sorted(f.vertex_maps.items(), key=lambda kv: idkey(kv[0])):
        rep = is_covering(m)
        if not rep:
            return CoveringReport(False, None, {"piece": ["vertex", v], **rep.witness})
    for r, m in sorted(f.edge_maps.items(), key=lambda kv: idkey(kv[0])):
        rep = is_covering(m)
        if not rep:
            return CoveringReport(False, None, {"piece": ["edge", r], **rep.witness})
    for vh in S.graph.vertices:
        v = f.base.vmap[vh]
        Uh, phih = _link_union(S, vh)
        U, phi = _link_union(T, v)
        p1 = GraphMorphism(Uh, U, {(e, x): (f.base.dmap[e], f.edge_map(e).vmap[x]) for (e, x) in Uh.vertices},
                           {(e, d): (f.base.dmap[e], f.edge_map(e).dmap[d]) for (e, d) in Uh.darts},
                           check=False)
        rep = is_fiber_product_diagram(p1, phih, phi, f.vertex_maps[vh])
        if not rep:
            return CoveringReport(False, None, {"vertex": vh, **(rep.witness or {})})
    tm = f.total_map()
    tot = is_covering(tm)
    if not tot:
        return CoveringReport(False, None, {"reason": "total map is not locally bijective", **tot.witness})
    return CoveringReport(True, tot.degree, None)


# ---------------------------------------------------------------------------
# free quotients and deck groups


def _to_total_perm(y: GraphOfSpaces, ts: TotalSpace, aut) -> Permutation:
    """Total-space permutation of a GoS automorphism (see autgrp.GoSAutomorphism)."""
    G = y.graph
    m = {}
    for x in ts.graph.vertices:
        tag, w, z = x
        if tag == "v":
            m[("v", x)] = ("v", ("v", aut.vmap[w], aut.vertex_isos[w].vmap[z]))
        else:
            m[("v", x)] = ("v", ("e", G.edge_rep(aut.dmap[w]), aut.edge_isos[w].vmap[z]))
    for d in ts.graph.darts:
        tag, w, z = d
        if tag == "v":
            img = ("v", aut.vmap[w], aut.vertex_isos[w].dmap[z])
        elif tag == "e":
            img = ("e", G.edge_rep(aut.dmap[w]), aut.edge_isos[w].dmap[z])
        else:
            img = (tag, aut.dmap[w], aut.edge_isos[G.edge_rep(w)].vmap[z])
        m[("d", d)] = ("d", img)
    return Permutation.from_mapping(m, graph_points(ts.graph))


def quotient_gos(y: GraphOfSpaces, generators: Iterable) -> tuple[GraphOfSpaces, GoSMorphism]:
    """Quotient by the group generated by GoS automorphisms acting freely."""
    G = y.graph
    gens = list(generators)
    for a in gens:
        for e in G.darts:
            if a.dmap[e] == G.bar(e):
                raise EdgeInversion(f"an automorphism inverts edge {e!r}")
    ts = total_space(y)
    grp = PermGroup(graph_points(ts.graph), [_to_total_perm(y, ts, a) for a in gens])
    els = grp.sorted_elements()
    # underlying action, recovered from the total space through edge copies and vertex pieces
    for g in els:
        if g.is_identity():
            continue
        for p in g.domain.points:
            if g(p) == p:
                raise NotFree(f"a nontrivial element fixes {p[1]!r}")
        for e in G.darts:
            x0 = y.edge_space(e).vertices[0]
            img = g(("d", ("r", e, x0)))[1]
            if img[1] == G.bar(e):
                raise EdgeInversion(f"an element inverts edge {e!r}")
            if img[0] == "r-":
                raise NotFree(f"an element reverses a rung over {e!r}")

    def orbit_rep(p):
        return min((g(p) for g in els), key=idkey)

    def base_image(g, v):
        x0 = y.vertex_space(v).vertices[0]
        return g(("v", ("v", v, x0)))[1][1]

    def base_dart(g, e):
        x0 = y.edge_space(e).vertices[0]
        return g(("d", ("r", e, x0)))[1][1]

    vrep = {v: min((base_image(g, v) for g in els), key=idkey) for v in G.vertices}
    erep = {}
    for r in G.geometric_edges():
        erep[r] = min((G.edge_rep(base_dart(g, r)) for g in els), key=idkey)
    qdarts = {}
    dclass = {}
    for r in sorted_ids(set(erep.values())):
        for e in (r, G.bar(r)):
            qdarts[e] = (vrep[G.iota(e)], vrep[G.tau(e)], G.bar(e))
    for e in G.darts:
        imgs = {base_dart(g, e) for g in els}
        dclass[e] = next(q for q in qdarts if q in imgs)
    Q = SerreGraph(sorted_ids(set(vrep.values())), qdarts)

    def piece(tag, w, X):
        vs = sorted_ids({orbit_rep(("v", (tag, w, x)))[1][2] for x in X.vertices})
        ds = {}
        for d in X.darts:
            rd = orbit_rep(("d", (tag, w, d)))[1]
            if rd[1] != w:
                continue
            z = rd[2]
            ds[z] = (orbit_rep(("v", (tag, w, X.iota(z))))[1][2],
                     orbit_rep(("v", (tag, w, X.tau(z))))[1][2],
                     orbit_rep(("d", (tag, w, X.bar(z))))[1][2])
        return SerreGraph(vs, ds)

    vspaces = {v: piece("v", v, y.vertex_space(v)) for v in Q.vertices}
    espaces = {r: piece("e", r, y.edge_space(r)) for r in Q.geometric_edges()}
    attach = {}
    for e in Q.darts:
        r = Q.edge_rep(e)
        phi = y.attachment(e)
        Xe = espaces[r]
        vm = {x: orbit_rep(("v", ("v", G.tau(e), phi.vmap[x])))[1][2] for x in Xe.vertices}
        dm = {d: orbit_rep(("d", ("v", G.tau(e), phi.dmap[d])))[1][2] for d in Xe.darts}
        attach[e] = (vm, dm)
    yq = GraphOfSpaces(Q, vspaces, espaces, attach)
    base = GraphMorphism(G, Q, vrep, dclass)
    vmaps = {}
    for v in G.vertices:
        X = y.vertex_space(v)
        vmaps[v] = GraphMorphism(X, vspaces[vrep[v]],
                                 {x: orbit_rep(("v", ("v", v, x)))[1][2] for x in X.vertices},
                                 {d: orbit_rep(("d", ("v", v, d)))[1][2] for d in X.darts})
    emaps = {}
    for r in G.geometric_edges():
        X = y.edge_space(r)
        emaps[r] = GraphMorphism(X, espaces[Q.edge_rep(dclass[r])],
                                 {x: orbit_rep(("v", ("e", r, x)))[1][2] for x in X.vertices},
                                 {d: orbit_rep(("d", ("e", r, d)))[1][2] for d in X.darts})
    return yq, GoSMorphism(y, yq, base, vmaps, emaps)


@dataclass
class DeckGroup:
    elements: list  # GoSAutomorphism
    regular: bool
    degree: int | None

    def order(self) -> int:
        return len(self.elements)


def deck_group(f: GoSMorphism) -> DeckGroup:
    """Deck transformations via lifting on the total space (source must be connected)."""
    from .autgrp import GoSAutomorphism

    S = f.source
    G = S.graph
    ts = total_space(S)
    tm = f.total_map(ts)
    rep = is_covering(tm)
    if not rep:
        raise InvalidGraphOfSpaces("deck group needs a covering")
    out = []
    for h in deck_transformations(tm):
        vmap = {v: h.vmap[("v", v, S.vertex_space(v).vertices[0])][1] for v in G.vertices}
        dmap = {}
        for e in G.darts:
            x0 = S.edge_space(e).vertices[0]
            dmap[e] = h.dmap[("r", e, x0)][1]
        viso = {}
        for v in G.vertices:
            X, w = S.vertex_space(v), vmap[v]
            viso[v] = GraphMorphism(X, S.vertex_space(w), {x: h.vmap[("v", v, x)][2] for x in X.vertices},
                                    {d: h.dmap[("v", v, d)][2] for d in X.darts})
        eiso = {}
        for r in G.geometric_edges():
            X = S.edge_space(r)
            eiso[r] = GraphMorphism(X, S.edge_space(dmap[r]), {x: h.vmap[("e", r, x)][2] for x in X.vertices},
                                    {d: h.dmap[("e", r, d)][2] for d in X.darts})
        out.append(GoSAutomorphism(vmap, dmap, viso, eiso))
    return DeckGroup(out, rep.degree is not None and len(out) == rep.degree, rep.degree)


# ---------------------------------------------------------------------------
# voltage covers of graphs of spaces


def gos_voltage_cover(y: GraphOfSpaces, n: int, voltages: Mapping) -> tuple[GraphOfSpaces, GoSMorphism]:
    """Cover whose underlying graph is the voltage cover and whose pieces are
    copies of the base pieces."""
    G = y.graph
    vol = complete_voltages(G, n, voltages)
    vertices = [(v, i) for v in G.vertices for i in range(n)]
    darts = {}
    for e in G.darts:
        for i in range(n):
            darts[(e, i)] = ((G.iota(e), i), (G.tau(e), vol[e][i]), (G.bar(e), vol[e][i]))
    H = SerreGraph(vertices, darts)
    vs = {x: y.vertex_space(x[0]) for x in H.vertices}
    es = {r: y.edge_space(r[0]) for r in H.geometric_edges()}
    att = {d: y.attachment(d[0]) for d in H.darts}
    cover = GraphOfSpaces(H, vs, es, att)
    base = GraphMorphism(H, G, {x: x[0] for x in H.vertices}, {d: d[0] for d in H.darts})
    f = GoSMorphism(cover, y, base,
                    {x: identity_morphism(y.vertex_space(x[0])) for x in H.vertices},
                    {r: identity_morphism(y.edge_space(r[0])) for r in H.geometric_edges()})
    return cover, f
