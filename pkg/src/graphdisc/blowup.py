"""Blowups of finite group actions on finite trees.

Vertices of a blowup are pairs ``(i, w)`` where ``i`` indexes the left coset
``g_i K`` (cosets sorted by their least element) and ``w`` is an orbit
representative: ``("v", x)`` for a tree vertex or ``("e", r)`` for a
geometric edge with canonical dart ``r``.  Edge stabilizers are setwise, so
edge inversions are allowed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .errors import (ContainmentViolated, NotASubgroup, NotATree, NotEquivariantFamily,
                     NotNormal, OrbitRepsInvalid)
from .graph import SerreGraph, Subdivision, VertexPartition, barycentric_subdivision, quotient_by_partition
from .ids import idkey, sorted_ids
from .permgrp import (GroupAction, PermGroup, Permutation, intersection, is_normal,
                      product_set)


@dataclass
class BlowupInput:
    G: PermGroup
    T: SerreGraph
    action: GroupAction
    omega0: list
    K: PermGroup
    S: dict = field(default_factory=dict)
    F: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    def stabilizer(self, w) -> PermGroup:
        kind, x = w
        return self.action.vertex_stabilizer(x) if kind == "v" else self.action.edge_stabilizer(x)


def act_on_rep(a: GroupAction, g: Permutation, w):
    """Image of a vertex ``("v", x)`` or geometric edge ``("e", r)``."""
    kind, x = w
    if kind == "v":
        return ("v", a.act_vertex(g, x))
    return ("e", a.graph.edge_rep(a.act_dart(g, x)))


def _check_structure(inp: BlowupInput) -> None:
    T = inp.T
    if not T.is_tree():
        raise NotATree("the underlying graph is not a tree")
    if inp.action.graph is not T and inp.action.graph != T:
        raise OrbitRepsInvalid("action is not on the given tree")
    els = inp.G.elements()
    hit = {}
    for w in inp.omega0:
        kind, x = w
        if kind == "v":
            valid = T.has_vertex(x)
        else:
            valid = kind == "e" and T.has_dart(x) and T.edge_rep(x) == x
        if not valid:
            raise OrbitRepsInvalid(f"{w!r} is not a vertex or canonical edge of the tree")
        for g in els:
            y = act_on_rep(inp.action, g, w)
            if y in hit and hit[y] != w:
                raise OrbitRepsInvalid(f"{w!r} and {hit[y]!r} lie in the same orbit")
            hit[y] = w
    allw = [("v", v) for v in T.vertices] + [("e", r) for r in T.geometric_edges()]
    missing = [w for w in allw if w not in hit]
    if missing:
        raise OrbitRepsInvalid(f"orbit of {missing[0]!r} has no representative")
    if not inp.K.is_subgroup_of(inp.G):
        raise NotASubgroup("K is not a subgroup of G")


def closure_of_reps(inp: BlowupInput) -> list:
    """Smallest subgraph containing the representatives: add endpoints of edges."""
    out = set(inp.omega0)
    for kind, x in inp.omega0:
        if kind == "e":
            out.add(("v", inp.T.iota(x)))
            out.add(("v", inp.T.tau(x)))
    return sorted(out, key=idkey)


def normalize_input(raw: BlowupInput) -> BlowupInput:
    """Shrink K into every representative stabilizer and complete S and F.

    Completions are greedy in canonical element order and recorded in
    ``notes`` so runs are reproducible.
    """
    _check_structure(raw)
    G = raw.G
    K = raw.K
    stabs = {w: raw.stabilizer(w) for w in raw.omega0}
    for w in raw.omega0:
        K = intersection(K, stabs[w])
    notes = dict(raw.notes)
    if K != raw.K:
        notes["K_replaced"] = True
    S = {}
    for w in raw.omega0:
        Gw = stabs[w]
        sw = [s for s in raw.S.get(w, [])]
        for s in sw:
            if s not in Gw:
                raise OrbitRepsInvalid(f"S element {s!r} does not stabilize {w!r}")
        sw = _symmetric(sw)
        added = []
        cur = PermGroup(G.domain, list(K.generators) + sw, G.bound)
        for g in Gw.sorted_elements():
            if cur.order() == Gw.order():
                break
            if g not in cur:
                added.append(g)
                sw = _symmetric(sw + [g])
                cur = PermGroup(G.domain, list(K.generators) + sw, G.bound)
        if added:
            notes.setdefault("S_added", {})[w] = added
        S[w] = sw
    F = _symmetric(list(raw.F) + [G.identity])
    reps = set(raw.omega0)
    added_f = []
    for y in closure_of_reps(raw):
        if any(act_on_rep(raw.action, f.inverse(), y) in reps for f in F):
            continue
        for g in G.sorted_elements():
            if act_on_rep(raw.action, g.inverse(), y) in reps:
                added_f.append(g)
                F = _symmetric(F + [g])
                break
    if added_f:
        notes["F_added"] = added_f
    return BlowupInput(G, raw.T, raw.action, list(raw.omega0), K, S, F, notes)


def _symmetric(xs) -> list:
    out = set(xs)
    out |= {x.inverse() for x in xs}
    return sorted(out)


@dataclass
class BlowupResult:
    X: SerreGraph
    p_vertex: dict
    p_dart: dict  # type I darts map to None
    edge_type: dict
    action: GroupAction
    tree_action: GroupAction
    subdivision: Subdivision
    K: PermGroup | None = None
    omega0: list | None = None
    coset_reps: list | None = None

    @property
    def tree(self) -> SerreGraph:
        return self.subdivision.original

    def fiber(self, y) -> frozenset:
        return frozenset(x for x, z in self.p_vertex.items() if z == y)


def _sub_act_vertex(ta: GroupAction, sub: Subdivision, g, y):
    if sub.is_midpoint(y):
        return ("mid", sub.original.edge_rep(ta.act_dart(g, y[1])))
    return ta.act_vertex(g, y)


def _sub_dart(sub: Subdivision, a, b):
    """Subdivision dart from ``a`` to ``b`` (one of them a midpoint)."""
    T = sub.original
    if sub.is_midpoint(a):
        return sub.dart_from_midpoint(a[1], b)
    r = b[1]
    e = r if T.iota(r) == a else T.bar(r)
    return (e, 0)


def construct_blowup(inp: BlowupInput) -> BlowupResult:
    G, K, T, a = inp.G, inp.K, inp.T, inp.action
    kels = K.sorted_elements()
    coset_of = {}
    reps = []
    for g in G.sorted_elements():
        if g in coset_of:
            continue
        idx = len(reps)
        reps.append(g)
        for k in kels:
            coset_of[g * k] = idx
    dcos = {}
    for w in inp.omega0:
        dcos[w] = {k1 * s * k2 for s in inp.S.get(w, []) for k1 in kels for k2 in kels}
    dF = {k1 * f * k2 for f in inp.F for k1 in kels for k2 in kels}
    vertices = [(i, w) for i in range(len(reps)) for w in inp.omega0]
    edges = {}
    for w in inp.omega0:
        for i, g1 in enumerate(reps):
            for d in dcos[w]:
                j = coset_of[g1 * d]
                if j != i:
                    edges[frozenset([(i, w), (j, w)])] = "I"
    edge_reps = [w for w in inp.omega0 if w[0] == "e"]
    vert_reps = [w for w in inp.omega0 if w[0] == "v"]
    for we in edge_reps:
        for i, g1 in enumerate(reps):
            ge = T.edge_rep(a.act_dart(g1, we[1]))
            ends = {T.iota(ge), T.tau(ge)}
            for d in dF:
                g2 = g1 * d
                j = coset_of[g2]
                for wv in vert_reps:
                    if a.act_vertex(g2, wv[1]) in ends:
                        edges[frozenset([(i, we), (j, wv)])] = "II"
    darts = {}
    edge_type = {}
    for pair, t in edges.items():
        u, v = sorted(pair, key=idkey)
        darts[(u, v)] = (u, v, (v, u))
        darts[(v, u)] = (v, u, (u, v))
        edge_type[(u, v)] = edge_type[(v, u)] = t
    X = SerreGraph(vertices, darts)
    sub_graph, sub = barycentric_subdivision(T)
    p_vertex = {}
    for (i, w) in vertices:
        kind, x = w
        if kind == "v":
            p_vertex[(i, w)] = a.act_vertex(reps[i], x)
        else:
            p_vertex[(i, w)] = ("mid", T.edge_rep(a.act_dart(reps[i], x)))
    p_dart = {}
    for e in X.darts:
        if edge_type[e] == "I":
            p_dart[e] = None
        else:
            p_dart[e] = _sub_dart(sub, p_vertex[X.iota(e)], p_vertex[X.tau(e)])
    maps = []
    for s in G.generators:
        vm = {(i, w): (coset_of[s * reps[i]], w) for (i, w) in vertices}
        dm = {(u, v): (vm[u], vm[v]) for (u, v) in X.darts}
        maps.append((vm, dm))
    action = GroupAction.from_maps(G, X, maps)
    tmaps = []
    for s in G.generators:
        vm = {y: _sub_act_vertex(a, sub, s, y) for y in sub_graph.vertices}
        dm = {}
        for (e, half) in sub_graph.darts:
            dm[(e, half)] = (a.act_dart(s, e), half)
        tmaps.append((vm, dm))
    tree_action = GroupAction.from_maps(G, sub_graph, tmaps)
    return BlowupResult(X, p_vertex, p_dart, edge_type, action, tree_action, sub, K,
                        list(inp.omega0), reps)


@dataclass
class BlowupReport:
    checks: dict
    witnesses: dict

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def __bool__(self):
        return self.ok


def _connected_subset(X: SerreGraph, vs: frozenset) -> bool:
    return bool(vs) and X.induced_subgraph(vs).is_connected()


def verify_blowup(r: BlowupResult) -> BlowupReport:
    X, sub = r.X, r.subdivision
    B = sub.graph
    checks, wit = {}, {}

    checks["connected"] = X.is_connected()
    if not checks["connected"]:
        wit["connected"] = {"components": len(X.components())}

    bad = None
    for e in X.darts:
        u, v = r.p_vertex.get(X.iota(e)), r.p_vertex.get(X.tau(e))
        if u is None or v is None or not B.has_vertex(u) or not B.has_vertex(v):
            bad = {"dart": e, "reason": "endpoint not mapped into the subdivision"}
            break
        d = r.p_dart.get(e)
        if d is None:
            if u != v:
                bad = {"dart": e, "reason": "collapsed dart joins different fibers"}
                break
        elif not B.has_dart(d) or B.iota(d) != u or B.tau(d) != v:
            bad = {"dart": e, "reason": "dart image inconsistent with endpoints"}
            break
        elif r.p_dart.get(X.bar(e)) != B.bar(d):
            bad = {"dart": e, "reason": "bar not respected"}
            break
    checks["simplicial"] = bad is None
    if bad:
        wit["simplicial"] = bad

    bad = None
    ta = r.tree_action
    for g in r.action.group.generators:
        for x in X.vertices:
            y = r.p_vertex.get(x)
            gy = r.p_vertex.get(r.action.act_vertex(g, x))
            if y is None or not B.has_vertex(y) or gy != ta.act_vertex(g, y):
                bad = {"generator": repr(g), "vertex": x}
                break
        if bad:
            break
        for e in X.darts:
            d = r.p_dart.get(e)
            gd = r.p_dart.get(r.action.act_dart(g, e))
            want = None if d is None or not B.has_dart(d) else ta.act_dart(g, d)
            if gd != want:
                bad = {"generator": repr(g), "dart": e}
                break
        if bad:
            break
    checks["equivariant"] = bad is None
    if bad:
        wit["equivariant"] = bad

    fibers = {}
    for x, y in r.p_vertex.items():
        fibers.setdefault(y, set()).add(x)
    bad_v, bad_e, empty = None, None, None
    for y in B.vertices:
        fib = frozenset(fibers.get(y, ()))
        if not fib:
            empty = empty or {"vertex": y}
            continue
        if not _connected_subset(X, fib):
            if sub.is_midpoint(y):
                bad_e = bad_e or {"midpoint": y}
            else:
                bad_v = bad_v or {"vertex": y}
    checks["fibers_nonempty"] = empty is None
    checks["vertex_fibers_connected"] = bad_v is None
    checks["edge_fibers_connected"] = bad_e is None
    for k, w in (("fibers_nonempty", empty), ("vertex_fibers_connected", bad_v),
                 ("edge_fibers_connected", bad_e)):
        if w:
            wit[k] = w

    bad = None
    for e in X.darts:
        t = r.edge_type.get(e)
        same = r.p_vertex.get(X.iota(e)) == r.p_vertex.get(X.tau(e))
        if t not in ("I", "II") or (t == "I") != same or r.edge_type.get(X.bar(e)) != t:
            bad = {"dart": e, "type": t}
            break
    checks["type_dichotomy"] = bad is None
    if bad:
        wit["type_dichotomy"] = bad
    return BlowupReport(checks, wit)


def vertex_count_formula(r: BlowupResult) -> int:
    return (r.action.group.order() // r.K.order()) * len(r.omega0)


# ---------------------------------------------------------------------------
# tree refinement


@dataclass
class TreeRefinement:
    tree: SerreGraph
    action: GroupAction
    collapse_vertex: dict
    collapse_dart: dict  # star darts map to None
    vertex_type: dict


def _extend_family(a: GroupAction, fam: Mapping, points, act) -> dict:
    """Extend ``{point: K}`` to whole orbits by conjugation, checking
    ``g K_w g^-1 = K_{gw}``."""
    out = {}
    for w0, K in sorted(fam.items(), key=lambda kv: idkey(kv[0])):
        kset = K.elements()
        for g in a.group.elements():
            y = act(g, w0)
            conj = frozenset(k.conj(g) for k in kset)
            if y in out:
                if out[y].elements() != conj:
                    raise NotEquivariantFamily(f"family is not equivariant at {y!r}")
            else:
                out[y] = PermGroup.from_elements(a.group.domain, conj, a.group.bound)
    missing = [w for w in points if w not in out]
    if missing:
        raise NotEquivariantFamily(f"no subgroup given for the orbit of {missing[0]!r}")
    return out


def refine_tree(T: SerreGraph, a: GroupAction, Kv: Mapping) -> TreeRefinement:
    if not T.is_tree():
        raise NotATree("refinement needs a tree")
    fam = _extend_family(a, Kv, T.vertices, a.act_vertex)
    for v, K in fam.items():
        Gv = a.vertex_stabilizer(v)
        if not K.is_subgroup_of(Gv):
            raise NotEquivariantFamily(f"K at {v!r} does not fix the vertex")
        if not is_normal(Gv, K):
            raise NotNormal(f"K at {v!r} is not normal in the stabilizer")
    orbit_rep = {}
    for v in T.vertices:
        kels = fam[v].elements()
        for e in T.link(v):
            orbit_rep[e] = min((a.act_dart(k, e) for k in kels), key=idkey)
    vertices = list(T.vertices)
    vtype = {v: "I" for v in T.vertices}
    darts = {}
    cv = {v: v for v in T.vertices}
    cd = {}
    for v in T.vertices:
        for r in sorted_ids({orbit_rep[e] for e in T.link(v)}):
            u = ("II", v, r)
            vertices.append(u)
            vtype[u] = "II"
            cv[u] = v
            darts[("star", v, r)] = (v, u, ("star-", v, r))
            darts[("star-", v, r)] = (u, v, ("star", v, r))
            cd[("star", v, r)] = cd[("star-", v, r)] = None
    for e in T.darts:
        src = ("II", T.iota(e), orbit_rep[T.bar(e)])
        dst = ("II", T.tau(e), orbit_rep[e])
        darts[("edge", e)] = (src, dst, ("edge", T.bar(e)))
        cd[("edge", e)] = e
    T2 = SerreGraph(vertices, darts)
    if not T2.is_tree():
        raise NotATree("internal: refinement is not a tree")

    def vimg(g, x):
        if vtype[x] == "I":
            return a.act_vertex(g, x)
        _, v, r = x
        return ("II", a.act_vertex(g, v), orbit_rep[a.act_dart(g, r)])

    maps = []
    for g in a.group.generators:
        vm = {x: vimg(g, x) for x in T2.vertices}
        dm = {}
        for d in T2.darts:
            if d[0] == "edge":
                dm[d] = ("edge", a.act_dart(g, d[1]))
            else:
                tag, v, r = d
                dm[d] = (tag, a.act_vertex(g, v), orbit_rep[a.act_dart(g, r)])
        maps.append((vm, dm))
    action = GroupAction.from_maps(a.group, T2, maps)
    # K_v fixes the link of v in the refinement
    for v in T.vertices:
        for k in fam[v].generators:
            for d in T2.link(v):
                if action.act_dart(k, d) != d:
                    raise NotEquivariantFamily(f"K at {v!r} moves the refined link")
    return TreeRefinement(T2, action, cv, cd, vtype)


def collapse_refinement(ref: TreeRefinement) -> SerreGraph:
    """Collapse every star back to its center."""
    T2 = ref.tree
    vs = sorted_ids(set(ref.collapse_vertex.values()))
    darts = {}
    for d in T2.darts:
        e = ref.collapse_dart[d]
        if e is None:
            continue
        darts[e] = (ref.collapse_vertex[T2.iota(d)], ref.collapse_vertex[T2.tau(d)],
                    ref.collapse_dart[T2.bar(d)])
    return SerreGraph(vs, darts)


# ---------------------------------------------------------------------------
# imprimitivity quotient of a blowup


@dataclass
class QuotientBlowup:
    result: BlowupResult
    partition: VertexPartition
    K_vertex: dict
    K_edge: dict
    trivial_on_stars: dict  # tree vertex -> bool


def blowup_imprimitivity_quotient(r: BlowupResult, Kw: Mapping, Ke: Mapping | None = None) -> QuotientBlowup:
    """Collapse each vertex fiber to its K_v-orbits and each edge fiber to its
    K_e-orbits.

    ``Ke`` may prescribe edge subgroups (keyed by canonical dart, extended by
    conjugation); each must contain both endpoint subgroups.  Missing edges
    default to ``K_e = K_v K_w``.
    """
    T = r.tree
    ta = r.tree_action
    G = r.action.group
    # restrict the subdivision action to T
    tmaps = []
    for g in G.generators:
        vm = {v: ta.act_vertex(g, v) for v in T.vertices}
        dm = {e: ta.act_dart(g, (e, 0))[0] for e in T.darts}
        tmaps.append((vm, dm))
    tact = GroupAction.from_maps(G, T, tmaps)
    Kv = _extend_family(tact, Kw, T.vertices, tact.act_vertex)
    for v, K in Kv.items():
        Gv = tact.vertex_stabilizer(v)
        if not K.is_subgroup_of(Gv):
            raise NotEquivariantFamily(f"K at {v!r} does not fix the vertex")
        if not is_normal(Gv, K):
            raise NotNormal(f"K at {v!r} is not normal in the stabilizer")
    given = {}
    if Ke:
        given = _extend_family(tact, Ke, (), lambda g, e: T.edge_rep(tact.act_dart(g, e)))
    Kedge = {}
    for e in T.geometric_edges():
        u, v = T.iota(e), T.tau(e)
        Ge = tact.edge_stabilizer(e)
        if e in given:
            K = given[e]
            if not (Kv[u].is_subgroup_of(K) and Kv[v].is_subgroup_of(K)):
                raise ContainmentViolated(f"K at {e!r} does not contain both endpoint subgroups")
        else:
            try:
                K = product_set(Kv[u], Kv[v])
            except NotASubgroup as exc:
                raise ContainmentViolated(f"K_u K_v is not a subgroup at edge {e!r}") from exc
        if not K.is_subgroup_of(Ge):
            raise ContainmentViolated(f"K at edge {e!r} does not stabilize the edge")
        Kedge[e] = K
    labels = {}
    for x in r.X.vertices:
        y = r.p_vertex[x]
        H = Kedge[r.subdivision.original.edge_rep(y[1])] if r.subdivision.is_midpoint(y) else Kv[y]
        labels[x] = min((r.action.act_vertex(k, x) for k in H.elements()), key=idkey)
    part = VertexPartition.from_labels(labels)
    Z, proj = quotient_by_partition(r.X, part)
    p_vertex = {b: r.p_vertex[b] for b in Z.vertices}
    p_dart = {}
    etype = {}
    for d in Z.darts:
        u, v = p_vertex[Z.iota(d)], p_vertex[Z.tau(d)]
        if u == v:
            p_dart[d] = None
            etype[d] = "I"
        else:
            p_dart[d] = _sub_dart(r.subdivision, u, v)
            etype[d] = "II"
    maps = []
    for g in G.generators:
        vm = {b: part.rep(r.action.act_vertex(g, b)) for b in Z.vertices}
        dm = {(a, b): (vm[a], vm[b]) for (a, b) in Z.darts}
        maps.append((vm, dm))
    action = GroupAction.from_maps(G, Z, maps)
    res = BlowupResult(Z, p_vertex, p_dart, etype, action, r.tree_action, r.subdivision)
    trivial = {}
    for v in T.vertices:
        star = {v} | {("mid", T.edge_rep(e)) for e in T.link(v)}
        W = [b for b in Z.vertices if p_vertex[b] in star]
        trivial[v] = all(action.act_vertex(k, b) == b for k in Kv[v].generators for b in W)
    return QuotientBlowup(res, part, Kv, Kedge, trivial)
