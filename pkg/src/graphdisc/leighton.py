"""Degree refinement and common finite covers of (decorated) graphs and of
graphs of spaces.

The explicit construction: refine the disjoint union jointly; a dart *type*
is ``(class of iota, class of tau, color, bar color)``.  Put ``C`` = lcm of
the sizes of the dart-type bundles of ``x1`` and let class ``i`` carry the
vertices ``(v1, v2, t)`` with ``t < c_i = C / n1_i``.  At ``(v1, v2, t)`` the
k-th in-dart of a type at ``v1`` is matched with the ``(k + t) mod m``-th one
at ``v2``; each matched pair occurs ``C / |bundle|`` times and the s-th
occurrence is glued to the s-th occurrence of the reversed pair.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations, product
from math import lcm

from .autgrp import Coloring, automorphism_group, canonical_form, refine, _initial
from .errors import (AmbiguousLocalSymmetry, NoCommonCover, NotConnected, SearchBoundExceeded)
from .gos import GoSMorphism, GraphOfSpaces, check_gos_covering
from .graph import GraphMorphism, SerreGraph, identity_morphism, is_covering
from .ids import idkey, sorted_ids
from .voltage import cotree_edges, voltage_cover


# ---------------------------------------------------------------------------
# degree refinement


@dataclass(frozen=True)
class RefinementProfile:
    """Stable classes with transition counts.

    ``transitions[(i, label)]`` maps class ``i`` to the multiset, per
    in-dart of a class-``i`` vertex, of ``(dart color, bar color, class of
    the far end)`` as a sorted tuple of ``(key, count)``.
    """

    classes: tuple  # tuple of frozensets, index = class id
    transitions: dict
    depth: int

    def class_of(self) -> dict:
        return {v: i for i, b in enumerate(self.classes) for v in b}

    def num_classes(self) -> int:
        return len(self.classes)


def _transitions(g, cls, dc):
    out = {}
    for v in g.vertices:
        counts = {}
        for e in g.link(v):
            key = (dc[e], dc[g.bar(e)], cls[g.iota(e)])
            counts[key] = counts.get(key, 0) + 1
        out.setdefault(cls[v], tuple(sorted(counts.items())))
    return out


def degree_refinement(g: SerreGraph, c: Coloring | None = None) -> RefinementProfile:
    if not g.is_connected():
        raise NotConnected("degree refinement needs a connected graph")
    (vc,), (dc,) = _initial([g], [c])
    stable = refine([g], [vc], [dc])[0]
    classes = {}
    for v, x in stable.items():
        classes.setdefault(x, set()).add(v)
    order = sorted(classes)
    remap = {x: i for i, x in enumerate(order)}
    cls = {v: remap[x] for v, x in stable.items()}
    return RefinementProfile(tuple(frozenset(classes[x]) for x in order), _transitions(g, cls, dc),
                             _rounds(g, vc, dc))


def _rounds(g, vc, dc) -> int:
    """Number of recoloring rounds until the class count stops growing."""
    cols = dict(vc)
    k = len(set(cols.values()))
    rounds = 0
    while True:
        sig = {v: (cols[v], tuple(sorted((dc[e], dc[g.bar(e)], cols[g.iota(e)]) for e in g.link(v))))
               for v in g.vertices}
        ranks = {s: i for i, s in enumerate(sorted(set(sig.values())))}
        cols = {v: ranks[s] for v, s in sig.items()}
        rounds += 1
        if len(ranks) == k:
            return rounds
        k = len(ranks)


@dataclass
class JointRefinement:
    classes1: dict  # class -> sorted vertices of x1
    classes2: dict
    cls1: dict
    cls2: dict
    dc1: dict
    dc2: dict
    matched: bool
    reason: str = ""


def joint_refinement(x1: SerreGraph, x2: SerreGraph, c1: Coloring | None = None,
                     c2: Coloring | None = None) -> JointRefinement:
    (v1, v2), (d1, d2) = _initial([x1, x2], [c1, c2])
    r1, r2 = refine([x1, x2], [v1, v2], [d1, d2])
    classes1, classes2 = {}, {}
    for v, x in r1.items():
        classes1.setdefault(x, []).append(v)
    for v, x in r2.items():
        classes2.setdefault(x, []).append(v)
    classes1 = {x: sorted_ids(vs) for x, vs in classes1.items()}
    classes2 = {x: sorted_ids(vs) for x, vs in classes2.items()}
    matched, reason = True, ""
    if set(classes1) != set(classes2):
        matched, reason = False, "profile mismatch"
    else:
        ratios = {(len(classes1[x]) * x2.num_vertices(), len(classes2[x]) * x1.num_vertices())
                  for x in classes1}
        if any(a != b for a, b in ratios):
            matched, reason = False, "class proportions differ"
    return JointRefinement(classes1, classes2, r1, r2, d1, d2, matched, reason)


def profiles_match(x1: SerreGraph, x2: SerreGraph, c1: Coloring | None = None,
                   c2: Coloring | None = None) -> bool:
    """True iff the two connected graphs have isomorphic universal covers
    (every jointly stable class meets both graphs)."""
    return joint_refinement(x1, x2, c1, c2).matched


def refinement_preserved(f: GraphMorphism, cs: Coloring | None = None, ct: Coloring | None = None) -> bool:
    """A covering maps each stable class of the source into one stable class of
    the target, with the same transition row (jointly refined)."""
    j = joint_refinement(f.source, f.target, cs, ct)
    return all(j.cls1[v] == j.cls2[f.vmap[v]] for v in f.source.vertices)


# ---------------------------------------------------------------------------
# explicit common cover


def _same_colored_graph(x1, x2, c1, c2) -> bool:
    if x1 != x2:
        return False
    a, b = c1 or Coloring(), c2 or Coloring()
    return (all(a.vcolor(v) == b.vcolor(v) for v in x1.vertices)
            and all(a.dcolor(e) == b.dcolor(e) for e in x1.darts))


def leighton_cover(x1: SerreGraph, x2: SerreGraph, c1: Coloring | None = None,
                   c2: Coloring | None = None):
    """Full (possibly disconnected) explicit common cover with both projections."""
    if not x1.is_connected() or not x2.is_connected():
        raise NotConnected("common covers need connected graphs")
    j = joint_refinement(x1, x2, c1, c2)
    if not j.matched:
        raise NoCommonCover(j.reason)

    def dtype(g, cls, dc, e):
        return (cls[g.iota(e)], cls[g.tau(e)], dc[e], dc[g.bar(e)])

    def in_lists(g, cls, dc):
        out = {}
        for v in g.vertices:
            for e in g.link(v):
                out.setdefault((v, dtype(g, cls, dc, e)), []).append(e)
        for k in out:
            out[k] = sorted_ids(out[k])
        return out

    in1 = in_lists(x1, j.cls1, j.dc1)
    in2 = in_lists(x2, j.cls2, j.dc2)
    pos1 = {e: i for lst in in1.values() for i, e in enumerate(lst)}
    pos2 = {e: i for lst in in2.values() for i, e in enumerate(lst)}
    bundle = {}
    for e in x1.darts:
        t = dtype(x1, j.cls1, j.dc1, e)
        bundle[t] = bundle.get(t, 0) + 1
    C = 1
    for b in bundle.values():
        C = lcm(C, b)
    for vs in j.classes1.values():
        C = lcm(C, len(vs))
    copies = {x: C // len(vs) for x, vs in j.classes1.items()}
    vertices = [(v1, v2, t) for x in sorted(j.classes1)
                for v1 in j.classes1[x] for v2 in j.classes2[x] for t in range(copies[x])]
    darts = {}
    for (v1, v2, t) in vertices:
        for (v, typ), lst in in1.items():
            if v != v1:
                continue
            lst2 = in2[(v2, typ)]
            m = len(lst)
            for k, d1 in enumerate(lst):
                d2 = lst2[(k + t) % m]
                s = t // m
                b1, b2 = x1.bar(d1), x2.bar(d2)
                mb = len(in1[(x1.tau(b1), dtype(x1, j.cls1, j.dc1, b1))])
                k2 = pos1[b1]
                l2 = pos2[b2]
                tb = (l2 - k2) % mb + s * mb
                darts[(d1, d2, t)] = ((x1.iota(d1), x2.iota(d2), tb), (v1, v2, t), (b1, b2, tb))
    Z = SerreGraph(vertices, darts)
    p1 = GraphMorphism(Z, x1, {z: z[0] for z in Z.vertices}, {d: d[0] for d in Z.darts})
    p2 = GraphMorphism(Z, x2, {z: z[1] for z in Z.vertices}, {d: d[1] for d in Z.darts})
    return Z, p1, p2


def common_cover_graphs(x1: SerreGraph, x2: SerreGraph, c1: Coloring | None = None,
                        c2: Coloring | None = None, max_vertices: int | None = None):
    """Connected common finite cover with both projections verified."""
    if _same_colored_graph(x1, x2, c1, c2):
        if not x1.is_connected():
            raise NotConnected("common covers need connected graphs")
        return x1, identity_morphism(x1), identity_morphism(x2)
    Z, p1, p2 = leighton_cover(x1, x2, c1, c2)
    if max_vertices is not None and Z.num_vertices() > max_vertices:
        raise SearchBoundExceeded(f"construction needs {Z.num_vertices()} vertices")
    comps = sorted(Z.components(), key=lambda c: (len(c), idkey(min(c, key=idkey))))
    vs = comps[0]
    z = Z.induced_subgraph(vs)
    q1, q2 = p1.restrict(vs), p2.restrict(vs)
    for q in (q1, q2):
        rep = is_covering(q)
        if not rep or rep.degree is None:
            raise AssertionError("internal: constructed map is not a covering")
    a, b = c1 or Coloring(), c2 or Coloring()
    for v in z.vertices:
        if a.vcolor(q1.vmap[v]) != b.vcolor(q2.vmap[v]):
            raise AssertionError("internal: projections disagree on vertex colors")
    for e in z.darts:
        if a.dcolor(q1.dmap[e]) != b.dcolor(q2.dmap[e]):
            raise AssertionError("internal: projections disagree on dart colors")
    return z, q1, q2


# ---------------------------------------------------------------------------
# brute-force oracle


def find_covering_map(z: SerreGraph, x: SerreGraph, cz: Coloring | None = None,
                      cx: Coloring | None = None, start_targets=None) -> GraphMorphism | None:
    """Exhaustive search for a color-preserving covering ``z -> x`` (z connected)."""
    if z.num_vertices() == 0 or x.num_vertices() == 0:
        return None
    if z.num_vertices() % x.num_vertices() or z.num_darts() * x.num_vertices() != x.num_darts() * z.num_vertices():
        return None
    cz, cx = cz or Coloring(), cx or Coloring()
    z0 = z.vertices[0]
    targets = start_targets if start_targets is not None else x.vertices
    out_x = {w: list(x.out_darts(w)) for w in x.vertices}

    def extend(vmap, dmap, queue):
        if not queue:
            if len(vmap) != z.num_vertices():
                return None
            return dict(vmap), dict(dmap)
        v = queue[0]
        w = vmap[v]
        pending = [e for e in z.out_darts(v) if e not in dmap]
        used = {dmap[e] for e in z.out_darts(v) if e in dmap}
        free = [f for f in out_x[w] if f not in used]
        if len(free) != len(pending):
            return None
        for perm in permutations(free):
            ok = True
            added_d, added_v = [], []
            for e, f in zip(pending, perm):
                be, bf = z.bar(e), x.bar(f)
                if cz.dcolor(e) != cx.dcolor(f) or cz.dcolor(be) != cx.dcolor(bf):
                    ok = False
                    break
                t = z.tau(e)
                if t in vmap:
                    if vmap[t] != x.tau(f):
                        ok = False
                        break
                elif cz.vcolor(t) != cx.vcolor(x.tau(f)):
                    ok = False
                    break
                else:
                    vmap[t] = x.tau(f)
                    added_v.append(t)
                if be in dmap:
                    if dmap[be] != bf:
                        ok = False
                        break
                else:
                    dmap[be] = bf
                    added_d.append(be)
                dmap[e] = f
                added_d.append(e)
            if ok:
                # the link of every touched vertex must stay injective
                nxt = queue[1:] + added_v
                if _links_injective(z, dmap, [v] + [z.tau(e) for e in pending]):
                    res = extend(vmap, dmap, nxt)
                    if res is not None:
                        return res
            for e in added_d:
                dmap.pop(e, None)
            for t in added_v:
                vmap.pop(t, None)
        return None

    for w in targets:
        if cz.vcolor(z0) != cx.vcolor(w) or z.degree(z0) != x.degree(w):
            continue
        res = extend({z0: w}, {}, [z0])
        if res is not None:
            return GraphMorphism(z, x, res[0], res[1])
    return None


def _links_injective(z, dmap, vertices) -> bool:
    for v in vertices:
        imgs = [dmap[e] for e in z.link(v) if e in dmap]
        if len(imgs) != len(set(imgs)):
            return False
    return True


def _cycle_type_reps(d: int) -> list:
    """One permutation per conjugacy class of S_d (as image tuples)."""
    def partitions(n, maxpart):
        if n == 0:
            yield ()
            return
        for k in range(min(n, maxpart), 0, -1):
            for rest in partitions(n - k, k):
                yield (k,) + rest

    reps = []
    for part in partitions(d, d):
        perm = list(range(d))
        start = 0
        for k in part:
            for i in range(k):
                perm[start + i] = start + (i + 1) % k
            start += k
        reps.append(tuple(perm))
    return sorted(reps)


def _conj(c, s):
    """c s c^-1 as image tuples."""
    out = [0] * len(s)
    for i, j in enumerate(s):
        out[c[i]] = c[j]
    return tuple(out)


def _transitive(vols, d) -> bool:
    seen = {0}
    todo = [0]
    while todo:
        i = todo.pop()
        for s in vols:
            for j in (s[i], s.index(i)):
                if j not in seen:
                    seen.add(j)
                    todo.append(j)
    return len(seen) == d


def connected_covers(x: SerreGraph, d: int, limit: int | None = None):
    """Yield connected degree-d voltage covers of ``x``, one per conjugacy
    class of cotree voltage tuples."""
    edges = cotree_edges(x)
    k = len(edges)
    if d == 1:
        yield voltage_cover(x, 1, {})
        return
    if k == 0:
        return
    allp = list(permutations(range(d)))
    count = 0
    for s1 in _cycle_type_reps(d):
        cent = [c for c in allp if _conj(c, s1) == s1]
        for rest in product(allp, repeat=k - 1):
            vols = (s1,) + rest
            if not _transitive(vols, d):
                continue
            if any(tuple(_conj(c, s) for s in rest) < rest for c in cent):
                continue
            count += 1
            if limit is not None and count > limit:
                raise SearchBoundExceeded(f"more than {limit} candidate covers")
            yield voltage_cover(x, d, dict(zip(edges, vols)))


def _is_bipartite(g: SerreGraph) -> bool:
    side = {}
    for root in g.vertices:
        if root in side:
            continue
        side[root] = 0
        todo = [root]
        while todo:
            v = todo.pop()
            for e in g.out_darts(v):
                w = g.tau(e)
                if w not in side:
                    side[w] = 1 - side[v]
                    todo.append(w)
                elif side[w] == side[v]:
                    return False
    return True


@dataclass
class OracleResult:
    graph: SerreGraph
    p1: GraphMorphism
    p2: GraphMorphism
    order: int
    candidates_tested: int


def brute_force_common_cover(x1: SerreGraph, x2: SerreGraph, max_degree: int = 6,
                             limit: int | None = 2_000_000) -> OracleResult | None:
    """Minimal-order common cover by exhaustive search, or None.

    Orders are tried in increasing multiples of lcm(|V1|, |V2|) up to
    ``max_degree * |V1|``.  At each order the graph needing fewer voltage
    tuples is enumerated and each connected cover is tested for a covering
    onto the other graph.
    """
    if not x1.is_connected() or not x2.is_connected():
        raise NotConnected("common covers need connected graphs")
    n1, n2 = x1.num_vertices(), x2.num_vertices()
    if not profiles_match(x1, x2):
        return None
    base = lcm(n1, n2)
    tested = 0
    N = base
    reps = {}
    while N <= max_degree * n1:
        d1, d2 = N // n1, N // n2
        k1, k2 = len(cotree_edges(x1)), len(cotree_edges(x2))
        cost1 = _count_factorial(d1) ** max(k1 - 1, 0)
        cost2 = _count_factorial(d2) ** max(k2 - 1, 0)
        if cost2 < cost1:
            src, dst, d, swap = x2, x1, d2, True
        else:
            src, dst, d, swap = x1, x2, d1, False
        if dst not in reps.values() or id(dst) not in reps:
            reps[id(dst)] = _orbit_reps(dst)
        need_bip = _is_bipartite(dst)
        for z, f in connected_covers(src, d, limit):
            tested += 1
            if need_bip and not _is_bipartite(z):
                continue
            g = find_covering_map(z, dst, start_targets=reps[id(dst)])
            if g is not None:
                p1, p2 = (g, f) if swap else (f, g)
                return OracleResult(z, p1, p2, N, tested)
        N += base
    return None


def _count_factorial(d: int) -> int:
    r = 1
    for i in range(2, d + 1):
        r *= i
    return r


def _orbit_reps(x: SerreGraph) -> list:
    G = automorphism_group(x)
    seen = set()
    reps = []
    for v in x.vertices:
        if v in seen:
            continue
        reps.append(v)
        seen |= {p[1] for p in G.orbit(("v", v))}
    return reps


# ---------------------------------------------------------------------------
# graphs of spaces


@dataclass
class Decoration:
    coloring: Coloring
    labelings: dict      # v -> (vertex position map, dart position map) of X_v
    symmetric_stars: dict  # v -> description of a mark-permuting automorphism

    @property
    def rigid(self) -> bool:
        return not self.symmetric_stars


def _marked_coloring(y: GraphOfSpaces, v) -> Coloring:
    X = y.vertex_space(v)
    marked = set()
    for e in y.graph.link(v):
        marked |= set(y.attachment(e).vmap.values())
    return Coloring({x: (1 if x in marked else 0) for x in X.vertices}, {})


def canonical_labeling(g: SerreGraph, c: Coloring | None = None):
    """Canonical certificate plus vertex and dart positions.

    Dart ties (parallel darts with equal colors) are broken so that bar
    pairs receive matching indices, making position-to-position maps between
    equal certificates graph isomorphisms.
    """
    col = c or Coloring()
    cf = canonical_form(g, col)
    vpos = cf.position()
    keyed = {}
    for e in g.darts:
        k = (vpos[g.iota(e)], vpos[g.tau(e)], col.dcolor(e), col.dcolor(g.bar(e)))
        keyed.setdefault(k, []).append(e)
    tie = {}
    for k, ds in keyed.items():
        i, j, a, b = k
        if i == j and a == b:
            loops = sorted_ids({g.edge_rep(e) for e in ds})
            for n, e in enumerate(loops):
                tie[e] = 2 * n
                tie[g.bar(e)] = 2 * n + 1
        elif idkey(k) < idkey((j, i, b, a)):
            for n, e in enumerate(sorted_ids(ds)):
                tie[e] = n
                tie[g.bar(e)] = n
    order = sorted(g.darts, key=lambda e: idkey((vpos[g.iota(e)], vpos[g.tau(e)],
                                                  col.dcolor(e), col.dcolor(g.bar(e)), tie[e])))
    dpos = {e: i for i, e in enumerate(order)}
    return cf.certificate, vpos, dpos


def gos_decoration(y: GraphOfSpaces) -> Decoration:
    """Colors for the underlying graph: vertices by the canonical form of the
    marked vertex space, darts by the attachment and gluing data in
    canonical coordinates."""
    G = y.graph
    vcol, labels, sym = {}, {}, {}
    for v in G.vertices:
        X = y.vertex_space(v)
        mc = _marked_coloring(y, v)
        cert, vpos, dpos = canonical_labeling(X, mc)
        vcol[v] = cert
        labels[v] = (vpos, dpos)
        marks = [frozenset(y.attachment(e).vmap.values()) for e in G.link(v)]
        aut = automorphism_group(X, mc)
        for p in aut.generators:
            m = p.mapping()
            for mk in marks:
                img = frozenset(m[("v", x)][1] for x in mk)
                if img != mk:
                    sym[v] = {"moves_mark": sorted_ids(mk), "to": sorted_ids(img)}
                    break
            if v in sym:
                break
    dcol = {}
    for e in G.darts:
        u, v = G.iota(e), G.tau(e)
        phi, phib = y.attachment(e), y.attachment(G.bar(e))
        Xe = y.edge_space(e)
        vp_v, dp_v = labels[v]
        vp_u, dp_u = labels[u]
        vpairs = tuple(sorted((vp_v[phi.vmap[x]], vp_u[phib.vmap[x]]) for x in Xe.vertices))
        dpairs = tuple(sorted((dp_v[phi.dmap[d]], dp_u[phib.dmap[d]]) for d in Xe.darts))
        dcol[e] = (vpairs, dpairs)
    return Decoration(Coloring(vcol, dcol), labels, sym)


def common_cover_gos(y1: GraphOfSpaces, y2: GraphOfSpaces):
    """Common finite cover of two graphs of spaces whose marked vertex spaces
    are rigid.  Returns ``(z, p1, p2)`` with both maps verified coverings."""
    dec1, dec2 = gos_decoration(y1), gos_decoration(y2)
    for dec in (dec1, dec2):
        if not dec.rigid:
            v = sorted_ids(dec.symmetric_stars)[0]
            raise AmbiguousLocalSymmetry(f"marked vertex space at {v!r} has a mark-permuting symmetry")
    L1, L2 = y1.graph, y2.graph
    Z, q1, q2 = common_cover_graphs(L1, L2, dec1.coloring, dec2.coloring)
    vs = {z: y1.vertex_space(q1.vmap[z]) for z in Z.vertices}
    es = {r: y1.edge_space(q1.dmap[r]) for r in Z.geometric_edges()}
    att = {d: y1.attachment(q1.dmap[d]) for d in Z.darts}
    zy = GraphOfSpaces(Z, vs, es, att)
    f1 = GoSMorphism(zy, y1, q1, {z: identity_morphism(vs[z]) for z in Z.vertices},
                     {r: identity_morphism(es[r]) for r in Z.geometric_edges()})
    vmaps = {}
    for z in Z.vertices:
        a, b = q1.vmap[z], q2.vmap[z]
        vp1, dp1 = dec1.labelings[a]
        vp2, dp2 = dec2.labelings[b]
        inv_v = {i: x for x, i in vp2.items()}
        inv_d = {i: d for d, i in dp2.items()}
        X1 = y1.vertex_space(a)
        vmaps[z] = GraphMorphism(X1, y2.vertex_space(b), {x: inv_v[vp1[x]] for x in X1.vertices},
                                 {d: inv_d[dp1[d]] for d in X1.darts})
    emaps = {}
    for r in Z.geometric_edges():
        d1, d2 = q1.dmap[r], q2.dmap[r]
        phi1, phi2 = y1.attachment(d1), y2.attachment(d2)
        h = vmaps[Z.tau(r)]
        inv_v = {x: a for a, x in phi2.vmap.items()}
        inv_d = {x: a for a, x in phi2.dmap.items()}
        Xe = y1.edge_space(d1)
        emaps[r] = GraphMorphism(Xe, y2.edge_space(d2),
                                 {x: inv_v[h.vmap[phi1.vmap[x]]] for x in Xe.vertices},
                                 {d: inv_d[h.dmap[phi1.dmap[d]]] for d in Xe.darts})
    f2 = GoSMorphism(zy, y2, q2, vmaps, emaps)
    for f in (f1, f2):
        rep = check_gos_covering(f)
        if not rep:
            raise AssertionError(f"internal: pulled-back cover fails verification: {rep.witness}")
    return zy, f1, f2
