"""Finite gluing data for a common regular cover of two quotients of a tree
of spaces, and assembly of balls in the resulting tree of spaces.

Data model.  ``quotient`` is the orbit graph of the tree; every vertex ``v`` of
it stands for a lifted tree vertex with piece ``X_v`` and groups
``Qhat_v <= Gamma_v, Gamma2_v <= Q_v <= Aut(X_v)`` given as permutation groups
of ``graph_points(X_v)``.  Every dart ``l`` carries the attachment
``phi_l: X_e -> X_{tau l}`` of a representative tree edge.  The marks at ``v``
are the ``Q_v``-translates of the images ``phi_l(X_e)``; they stand for the
link of ``v`` in the tree and must be pairwise disjoint.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace

from .errors import (GluingMismatch, HatConditionViolated, InvalidGraphOfSpaces, NotASubgroup,
                     NotFree, NotNormal)
from .gos import GraphOfSpaces, is_fiber_product_diagram
from .graph import (GraphMorphism, SerreGraph, deck_transformations, disjoint_union,
                    is_covering)
from .ids import idkey, min_id, sorted_ids
from .permgrp import (PermGroup, Permutation, graph_points, index, intersection, is_normal,
                      setwise_stabilizer, split_graph_perm)

CONDITIONS = ("Free", "Equivariance", "VertexSpaceCommonCovers", "GluingCondition")


@dataclass
class HatCoverData:
    quotient: SerreGraph
    vertex_spaces: dict   # v -> SerreGraph
    edge_spaces: dict     # geometric edge rep of the quotient -> SerreGraph
    attachments: dict     # dart l -> GraphMorphism X_e -> X_{tau l}
    Q: dict               # v -> PermGroup on graph_points(X_v)
    Gamma: dict
    Gamma2: dict
    Qhat: dict
    name: str = ""

    def edge_space(self, l) -> SerreGraph:
        return self.edge_spaces[self.quotient.edge_rep(l)]

    def mark(self, l) -> frozenset:
        phi = self.attachments[l]
        return frozenset([("v", x) for x in phi.vmap.values()] + [("d", d) for d in phi.dmap.values()])


def _image(q: Permutation, pts) -> frozenset:
    return frozenset(q(p) for p in pts)


def restriction(data: HatCoverData, l, q: Permutation) -> Permutation:
    """``F(q) = phi_l^-1 o q o phi_l`` on the edge space (``q`` must preserve the mark)."""
    phi = data.attachments[l]
    Xe = data.edge_space(l)
    inv_v = {x: y for y, x in phi.vmap.items()}
    inv_d = {x: y for y, x in phi.dmap.items()}
    m = {}
    for y in Xe.vertices:
        m[("v", y)] = ("v", inv_v[q(("v", phi.vmap[y]))[1]])
    for d in Xe.darts:
        m[("d", d)] = ("d", inv_d[q(("d", phi.dmap[d]))[1]])
    return Permutation.from_mapping(m, graph_points(Xe))


def restricted_group(data: HatCoverData, l, H: PermGroup) -> PermGroup:
    """``F_v^l(H ∩ Q_v^l)`` as a group on the edge space."""
    Hl = setwise_stabilizer(H, data.mark(l))
    Xe = data.edge_space(l)
    return PermGroup(graph_points(Xe), [restriction(data, l, q) for q in Hl.generators])


def _free_witness(X: SerreGraph, H: PermGroup):
    for g in H.sorted_elements():
        if g.is_identity():
            continue
        for x in X.vertices:
            if g(("v", x)) == ("v", x):
                return {"element": g.cycles(), "fixes": x}
        for e in X.darts:
            img = g(("d", e))[1]
            if img == e or img == X.bar(e):
                return {"element": g.cycles(), "dart": e, "inverts": img != e}
    return None


def _check_structure(data: HatCoverData):
    L = data.quotient
    for v in L.vertices:
        X = data.vertex_spaces[v]
        Q = data.Q[v]
        if Q.domain != graph_points(X):
            raise InvalidGraphOfSpaces(f"Q at {v!r} does not act on the points of X_v")
        for g in Q.generators:
            vm, dm = split_graph_perm(g)
            GraphMorphism(X, X, vm, dm)
        for name in ("Gamma", "Gamma2", "Qhat"):
            H = getattr(data, name)[v]
            if not H.is_subgroup_of(Q):
                raise NotASubgroup(f"{name} at {v!r} is not a subgroup of Q")
    for l in L.darts:
        phi = data.attachments[l]
        if phi.target is not data.vertex_spaces[L.tau(l)] and phi.target != data.vertex_spaces[L.tau(l)]:
            raise InvalidGraphOfSpaces(f"attachment of {l!r} does not land in the terminal piece")
        if phi.source != data.edge_space(l) or not phi.is_injective():
            raise InvalidGraphOfSpaces(f"attachment of {l!r} is not an embedding of the edge space")
    for v in L.vertices:
        seen = {}
        for l in L.link(v):
            base = data.mark(l)
            for q in data.Q[v].elements():
                img = _image(q, base)
                for other, lab in seen.items():
                    if other != img and other & img:
                        raise InvalidGraphOfSpaces(f"marks at {v!r} overlap ({lab!r} and {l!r})")
                    if other == img and lab != l:
                        raise InvalidGraphOfSpaces(f"darts {lab!r} and {l!r} have the same marks at {v!r}")
                seen.setdefault(img, l)


def check_hat_conditions(data: HatCoverData) -> dict:
    """Every condition by name: ``"pass"`` or a description of the failure."""
    rep = {}
    for c in CONDITIONS:
        try:
            _check_condition(data, c)
            rep[c] = "pass"
        except HatConditionViolated as ex:
            rep[c] = ex.detail
        except (NotFree, NotNormal) as ex:
            rep[c] = str(ex)
    return rep


def _check_condition(data: HatCoverData, c: str):
    L = data.quotient
    if c == "Free":
        for v in L.vertices:
            for name in ("Gamma", "Gamma2"):
                w = _free_witness(data.vertex_spaces[v], getattr(data, name)[v])
                if w is not None:
                    raise NotFree(f"{name} at {v!r} does not act freely: {w}")
    elif c == "Equivariance":
        for v in L.vertices:
            if not is_normal(data.Q[v], data.Qhat[v]):
                raise NotNormal(f"Qhat at {v!r} is not normal in Q")
    elif c == "VertexSpaceCommonCovers":
        for v in L.vertices:
            for name in ("Gamma", "Gamma2"):
                if not data.Qhat[v].is_subgroup_of(getattr(data, name)[v]):
                    raise HatConditionViolated(c, f"Qhat at {v!r} is not contained in {name}")
    elif c == "GluingCondition":
        for e in L.geometric_edges():
            b = L.bar(e)
            sides = []
            for l in (e, b):
                v = L.tau(l)
                Hl = setwise_stabilizer(data.Qhat[v], data.mark(l))
                img = restricted_group(data, l, data.Qhat[v])
                if img.order() != Hl.order():
                    raise GluingMismatch(e, f"restriction at {v!r} is not injective")
                sides.append(img)
            if sides[0] != sides[1]:
                raise GluingMismatch(e, f"restricted groups differ (orders {sides[0].order()} and {sides[1].order()})")


# ---------------------------------------------------------------------------
# quotients by free actions


@dataclass
class FreeQuotient:
    graph: SerreGraph
    proj: GraphMorphism  # X -> X/H
    group: PermGroup

    def rep_v(self, x):
        return self.proj.vmap[x]

    def rep_d(self, d):
        return self.proj.dmap[d]


def free_quotient(X: SerreGraph, H: PermGroup) -> FreeQuotient:
    """Quotient by a free action; orbits are named by their least member."""
    w = _free_witness(X, H)
    if w is not None:
        raise NotFree(f"group does not act freely: {w}")
    vrep, drep = {}, {}
    els = H.elements()
    for x in X.vertices:
        if x not in vrep:
            orb = [g(("v", x))[1] for g in els]
            r = min_id(orb)
            for y in orb:
                vrep[y] = r
    for d in X.darts:
        if d not in drep:
            orb = [g(("d", d))[1] for g in els]
            r = min_id(orb)
            for y in orb:
                drep[y] = r
    reps = sorted_ids(set(drep.values()))
    darts = {r: (vrep[X.iota(r)], vrep[X.tau(r)], drep[X.bar(r)]) for r in reps}
    Xq = SerreGraph(sorted_ids(set(vrep.values())), darts)
    return FreeQuotient(Xq, GraphMorphism(X, Xq, vrep, drep, check=False), H)


def induced_map(a: FreeQuotient, b: FreeQuotient, q: Permutation | None = None) -> GraphMorphism:
    """``[x]_a -> [q x]_b`` (identity ``q`` by default)."""
    def qv(x):
        return x if q is None else q(("v", x))[1]

    def qd(d):
        return d if q is None else q(("d", d))[1]

    return GraphMorphism(a.graph, b.graph, {r: b.rep_v(qv(r)) for r in a.graph.vertices},
                         {r: b.rep_d(qd(r)) for r in a.graph.darts})


def _transport(a: FreeQuotient, phi: GraphMorphism, b: FreeQuotient, q: Permutation | None = None):
    """``[y]_a -> [q phi(y)]_b`` for an attachment ``phi`` of ``a``'s graph."""
    def qv(x):
        return x if q is None else q(("v", x))[1]

    def qd(d):
        return d if q is None else q(("d", d))[1]

    return GraphMorphism(a.graph, b.graph, {r: b.rep_v(qv(phi.vmap[r])) for r in a.graph.vertices},
                         {r: b.rep_d(qd(phi.dmap[r])) for r in a.graph.darts})


# ---------------------------------------------------------------------------
# gluing


@dataclass
class VertexCover:
    """``X_v/Qhat_v -> X_v/Gamma`` with its degree and deck group order."""

    lattice: str
    quotient: FreeQuotient
    map: GraphMorphism
    degree: int
    deck_order: int
    index: int

    @property
    def regular(self) -> bool:
        return self.deck_order == self.degree == self.index


@dataclass
class HatGlue:
    data: HatCoverData
    vertex_pieces: dict          # v -> FreeQuotient of X_v by Qhat_v
    edge_groups: dict            # edge rep -> PermGroup Qhat_e
    edge_pieces: dict            # edge rep -> FreeQuotient of X_e by Qhat_e
    embeddings: dict             # dart l -> GraphMorphism Xhat_e -> Xhat_{tau l}
    covers: dict                 # (v, lattice) -> VertexCover
    report: dict = field(default_factory=dict)


def verify_and_glue_hat(data: HatCoverData) -> HatGlue:
    _check_structure(data)
    for c in CONDITIONS:
        _check_condition(data, c)
    L = data.quotient
    pieces = {v: free_quotient(data.vertex_spaces[v], data.Qhat[v]) for v in L.vertices}
    egroups, epieces = {}, {}
    for e in L.geometric_edges():
        H = restricted_group(data, e, data.Qhat[L.tau(e)])
        egroups[e] = H
        epieces[e] = free_quotient(data.edge_space(e), H)
    emb = {}
    for l in L.darts:
        f = _transport(epieces[L.edge_rep(l)], data.attachments[l], pieces[L.tau(l)])
        if not f.is_injective():
            raise GluingMismatch(L.edge_rep(l), f"quotient edge piece does not embed at {L.tau(l)!r}")
        emb[l] = f
    covers = {}
    for v in L.vertices:
        for name in ("Gamma", "Gamma2"):
            G = getattr(data, name)[v]
            low = free_quotient(data.vertex_spaces[v], G)
            f = induced_map(pieces[v], low)
            rep = is_covering(f)
            if not rep:
                raise AssertionError(f"internal: piece map at {v!r} is not a covering: {rep.witness}")
            deck = len(deck_transformations(f))
            vc = VertexCover(name, low, f, rep.degree, deck, index(G, data.Qhat[v]))
            if not vc.regular:
                raise AssertionError(f"internal: piece cover at {v!r} is not regular of degree [{name}:Qhat]")
            covers[(v, name)] = vc
    report = {c: "pass" for c in CONDITIONS}
    return HatGlue(data, pieces, egroups, epieces, emb, covers, report)


# ---------------------------------------------------------------------------
# balls


def _marks_at(data: HatCoverData, v) -> list:
    """``(label, q, image)`` for every mark at ``v`` with the least ``q``."""
    out = []
    seen = set()
    Q = data.Q[v].sorted_elements()
    for l in sorted_ids(data.quotient.link(v)):
        base = data.mark(l)
        for q in Q:
            img = _image(q, base)
            if img not in seen:
                seen.add(img)
                out.append((l, q, img))
    return out


def _orbit_classes(marks: list, H: PermGroup) -> list:
    """Group marks into ``H``-orbits; each class lists indices into ``marks``."""
    where = {img: i for i, (_, _, img) in enumerate(marks)}
    cls = []
    done = set()
    els = H.sorted_elements()
    for i, (_, _, img) in enumerate(marks):
        if i in done:
            continue
        orb = sorted({where[_image(h, img)] for h in els})
        done.update(orb)
        cls.append(orb)
    return cls


@dataclass
class HatBall:
    gos: GraphOfSpaces
    root: tuple
    radius: int
    boundary: list
    vertex_type: dict   # ball vertex -> quotient vertex
    dart_mark: dict     # ball dart -> (label, q) of the mark it enters at its terminal vertex
    checks: dict        # (ball vertex, lattice) -> {"ok": bool, "degree": int, "witness": ...}

    @property
    def interior(self) -> list:
        return sorted_ids({s for s, _ in self.checks})

    @property
    def ok(self) -> bool:
        return all(c["ok"] for c in self.checks.values())


def assemble_hat_ball(data: HatCoverData, r: int, base=None, glue: HatGlue | None = None) -> HatBall:
    """Radius-``r`` ball of the glued tree of spaces around ``base``.

    Each ball vertex of type ``v`` has one edge per ``Qhat_v``-orbit of marks.
    The edge towards a child of type ``u`` enters it through the mark
    ``phi_lbar`` itself.  Interior vertices are checked against both lattices.
    """
    if r < 0:
        raise ValueError("radius must be non-negative")
    glue = glue or verify_and_glue_hat(data)
    L = data.quotient
    base = min_id(L.vertices) if base is None else base
    marks = {v: _marks_at(data, v) for v in L.vertices}
    hat_classes = {v: _orbit_classes(marks[v], data.Qhat[v]) for v in L.vertices}
    vertex_type = {(): base}
    incoming = {(): None}  # ball vertex -> index of the entering mark class
    depth = {(): 0}
    darts = {}
    dart_mark = {}
    dart_label = {}
    todo = deque([()])
    while todo:
        s = todo.popleft()
        v = vertex_type[s]
        if depth[s] == r:
            continue
        for k, cl in enumerate(hat_classes[v]):
            if k == incoming[s]:
                continue
            l, q, _ = marks[v][cl[0]]
            u = L.iota(l)
            lb = L.bar(l)
            child = s + (k,)
            vertex_type[child] = u
            depth[child] = depth[s] + 1
            ident = data.Q[u].identity
            entry = next(i for i, cl2 in enumerate(hat_classes[u])
                         if any(marks[u][j][0] == lb and marks[u][j][2] == data.mark(lb) for j in cl2))
            incoming[child] = entry
            up, down = (child, "up"), (child, "down")
            darts[up] = (child, s, down)
            darts[down] = (s, child, up)
            dart_mark[up] = (l, q)
            dart_mark[down] = (lb, ident)
            dart_label[up], dart_label[down] = l, lb
            todo.append(child)
    S = SerreGraph(sorted_ids(vertex_type), darts)
    vs = {s: glue.vertex_pieces[vertex_type[s]].graph for s in S.vertices}
    es = {e: glue.edge_pieces[L.edge_rep(dart_label[e])].graph for e in S.geometric_edges()}
    att = {}
    for e in S.darts:
        l, q = dart_mark[e]
        ep = glue.edge_pieces[L.edge_rep(l)]
        att[e] = _transport(ep, data.attachments[l], glue.vertex_pieces[L.tau(l)], q)
    y = GraphOfSpaces(S, vs, es, att)
    checks = {}
    for s in S.vertices:
        if depth[s] < r:
            for name in ("Gamma", "Gamma2"):
                checks[(s, name)] = _check_vertex(data, glue, S, s, vertex_type[s], dart_mark, name)
    boundary = sorted_ids(s for s in S.vertices if depth[s] == r)
    return HatBall(y, (), r, boundary, vertex_type, dart_mark, checks)


def check_ball_vertex(data: HatCoverData, glue: HatGlue, ball: HatBall, s, lattice: str = "Gamma") -> dict:
    """Fiber-product check at any ball vertex; boundary vertices fail unless
    their partial link already meets every mark orbit."""
    return _check_vertex(data, glue, ball.gos.graph, s, ball.vertex_type[s], ball.dart_mark, lattice)


def twist_attachment(data: HatCoverData, l, alpha: GraphMorphism) -> HatCoverData:
    """Copy of ``data`` with ``phi_l`` replaced by ``phi_l o alpha`` for an
    automorphism ``alpha`` of the edge space (same marks, different gluing)."""
    att = dict(data.attachments)
    att[l] = data.attachments[l].compose(alpha)
    return replace(data, attachments=att, name=data.name + "-twisted")


def _check_vertex(data, glue, S, s, v, dart_mark, name) -> dict:
    """Fiber-product squares at ``s``: for each ``Gamma_v``-orbit of marks,
    the edge pieces of the ball darts entering through that orbit over the
    quotient edge piece, against ``Xhat_v`` over ``X_v/Gamma_v``."""
    G = getattr(data, name)[v]
    marks = _marks_at(data, v)
    classes = _orbit_classes(marks, G)
    cls_of = {marks[i][2]: c for c, cl in enumerate(classes) for i in cl}
    cover = glue.covers[(v, name)]
    low = cover.quotient
    result = {"ok": True, "degree": cover.degree, "witness": None}
    by_class = {}
    for e in S.link(s):
        l, q = dart_mark[e]
        img = _image(q, data.mark(l))
        by_class.setdefault(cls_of[img], []).append((e, l, q, img))
    if sorted(by_class) != list(range(len(classes))):
        return {"ok": False, "degree": cover.degree, "witness": {"reason": "link misses a mark orbit"}}
    Gels = G.sorted_elements()
    for c, entries in sorted(by_class.items()):
        l0, q0, img0 = marks[classes[c][0]]
        Xe = data.edge_space(l0)
        Gc = PermGroup(graph_points(Xe),
                       [restriction(data, l0, k) for k in
                        setwise_stabilizer(PermGroup(G.domain, [q0.inverse() * g * q0 for g in G.generators]),
                                           data.mark(l0)).generators])
        A1 = free_quotient(Xe, Gc)
        f1 = _transport(A1, data.attachments[l0], low, q0)
        parts = {e: glue.edge_pieces[data.quotient.edge_rep(l)].graph for (e, l, q, img) in entries}
        C = disjoint_union(parts)
        p1v, p1d, p2v, p2d = {}, {}, {}, {}
        for (e, l, q, img) in entries:
            gamma = next(g for g in Gels if _image(g, img) == img0)
            k = q0.inverse() * gamma * q
            Fk = restriction(data, l, k)
            up = glue.edge_pieces[data.quotient.edge_rep(l)]
            emb = _transport(up, data.attachments[l], glue.vertex_pieces[v], q)
            for y in up.graph.vertices:
                p1v[(e, y)] = A1.rep_v(Fk(("v", y))[1])
                p2v[(e, y)] = emb.vmap[y]
            for d in up.graph.darts:
                p1d[(e, d)] = A1.rep_d(Fk(("d", d))[1])
                p2d[(e, d)] = emb.dmap[d]
        p1 = GraphMorphism(C, A1.graph, p1v, p1d)
        p2 = GraphMorphism(C, glue.vertex_pieces[v].graph, p2v, p2d)
        rep = is_fiber_product_diagram(p1, p2, f1, cover.map)
        if not rep:
            result = {"ok": False, "degree": cover.degree,
                      "witness": {"mark_class": c, **(rep.witness or {})}}
            break
    return result
