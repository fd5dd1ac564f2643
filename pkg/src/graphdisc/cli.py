"""Command-line front end.

Exit status: 0 on success, 2 for a verified negative answer (no common
cover, a map that is not a covering, a failed hat condition...), 1 for
input and usage errors.  Reports are deterministic JSON: no timings, sorted
keys, ids as strings.
"""
from __future__ import annotations

import argparse
import json
import os
import random
import sys
from dataclasses import dataclass, field

from . import io
from .autgrp import automorphism_action, automorphism_data, vertex_stabilizer_orbit_bound
from .blowup import (blowup_imprimitivity_quotient, collapse_refinement, construct_blowup, normalize_input,
                     refine_tree, verify_blowup, vertex_count_formula)
from .dot import graph_to_dot
from .errors import GraphDiscError, HatConditionViolated, NoCommonCover, NotFree
from .gos import check_gos_covering, deck_group, fiber_product, is_fiber_product_diagram, quotient_gos, total_space
from .graph import (SerreGraph, VertexPartition, barycentric_subdivision, is_covering,
                    quotient_by_partition)
from .hatcover import CONDITIONS, assemble_hat_ball, check_hat_conditions, verify_and_glue_hat
from .ids import id_to_str, sorted_ids
from .imprimitivity import imprimitivity_from_normal, induced_quotient_action
from .leighton import (brute_force_common_cover, common_cover_gos, common_cover_graphs, degree_refinement,
                       joint_refinement, refinement_preserved)
from .permgrp import (DEFAULT_ELEMENT_BOUND, GroupAction, PermGroup, action_kernel, minimal_block_systems,
                      point_stabilizer)

DEFAULT_MAX_DEGREE = 6


class Negative(Exception):
    """A verified negative answer; carries the result to report."""

    def __init__(self, message: str, result: dict | None = None):
        super().__init__(message)
        self.result = result or {}


class UsageError(Exception):
    pass


def jsonable(x):
    """Ids to strings, sets to sorted lists, dict keys to strings."""
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, dict):
        return {id_to_str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, tuple):
        return id_to_str(x)
    if isinstance(x, (set, frozenset)):
        return [jsonable(v) for v in sorted_ids(x)]
    if isinstance(x, list):
        return [jsonable(v) for v in x]
    return str(x)


@dataclass
class Workspace:
    args: argparse.Namespace
    loader: io.Loader
    inputs: list = field(default_factory=list)
    graph_out: tuple | None = None  # (graph, vertex groups, dart groups, title)

    def load(self, path: str, *kinds) -> io.Loaded:
        got = self.loader.load(path)
        if kinds and got.kind not in kinds:
            raise io.InputError(f"{path}: is a {got.kind}, expected {' or '.join(kinds)}")
        self.inputs.append(path)
        return got

    def emit_graph(self, g: SerreGraph, vertex_groups=None, dart_groups=None, title=""):
        self.graph_out = (g, vertex_groups, dart_groups, title)

    def write_out(self, obj: dict):
        if self.args.out:
            io.write_json(obj, self.args.out)


def _graph_summary(g: SerreGraph) -> dict:
    return {"vertices": g.num_vertices(), "edges": g.num_edges(), "connected": g.is_connected(),
            "tree": g.is_tree(), "simple": g.is_simple()}


def _group_summary(G: PermGroup) -> dict:
    return {"order": G.order(), "generators": [io.perm_to_cycles(g) for g in G.generators]}


# ---------------------------------------------------------------------------
# graph


def cmd_graph_validate(ws: Workspace) -> dict:
    got = ws.load(ws.args.file, "serre-graph")
    g = got.obj
    res = _graph_summary(g)
    ws.emit_graph(g, title=os.path.basename(ws.args.file))
    if "map" in got.extra:
        rep = is_covering(got.extra["map"])
        res["map"] = rep.as_dict()
        if not rep:
            raise Negative("map is not a covering", res)
    return res


def cmd_graph_subdivide(ws: Workspace) -> dict:
    g = ws.load(ws.args.file, "serre-graph").obj
    b, sub = barycentric_subdivision(g)
    sg, vn, _ = io.stringify_graph(b)
    groups = {vn[x]: ("midpoint" if sub.is_midpoint(x) else "vertex") for x in b.vertices}
    ws.emit_graph(sg, groups, title="barycentric subdivision")
    ws.write_out(io.graph_to_json(sg))
    return _graph_summary(sg)


def cmd_graph_quotient(ws: Workspace) -> dict:
    g = ws.load(ws.args.file, "serre-graph").obj
    try:
        blocks = json.loads(ws.args.partition)
    except json.JSONDecodeError as ex:
        raise UsageError(f"--partition: {ex.msg}") from None
    if not isinstance(blocks, list) or not all(isinstance(b, list) for b in blocks):
        raise UsageError("--partition must be a JSON list of lists of vertex ids")
    covered = {x for b in blocks for x in b}
    blocks = blocks + [[v] for v in g.vertices if v not in covered]
    p = VertexPartition(blocks)
    q, proj = quotient_by_partition(g, p)
    sq, vn, _ = io.stringify_graph(q)
    ws.emit_graph(sq, title="quotient")
    ws.write_out(io.graph_to_json(sq))
    return {**_graph_summary(sq), "blocks": [sorted_ids(b) for b in p.blocks]}


# ---------------------------------------------------------------------------
# groups


def cmd_group_orbits(ws: Workspace) -> dict:
    got = ws.load(ws.args.file, "perm-group", "group-action")
    if got.kind == "perm-group":
        G = got.obj
        seen, orbs = set(), []
        for x in G.domain.points:
            if x not in seen:
                o = G.orbit(x)
                seen |= o
                orbs.append(sorted_ids(o))
        return {"order": G.order(), "orbits": orbs}
    a = got.obj
    els = a.group.elements()
    vorb, seen = [], set()
    for v in a.graph.vertices:
        if v not in seen:
            o = a.vertex_orbit(v, els)
            seen |= o
            vorb.append(sorted_ids(o))
    eorb, seen = [], set()
    for e in a.graph.geometric_edges():
        if e not in seen:
            o = {a.act_dart(g, e) for g in els}
            o |= {a.graph.bar(d) for d in o}
            seen |= o
            eorb.append(sorted_ids(o))
    ws.emit_graph(a.graph, {v: i for i, o in enumerate(vorb) for v in o}, title="vertex orbits")
    return {"order": a.group.order(), "vertex_orbits": vorb, "dart_orbits": eorb}


def cmd_group_stab(ws: Workspace) -> dict:
    got = ws.load(ws.args.file, "perm-group", "group-action")
    x = ws.args.point
    if got.kind == "perm-group":
        if x not in got.obj.domain:
            raise UsageError(f"--point {x!r} is not a point of the group")
        S = point_stabilizer(got.obj, x)
    else:
        a = got.obj
        if not a.graph.has_vertex(x):
            raise UsageError(f"--point {x!r} is not a vertex of the graph")
        S = a.vertex_stabilizer(x)
    G = got.obj if got.kind == "perm-group" else got.obj.group
    return {"point": x, "stabilizer": _group_summary(S), "index": G.order() // S.order()}


def cmd_group_blocks(ws: Workspace) -> dict:
    G = ws.load(ws.args.file, "perm-group").obj
    systems = minimal_block_systems(G)
    return {"primitive": not systems, "minimal_block_systems": [[sorted_ids(b) for b in p.blocks] for p in systems]}


def cmd_group_kernel(ws: Workspace) -> dict:
    a = ws.load(ws.args.file, "group-action").obj
    K = action_kernel(a)
    return {"kernel": _group_summary(K), "faithful": K.order() == 1}


# ---------------------------------------------------------------------------
# automorphisms


def cmd_aut_group(ws: Workspace) -> dict:
    g = ws.load(ws.args.file, "serre-graph").obj
    d = automorphism_data(g, bound=ws.args.element_bound)
    a = GroupAction.natural(d.group, g)
    ws.write_out(io.action_to_json(a, os.path.relpath(ws.args.file, os.path.dirname(os.path.abspath(ws.args.out)))
                                   if ws.args.out else None))
    return {"order": d.group.order(), "base": d.base, "orbit_sizes": d.orbit_sizes,
            "kernel_order": d.kernel_order, "generators": [io.automorphism_to_json(x) for x in d.group.generators]}


def cmd_aut_orbit_bound(ws: Workspace) -> dict:
    got = ws.load(ws.args.file, "serre-graph", "group-action")
    a = got.obj if got.kind == "group-action" else automorphism_action(got.obj, bound=ws.args.element_bound)
    n, pair = vertex_stabilizer_orbit_bound(a)
    return {"group_order": a.group.order(), "orbit_bound": n, "attained_at": list(pair) if pair else None}


# ---------------------------------------------------------------------------
# imprimitivity


def _normal(ws: Workspace, a: GroupAction) -> PermGroup:
    if not ws.args.normal:
        raise UsageError("--normal GROUP_FILE is required")
    K = ws.load(ws.args.normal, "perm-group").obj
    if K.domain is not a.group.domain:
        raise io.InputError(f"{ws.args.normal}: points differ from the acting group's points")
    return PermGroup(a.group.domain, K.generators, ws.args.element_bound)


def cmd_imprim_from_normal(ws: Workspace) -> dict:
    a = ws.load(ws.args.file, "group-action").obj
    K = _normal(ws, a)
    p = imprimitivity_from_normal(a, K)
    ws.emit_graph(a.graph, {v: p.rep(v) for v in a.graph.vertices}, title="K-orbit blocks")
    return {"blocks": [sorted_ids(b) for b in p.blocks], "K_order": K.order()}


def cmd_imprim_quotient_action(ws: Workspace) -> dict:
    a = ws.load(ws.args.file, "group-action").obj
    K = _normal(ws, a)
    p = imprimitivity_from_normal(a, K)
    q, induced, kernel = induced_quotient_action(a, p)
    sq, _, _ = io.stringify_graph(q)
    ws.emit_graph(sq, title="quotient")
    ws.write_out(io.graph_to_json(sq))
    return {"quotient": _graph_summary(q), "kernel": _group_summary(kernel),
            "kernel_contains_K": K.is_subgroup_of(kernel),
            "quotient_group_order": a.group.order() // kernel.order()}


# ---------------------------------------------------------------------------
# blowups


def _blowup_input(ws: Workspace):
    got = ws.load(ws.args.file, "blowup-input")
    return got.obj, got.extra


def _notes(inp) -> dict:
    out = {}
    for k, v in sorted(inp.notes.items()):
        if k == "S_added":
            out[k] = [{"rep": list(w), "elements": [io.perm_to_cycles(g) for g in gs]}
                      for w, gs in sorted(v.items(), key=lambda kv: (kv[0][0], id_to_str(kv[0][1])))]
        elif k == "F_added":
            out[k] = [io.perm_to_cycles(g) for g in v]
        else:
            out[k] = v
    return out


def cmd_blowup_normalize(ws: Workspace) -> dict:
    raw, _ = _blowup_input(ws)
    inp = normalize_input(raw)
    ws.write_out(io.blowup_input_to_json(inp, ws.loader.cache[ws.args.file].raw["action"]))
    return {"K_order": inp.K.order(), "completions": _notes(inp), "F_size": len(inp.F),
            "S_sizes": {w[0] + ":" + id_to_str(w[1]): len(s) for w, s in inp.S.items()}}


def _verify_result(r) -> dict:
    rep = verify_blowup(r)
    return {"checks": dict(sorted(rep.checks.items())), "witnesses": jsonable(rep.witnesses), "ok": rep.ok}


def _blowup_summary(r) -> dict:
    types = {}
    for e in r.X.geometric_edges():
        types[r.edge_type[e]] = types.get(r.edge_type[e], 0) + 1
    out = {"VX": r.X.num_vertices(), "EX": r.X.num_edges(), "edge_types": dict(sorted(types.items()))}
    if r.K is not None:
        out["formula"] = vertex_count_formula(r)
    return out


def cmd_blowup_construct(ws: Workspace) -> dict:
    raw, _ = _blowup_input(ws)
    r = construct_blowup(normalize_input(raw))
    res = _blowup_summary(r)
    sx, vn, dn = io.stringify_graph(r.X)
    ws.emit_graph(sx, {vn[x]: id_to_str(r.p_vertex[x]) for x in r.X.vertices},
                  {dn[e]: r.edge_type[e] for e in r.X.darts}, title="blowup")
    ws.write_out(io.graph_to_json(sx))
    if ws.args.verify:
        res["verify"] = _verify_result(r)
        if not res["verify"]["ok"]:
            raise Negative("blowup verification failed", res)
    return res


def cmd_blowup_verify(ws: Workspace) -> dict:
    ws.args.verify = True
    return cmd_blowup_construct(ws)


def _family(extra, key, domain_check, where):
    fam = extra.get(key)
    if fam is None:
        return None
    for k in fam:
        if not domain_check(k):
            raise io.InputError(f"{where}.{key}: unknown key {k!r}")
    return fam


def cmd_blowup_refine_tree(ws: Workspace) -> dict:
    raw, extra = _blowup_input(ws)
    T, a = raw.T, raw.action
    Kv = _family(extra, "Kw", T.has_vertex, ws.args.file)
    if Kv is None:
        Kv = {v: PermGroup.trivial(raw.G.domain) for v in T.vertices}
    ref = refine_tree(T, a, Kv)
    collapsed = collapse_refinement(ref)
    st, vn, _ = io.stringify_graph(ref.tree)
    ws.emit_graph(st, {vn[x]: ref.vertex_type[x] for x in ref.tree.vertices}, title="refined tree")
    ws.write_out(io.graph_to_json(st))
    counts = {}
    for t in ref.vertex_type.values():
        counts[t] = counts.get(t, 0) + 1
    same = (sorted_ids(collapsed.vertices) == list(T.vertices) and collapsed.num_edges() == T.num_edges())
    return {"tree": _graph_summary(ref.tree), "vertex_types": dict(sorted(counts.items())),
            "collapse_recovers_tree": same}


def cmd_blowup_quotient(ws: Workspace) -> dict:
    raw, extra = _blowup_input(ws)
    r = construct_blowup(normalize_input(raw))
    Kw = _family(extra, "Kw", r.tree.has_vertex, ws.args.file)
    if Kw is None:
        raise io.InputError(f"{ws.args.file}: blowup quotient needs a \"Kw\" family")
    Ke = _family(extra, "Ke", r.tree.has_dart, ws.args.file)
    qb = blowup_imprimitivity_quotient(r, Kw, Ke)
    z = qb.result
    res = {"before": _blowup_summary(r), "after": _blowup_summary(z), "verify": _verify_result(z),
           "trivial_on_stars": jsonable(dict(qb.trivial_on_stars))}
    sz, vn, dn = io.stringify_graph(z.X)
    ws.emit_graph(sz, {vn[x]: id_to_str(z.p_vertex[x]) for x in z.X.vertices}, title="quotient blowup")
    ws.write_out(io.graph_to_json(sz))
    if not res["verify"]["ok"] or not all(qb.trivial_on_stars.values()):
        raise Negative("quotient blowup fails verification", res)
    return res


# ---------------------------------------------------------------------------
# graphs of spaces


def _gos_with_projection(ws: Workspace):
    got = ws.load(ws.args.file, "graph-of-spaces")
    if "projection" not in got.extra:
        raise io.InputError(f"{ws.args.file}: needs a \"projection\" block")
    return got.obj, got.extra["projection"]


def cmd_gos_total(ws: Workspace) -> dict:
    y = ws.load(ws.args.file, "graph-of-spaces").obj
    ts = total_space(y)
    sg, vn, _ = io.stringify_graph(ts.graph)
    ws.emit_graph(sg, {vn[x]: id_to_str(ts.location[x]) for x in ts.graph.vertices}, title="total space")
    ws.write_out(io.graph_to_json(sg))
    return _graph_summary(ts.graph)


def cmd_gos_check_cover(ws: Workspace) -> dict:
    y, f = _gos_with_projection(ws)
    rep = check_gos_covering(f)
    res = {"covering": rep.as_dict()}
    if not rep:
        raise Negative("not a covering of graphs of spaces", res)
    return res


def cmd_gos_deck(ws: Workspace) -> dict:
    y, f = _gos_with_projection(ws)
    rep = check_gos_covering(f)
    if not rep:
        raise Negative("not a covering of graphs of spaces", {"covering": rep.as_dict()})
    dg = deck_group(f)
    return {"degree": dg.degree, "deck_order": dg.order(), "regular": dg.regular}


def cmd_gos_quotient(ws: Workspace) -> dict:
    y, f = _gos_with_projection(ws)
    dg = deck_group(f)
    q, proj = quotient_gos(y, [a for a in dg.elements if not a.is_identity()])
    ws.write_out(io.gos_to_json(q))
    return {"deck_order": dg.order(), "quotient": _graph_summary(q.graph),
            "projection_covering": check_gos_covering(proj).as_dict()}


def cmd_gos_fiber_product(ws: Workspace) -> dict:
    paths = ws.args.files
    if len(paths) != 2:
        raise UsageError("fiber-product takes two serre-graph files with maps to the same target")
    maps = []
    for p in paths:
        got = ws.load(p, "serre-graph")
        if "map" not in got.extra:
            raise io.InputError(f"{p}: needs a \"map\" block")
        maps.append(got.extra["map"])
    f1, f2 = maps
    if f1.target is not f2.target and io.graph_to_json(f1.target) != io.graph_to_json(f2.target):
        raise io.InputError(f"{paths[1]}: map target differs from that of {paths[0]}")
    f2 = type(f2)(f2.source, f1.target, f2.vmap, f2.dmap)
    fp = fiber_product(f1, f2)
    comps = [{**_graph_summary(c), "pi1": is_covering(p1).as_dict(), "pi2": is_covering(p2).as_dict()}
             for c, p1, p2 in fp.components]
    square = bool(is_fiber_product_diagram(fp.pi1, fp.pi2, f1, f2)) if is_covering(fp.pi1) else None
    sg, vn, _ = io.stringify_graph(fp.graph)
    labels = {}
    for i, (c, _, _) in enumerate(fp.components):
        for v in c.vertices:
            labels[vn[v]] = i
    ws.emit_graph(sg, labels, title="fiber product")
    ws.write_out(io.graph_to_json(sg))
    return {"graph": _graph_summary(fp.graph), "components": comps, "fiber_product_square": square}


# ---------------------------------------------------------------------------
# leighton


def _two_graphs(ws: Workspace):
    if len(ws.args.files) != 2:
        raise UsageError("two serre-graph files are required")
    return [ws.load(p, "serre-graph").obj for p in ws.args.files]


def cmd_leighton_refine(ws: Workspace) -> dict:
    if len(ws.args.files) == 1:
        g = ws.load(ws.args.files[0], "serre-graph").obj
        prof = degree_refinement(g)
        ws.emit_graph(g, prof.class_of(), title="degree refinement")
        return {"classes": [sorted_ids(c) for c in prof.classes], "depth": prof.depth}
    x1, x2 = _two_graphs(ws)
    jr = joint_refinement(x1, x2)
    names = {c: i for i, c in enumerate(sorted_ids(set(jr.classes1) | set(jr.classes2)))}
    rows = [{"class": names[c], "in_first": jr.classes1.get(c, []), "in_second": jr.classes2.get(c, [])}
            for c in sorted_ids(names)]
    res = {"matched": jr.matched, "reason": jr.reason, "classes": rows}
    if not jr.matched:
        raise Negative(f"NoCommonCover: {jr.reason}", res)
    return res


def cmd_leighton_common_cover(ws: Workspace) -> dict:
    x1, x2 = _two_graphs(ws)
    try:
        z, p1, p2 = common_cover_graphs(x1, x2)
    except NoCommonCover as ex:
        raise Negative(f"NoCommonCover: {ex}", {"common_cover": None, "reason": str(ex)}) from None
    r1, r2 = is_covering(p1), is_covering(p2)
    sz, vn, _ = io.stringify_graph(z)
    ws.emit_graph(sz, {vn[v]: id_to_str(p1.vmap[v]) for v in z.vertices}, title="common cover")
    ws.write_out(io.graph_to_json(sz))
    return {"order": z.num_vertices(), "edges": z.num_edges(), "degree_first": r1.degree, "degree_second": r2.degree,
            "verified": bool(r1) and bool(r2),
            "refinement_preserved": refinement_preserved(p1) and refinement_preserved(p2)}


def cmd_leighton_oracle(ws: Workspace) -> dict:
    x1, x2 = _two_graphs(ws)
    res = brute_force_common_cover(x1, x2, max_degree=ws.args.max_degree)
    if res is None:
        raise Negative("no common cover within the search bound",
                       {"common_cover": None, "max_degree": ws.args.max_degree})
    sg, _, _ = io.stringify_graph(res.graph)
    ws.emit_graph(sg, title="minimal common cover")
    ws.write_out(io.graph_to_json(sg))
    return {"order": res.order, "candidates_tested": res.candidates_tested,
            "verified": bool(is_covering(res.p1)) and bool(is_covering(res.p2))}


def cmd_leighton_gos_cover(ws: Workspace) -> dict:
    if len(ws.args.files) != 2:
        raise UsageError("two graph-of-spaces files are required")
    y1, y2 = [ws.load(p, "graph-of-spaces").obj for p in ws.args.files]
    try:
        zy, f1, f2 = common_cover_gos(y1, y2)
    except NoCommonCover as ex:
        raise Negative(f"NoCommonCover: {ex}", {"common_cover": None, "reason": str(ex)}) from None
    ws.write_out(io.gos_to_json(zy))
    ts = total_space(zy)
    sg, _, _ = io.stringify_graph(ts.graph)
    ws.emit_graph(sg, title="common cover total space")
    return {"graph": _graph_summary(zy.graph), "first": check_gos_covering(f1).as_dict(),
            "second": check_gos_covering(f2).as_dict()}


def _hat(ws: Workspace):
    return ws.load(ws.args.file, "hat-cover-data").obj


def cmd_hat_verify(ws: Workspace) -> dict:
    data = _hat(ws)
    conds = check_hat_conditions(data)
    res = {"conditions": conds}
    if any(conds[c] != "pass" for c in CONDITIONS):
        raise Negative("hat conditions fail", res)
    glue = verify_and_glue_hat(data)
    res["covers"] = [{"vertex": id_to_str(v), "lattice": lat, "degree": c.degree, "deck_order": c.deck_order,
                      "index": c.index, "regular": c.regular}
                     for (v, lat), c in sorted(glue.covers.items(), key=lambda kv: (id_to_str(kv[0][0]), kv[0][1]))]
    res["pieces"] = {id_to_str(v): _graph_summary(fq.graph) for v, fq in glue.vertex_pieces.items()}
    return res


def cmd_hat_ball(ws: Workspace) -> dict:
    data = _hat(ws)
    conds = check_hat_conditions(data)
    if any(conds[c] != "pass" for c in CONDITIONS):
        raise Negative("hat conditions fail", {"conditions": conds})
    ball = assemble_hat_ball(data, ws.args.radius, base=ws.args.base)
    ts = total_space(ball.gos)
    sg, vn, _ = io.stringify_graph(ts.graph)
    ws.emit_graph(sg, {vn[x]: id_to_str(ts.location[x]) for x in ts.graph.vertices}, title="ball total space")
    ws.write_out(io.gos_to_json(ball.gos))
    checks = [{"vertex": id_to_str(s), "lattice": lat, "ok": c["ok"], "degree": c.get("degree"),
               "witness": jsonable(c.get("witness"))}
              for (s, lat), c in sorted(ball.checks.items(), key=lambda kv: (id_to_str(kv[0][0]), kv[0][1]))]
    res = {"radius": ball.radius, "vertices": ball.gos.graph.num_vertices(), "boundary": len(ball.boundary),
           "interior_checks": checks, "ok": ball.ok}
    if not ball.ok:
        raise Negative("ball fails the local covering checks", res)
    return res


# ---------------------------------------------------------------------------
# parser and dispatch


COMMANDS = {
    ("graph", "validate"): cmd_graph_validate,
    ("graph", "subdivide"): cmd_graph_subdivide,
    ("graph", "quotient"): cmd_graph_quotient,
    ("group", "orbits"): cmd_group_orbits,
    ("group", "stab"): cmd_group_stab,
    ("group", "blocks"): cmd_group_blocks,
    ("group", "kernel"): cmd_group_kernel,
    ("aut", "group"): cmd_aut_group,
    ("aut", "orbit-bound"): cmd_aut_orbit_bound,
    ("imprim", "from-normal"): cmd_imprim_from_normal,
    ("imprim", "quotient-action"): cmd_imprim_quotient_action,
    ("blowup", "normalize"): cmd_blowup_normalize,
    ("blowup", "construct"): cmd_blowup_construct,
    ("blowup", "verify"): cmd_blowup_verify,
    ("blowup", "refine-tree"): cmd_blowup_refine_tree,
    ("blowup", "quotient"): cmd_blowup_quotient,
    ("gos", "total"): cmd_gos_total,
    ("gos", "check-cover"): cmd_gos_check_cover,
    ("gos", "fiber-product"): cmd_gos_fiber_product,
    ("gos", "quotient"): cmd_gos_quotient,
    ("gos", "deck"): cmd_gos_deck,
    ("leighton", "refine"): cmd_leighton_refine,
    ("leighton", "common-cover"): cmd_leighton_common_cover,
    ("leighton", "oracle"): cmd_leighton_oracle,
    ("leighton", "gos-cover"): cmd_leighton_gos_cover,
    ("hat", "verify"): cmd_hat_verify,
    ("hat", "ball"): cmd_hat_ball,
}

MULTI = {("gos", "fiber-product"), ("leighton", "refine"), ("leighton", "common-cover"), ("leighton", "oracle"),
         ("leighton", "gos-cover")}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--element-bound", type=int, default=DEFAULT_ELEMENT_BOUND,
                   help="maximum enumerated group order (default %(default)s)")
    p.add_argument("--max-degree", type=int, default=DEFAULT_MAX_DEGREE,
                   help="oracle bound: orders up to this multiple of |V1| (default %(default)s)")
    p.add_argument("--seed", type=int, default=0, help="seed for layouts and randomized steps (default 0)")
    p.add_argument("--report", metavar="PATH", help="write the JSON report here")
    p.add_argument("--dot", metavar="PATH", help="write DOT for the graph output")
    p.add_argument("--figure", metavar="PATH", help="render the graph output with matplotlib (png, svg, pdf)")
    p.add_argument("--out", metavar="PATH", help="write the constructed object as JSON")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="graphdisc", description="Finite graph, group-action and covering toolkit.")
    top = parser.add_subparsers(dest="area", required=True, parser_class=_Parser)
    areas = {}
    for area, cmd in COMMANDS:
        if area == "hat":
            continue
        areas.setdefault(area, []).append(cmd)
    subs = {}
    for area, cmds in areas.items():
        ap = top.add_parser(area)
        subs[area] = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    hat = subs["leighton"].add_parser("hat")
    subs["hat"] = hat.add_subparsers(dest="hat_command", required=True, parser_class=_Parser)
    for (area, cmd) in COMMANDS:
        sp = subs[area].add_parser(cmd, parents=[common])
        if (area, cmd) in MULTI:
            sp.add_argument("files", nargs="+", metavar="FILE")
        else:
            sp.add_argument("file", metavar="FILE")
        if (area, cmd) == ("graph", "quotient"):
            sp.add_argument("--partition", required=True, help="JSON list of blocks (lists of vertex ids)")
        if (area, cmd) == ("group", "stab"):
            sp.add_argument("--point", required=True)
        if area == "imprim":
            sp.add_argument("--normal", required=True, metavar="GROUP_FILE")
        if (area, cmd) == ("blowup", "construct"):
            sp.add_argument("--verify", action="store_true")
        if (area, cmd) == ("hat", "ball"):
            sp.add_argument("--radius", type=int, default=1)
            sp.add_argument("--base", default=None, help="quotient vertex at the center (default: least id)")
    return parser


def _key(args) -> tuple:
    if args.area == "leighton" and args.command == "hat":
        return ("hat", args.hat_command)
    return (args.area, args.command)


def _config(args) -> dict:
    skip = {"area", "command", "hat_command", "report", "dot", "figure", "out", "file", "files"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _emit(ws: Workspace, report: dict):
    text = io.dumps(report)
    if ws.args.report:
        with open(ws.args.report, "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text)
    if ws.graph_out is not None:
        g, vg, dg, title = ws.graph_out
        if ws.args.dot:
            with open(ws.args.dot, "w", encoding="utf-8") as fh:
                fh.write(graph_to_dot(g, vertex_groups=vg, dart_groups=dg))
        if ws.args.figure:
            from .plotting import draw_graph
            draw_graph(g, ws.args.figure, vertex_groups=vg, title=title, seed=ws.args.seed)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as ex:
        sys.stderr.write(f"error: {ex}\n")
        return 1
    random.seed(args.seed)
    key = _key(args)
    ws = Workspace(args, io.Loader(args.element_bound))
    report = {"command": " ".join(("leighton",) + key if key[0] == "hat" else key), "config": _config(args)}
    status, code, message = "ok", 0, None
    try:
        result = COMMANDS[key](ws)
    except Negative as ex:
        result, status, code, message = ex.result, "negative", 2, str(ex)
    except (HatConditionViolated, NotFree) as ex:
        result, status, code, message = {}, "negative", 2, f"{type(ex).__name__}: {ex}"
    except (io.InputError, UsageError) as ex:
        result, status, code, message = {}, "error", 1, str(ex)
    except GraphDiscError as ex:
        where = ", ".join(ws.inputs) or "input"
        result, status, code, message = {}, "error", 1, f"{where}: {type(ex).__name__}: {ex}"
    except (OSError, ValueError, KeyError) as ex:
        where = ", ".join(ws.inputs) or "input"
        result, status, code, message = {}, "error", 1, f"{where}: {type(ex).__name__}: {ex}"
    report["inputs"] = [p.replace(os.sep, "/") for p in ws.inputs]
    report["result"] = jsonable(result)
    report["status"] = status
    if message:
        report["message"] = message
    _emit(ws, report)
    if code == 1:
        sys.stderr.write(f"error: {message}\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
