"""JSON file formats.

Every file is a UTF-8 JSON object with a ``kind`` field.  Ids are strings,
keys are sorted on output and no floats are written.  Files may reference
other files by a path relative to their own directory.

Kinds and their fields:

``serre-graph``
    ``vertices``; ``darts`` as ``{"id", "bar", "from", "to"}``; optional
    ``map`` = ``{"target": ref, "vertices": {...}, "darts": {...}}`` giving a
    morphism to another graph.
``perm-group``
    ``points``; ``generators`` as lists of cycles.
``group-action``
    ``graph`` (ref or inline), ``group`` (ref or inline) and one
    ``{"vertices", "darts"}`` map per group generator.
``graph-of-spaces``
    ``graph``; ``vertex_spaces``; ``edge_spaces`` keyed by any dart of the
    edge; ``attachments`` per dart; optional ``projection`` = ``{"target": ref,
    "base": maps, "vertex_maps": {...}, "edge_maps": {...}}``.
``blowup-input``
    ``action`` (ref or inline); ``omega0`` as ``[["v", x] | ["e", dart]]``;
    ``K``, optional ``S`` (``[{"rep": w, "elements": [...]}]``), ``F``,
    ``Kw`` and ``Ke`` (generator lists keyed by vertex or dart).
``hat-cover-data``
    ``quotient``, ``vertex_spaces``, ``edge_spaces``, ``attachments`` and
    ``groups`` = ``{v: {"Q", "Gamma", "Gamma2", "Qhat"}}`` whose generators
    are ``{"vertices", "darts"}`` automorphism maps.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Any

from .blowup import BlowupInput
from .errors import GraphDiscError
from .gos import GoSMorphism, GraphOfSpaces
from .graph import GraphMorphism, SerreGraph, validate_graph
from .hatcover import HatCoverData
from .ids import id_to_str, sorted_ids
from .permgrp import (Domain, GroupAction, PermGroup, Permutation, graph_automorphism_perm,
                      split_graph_perm)

KINDS = ("serre-graph", "perm-group", "group-action", "graph-of-spaces", "blowup-input", "hat-cover-data")


class InputError(GraphDiscError):
    """Malformed input, reported with the file and the offending location."""


# ---------------------------------------------------------------------------
# raw json


def load_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except FileNotFoundError:
        raise InputError(f"{path}: file not found") from None
    except json.JSONDecodeError as ex:
        raise InputError(f"{path}:{ex.lineno}:{ex.colno}: {ex.msg}") from None
    if not isinstance(obj, dict) or obj.get("kind") not in KINDS:
        raise InputError(f"{path}: missing or unknown \"kind\" (expected one of {', '.join(KINDS)})")
    return obj


def _no_floats(obj, where="$"):
    if isinstance(obj, float):
        raise ValueError(f"float at {where}")
    if isinstance(obj, dict):
        for k, v in obj.items():
            _no_floats(v, f"{where}.{k}")
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            _no_floats(v, f"{where}[{i}]")


def dumps(obj: Any) -> str:
    _no_floats(obj)
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_json(obj: Any, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj))


class _Names:
    """Injective string names for ids."""

    def __init__(self, ids):
        self.to = {}
        seen = {}
        for x in sorted_ids(ids):
            s = id_to_str(x)
            if s in seen and seen[s] != x:
                raise ValueError(f"ids {seen[s]!r} and {x!r} print the same")
            seen[s] = x
            self.to[x] = s

    def __call__(self, x) -> str:
        return self.to[x]


def _need(obj, key, where):
    if not isinstance(obj, dict) or key not in obj:
        raise InputError(f"{where}: missing field \"{key}\"")
    return obj[key]


def _strs(xs, where):
    if not isinstance(xs, list) or not all(isinstance(x, str) for x in xs):
        raise InputError(f"{where}: expected a list of strings")
    return xs


# ---------------------------------------------------------------------------
# graphs and morphisms


def graph_to_json(g: SerreGraph) -> dict:
    vn, dn = _Names(g.vertices), _Names(g.darts)
    return {
        "kind": "serre-graph",
        "vertices": [vn(v) for v in g.vertices],
        "darts": [{"id": dn(e), "bar": dn(g.bar(e)), "from": vn(g.iota(e)), "to": vn(g.tau(e))}
                  for e in g.darts],
    }


def stringify_graph(g: SerreGraph):
    """Copy of ``g`` with string ids plus the renaming maps."""
    vn, dn = _Names(g.vertices), _Names(g.darts)
    h = SerreGraph([vn(v) for v in g.vertices],
                   {dn(e): (vn(g.iota(e)), vn(g.tau(e)), dn(g.bar(e))) for e in g.darts})
    return h, vn.to, dn.to


def graph_from_json(obj: dict, where: str) -> SerreGraph:
    _strs(_need(obj, "vertices", where), f"{where}.vertices")
    darts = _need(obj, "darts", where)
    if not isinstance(darts, list):
        raise InputError(f"{where}.darts: expected a list")
    for i, d in enumerate(darts):
        for k in ("id", "bar", "from", "to"):
            if not isinstance(_need(d, k, f"{where}.darts[{i}]"), str):
                raise InputError(f"{where}.darts[{i}].{k}: expected a string")
    try:
        return validate_graph(obj)
    except GraphDiscError as ex:
        raise InputError(f"{where}: {ex}") from None


def maps_to_json(vmap: dict, dmap: dict) -> dict:
    return {"vertices": {id_to_str(k): id_to_str(v) for k, v in vmap.items()},
            "darts": {id_to_str(k): id_to_str(v) for k, v in dmap.items()}}


def morphism_to_json(f: GraphMorphism, target_ref: str | None = None) -> dict:
    out = maps_to_json(f.vmap, f.dmap)
    if target_ref is not None:
        out["target"] = target_ref
    return out


def morphism_from_json(obj: dict, src: SerreGraph, tgt: SerreGraph, where: str) -> GraphMorphism:
    vm, dm = _need(obj, "vertices", where), _need(obj, "darts", where)
    try:
        return GraphMorphism(src, tgt, dict(vm), dict(dm))
    except (GraphDiscError, KeyError) as ex:
        raise InputError(f"{where}: not a graph morphism ({ex})") from None


# ---------------------------------------------------------------------------
# groups


def perm_to_cycles(p: Permutation) -> list:
    return [[id_to_str(x) for x in c] for c in p.cycles()]


def group_to_json(G: PermGroup) -> dict:
    return {"kind": "perm-group", "points": [id_to_str(x) for x in G.domain.points],
            "generators": [perm_to_cycles(g) for g in G.generators]}


def perm_from_cycles(cycles, domain: Domain, where: str) -> Permutation:
    if not isinstance(cycles, list):
        raise InputError(f"{where}: expected a list of cycles")
    try:
        return Permutation.from_cycles([tuple(c) for c in cycles], domain)
    except (ValueError, KeyError) as ex:
        raise InputError(f"{where}: bad cycles ({ex})") from None


def group_from_json(obj: dict, where: str, bound: int | None = None) -> PermGroup:
    pts = _strs(_need(obj, "points", where), f"{where}.points")
    d = Domain(pts)
    gens = [perm_from_cycles(c, d, f"{where}.generators[{i}]")
            for i, c in enumerate(_need(obj, "generators", where))]
    return PermGroup(d, gens) if bound is None else PermGroup(d, gens, bound)


def automorphism_to_json(p: Permutation) -> dict:
    vm, dm = split_graph_perm(p)
    return maps_to_json({k: v for k, v in vm.items() if k != v}, {k: v for k, v in dm.items() if k != v})


def automorphism_from_json(obj: dict, g: SerreGraph, where: str) -> Permutation:
    try:
        return graph_automorphism_perm(g, dict(_need(obj, "vertices", where)), dict(_need(obj, "darts", where)))
    except GraphDiscError as ex:
        raise InputError(f"{where}: {ex}") from None


def graph_group_to_json(G: PermGroup) -> list:
    return [automorphism_to_json(g) for g in G.generators]


def graph_group_from_json(gens, g: SerreGraph, where: str, bound: int | None = None) -> PermGroup:
    from .permgrp import graph_points
    ps = [automorphism_from_json(x, g, f"{where}[{i}]") for i, x in enumerate(gens)]
    return PermGroup(graph_points(g), ps) if bound is None else PermGroup(graph_points(g), ps, bound)


# ---------------------------------------------------------------------------
# loading with references


@dataclass
class Loaded:
    kind: str
    path: str
    obj: Any
    raw: dict
    extra: dict


class Loader:
    def __init__(self, element_bound: int | None = None):
        self.bound = element_bound
        self.cache = {}

    def _resolve(self, ref, base: str, where: str, kind: str):
        """Inline object or a path relative to ``base``."""
        if isinstance(ref, str):
            path = os.path.normpath(os.path.join(os.path.dirname(base), ref))
            got = self.load(path)
            if got.kind != kind:
                raise InputError(f"{where}: {ref} is a {got.kind}, expected {kind}")
            return got
        if isinstance(ref, dict):
            raw = dict(ref)
            raw.setdefault("kind", kind)
            return self._build(raw, base, where)
        raise InputError(f"{where}: expected a path or an inline {kind}")

    def load(self, path: str) -> Loaded:
        if path in self.cache:
            return self.cache[path]
        raw = load_json(path)
        got = self._build(raw, path, path)
        self.cache[path] = got
        return got

    def _build(self, raw: dict, path: str, where: str) -> Loaded:
        kind = raw.get("kind")
        extra = {}
        if kind == "serre-graph":
            obj = graph_from_json(raw, where)
            if "map" in raw:
                m = raw["map"]
                tgt = self._resolve(_need(m, "target", f"{where}.map"), path, f"{where}.map.target",
                                    "serre-graph")
                extra["map"] = morphism_from_json(m, obj, tgt.obj, f"{where}.map")
        elif kind == "perm-group":
            obj = group_from_json(raw, where, self.bound)
        elif kind == "group-action":
            g = self._resolve(_need(raw, "graph", where), path, f"{where}.graph", "serre-graph").obj
            G = self._resolve(_need(raw, "group", where), path, f"{where}.group", "perm-group").obj
            gens = _need(raw, "generators", where)
            if not isinstance(gens, list) or len(gens) != len(G.generators):
                raise InputError(f"{where}.generators: need one map per group generator ({len(G.generators)})")
            imgs = [automorphism_from_json(x, g, f"{where}.generators[{i}]") for i, x in enumerate(gens)]
            try:
                obj = GroupAction(G, g, imgs)
            except GraphDiscError as ex:
                raise InputError(f"{where}: {ex}") from None
        elif kind == "graph-of-spaces":
            obj = self._gos(raw, path, where)
            if "projection" in raw:
                extra["projection"] = self._projection(raw["projection"], obj, path, f"{where}.projection")
        elif kind == "blowup-input":
            obj, extra = self._blowup(raw, path, where)
        elif kind == "hat-cover-data":
            obj = self._hat(raw, path, where)
        else:
            raise InputError(f"{where}: unknown kind {kind!r}")
        return Loaded(kind, path, obj, raw, extra)

    def _pieces(self, raw, path, where, G: SerreGraph):
        vsr = _need(raw, "vertex_spaces", where)
        vs = {}
        for v in G.vertices:
            vs[v] = self._resolve(_need(vsr, v, f"{where}.vertex_spaces"), path,
                                  f"{where}.vertex_spaces.{v}", "serre-graph").obj
        esr = _need(raw, "edge_spaces", where)
        es = {}
        for k, ref in esr.items():
            if not G.has_dart(k):
                raise InputError(f"{where}.edge_spaces.{k}: not a dart of the graph")
            es[G.edge_rep(k)] = self._resolve(ref, path, f"{where}.edge_spaces.{k}", "serre-graph").obj
        missing = [e for e in G.geometric_edges() if e not in es]
        if missing:
            raise InputError(f"{where}.edge_spaces: no space for edge {missing[0]!r}")
        atr = _need(raw, "attachments", where)
        att = {}
        for e in G.darts:
            att[e] = morphism_from_json(_need(atr, e, f"{where}.attachments"), es[G.edge_rep(e)],
                                        vs[G.tau(e)], f"{where}.attachments.{e}")
        return vs, es, att

    def _gos(self, raw, path, where) -> GraphOfSpaces:
        G = self._resolve(_need(raw, "graph", where), path, f"{where}.graph", "serre-graph").obj
        vs, es, att = self._pieces(raw, path, where, G)
        try:
            return GraphOfSpaces(G, vs, es, att)
        except GraphDiscError as ex:
            raise InputError(f"{where}: {ex}") from None

    def _projection(self, raw, src: GraphOfSpaces, path, where) -> GoSMorphism:
        tgt = self._resolve(_need(raw, "target", where), path, f"{where}.target", "graph-of-spaces").obj
        base = morphism_from_json(_need(raw, "base", where), src.graph, tgt.graph, f"{where}.base")
        vmr = _need(raw, "vertex_maps", where)
        vmaps = {v: morphism_from_json(_need(vmr, v, f"{where}.vertex_maps"), src.vertex_space(v),
                                       tgt.vertex_space(base.vmap[v]), f"{where}.vertex_maps.{v}")
                 for v in src.graph.vertices}
        emr = _need(raw, "edge_maps", where)
        emaps = {}
        for e in src.graph.geometric_edges():
            key = e if e in emr else src.graph.bar(e)
            emaps[e] = morphism_from_json(_need(emr, key, f"{where}.edge_maps"), src.edge_space(e),
                                          tgt.edge_space(base.dmap[e]), f"{where}.edge_maps.{key}")
        try:
            return GoSMorphism(src, tgt, base, vmaps, emaps)
        except GraphDiscError as ex:
            raise InputError(f"{where}: {ex}") from None

    def _blowup(self, raw, path, where):
        a = self._resolve(_need(raw, "action", where), path, f"{where}.action", "group-action").obj
        d = a.group.domain

        def perms(xs, w):
            return [perm_from_cycles(c, d, f"{w}[{i}]") for i, c in enumerate(xs)]

        omega = []
        for i, w in enumerate(_need(raw, "omega0", where)):
            if not (isinstance(w, list) and len(w) == 2 and w[0] in ("v", "e")):
                raise InputError(f"{where}.omega0[{i}]: expected [\"v\", vertex] or [\"e\", dart]")
            omega.append((w[0], w[1]))
        K = PermGroup(d, perms(raw.get("K", []), f"{where}.K"))
        S = {}
        for i, s in enumerate(raw.get("S", [])):
            rep = _need(s, "rep", f"{where}.S[{i}]")
            S[(rep[0], rep[1])] = perms(_need(s, "elements", f"{where}.S[{i}]"), f"{where}.S[{i}].elements")
        F = perms(raw.get("F", []), f"{where}.F")
        extra = {}
        if "Kw" in raw:
            extra["Kw"] = {v: PermGroup(d, perms(g, f"{where}.Kw.{v}")) for v, g in raw["Kw"].items()}
        if "Ke" in raw:
            extra["Ke"] = {e: PermGroup(d, perms(g, f"{where}.Ke.{e}")) for e, g in raw["Ke"].items()}
        return BlowupInput(a.group, a.graph, a, omega, K, S, F), extra

    def _hat(self, raw, path, where) -> HatCoverData:
        L = self._resolve(_need(raw, "quotient", where), path, f"{where}.quotient", "serre-graph").obj
        vs, es, att = self._pieces(raw, path, where, L)
        groups = _need(raw, "groups", where)
        out = {k: {} for k in ("Q", "Gamma", "Gamma2", "Qhat")}
        for v in L.vertices:
            gv = _need(groups, v, f"{where}.groups")
            for k in out:
                out[k][v] = graph_group_from_json(_need(gv, k, f"{where}.groups.{v}"), vs[v],
                                                  f"{where}.groups.{v}.{k}", self.bound)
        return HatCoverData(L, vs, es, att, out["Q"], out["Gamma"], out["Gamma2"], out["Qhat"],
                            raw.get("name", ""))


# ---------------------------------------------------------------------------
# writers for composite kinds (inline sub-objects)


def gos_to_json(y: GraphOfSpaces) -> dict:
    G = y.graph
    return {
        "kind": "graph-of-spaces",
        "graph": graph_to_json(G),
        "vertex_spaces": {id_to_str(v): graph_to_json(y.vertex_space(v)) for v in G.vertices},
        "edge_spaces": {id_to_str(e): graph_to_json(y.edge_space(e)) for e in G.geometric_edges()},
        "attachments": {id_to_str(e): morphism_to_json(y.attachment(e)) for e in G.darts},
    }


def action_to_json(a: GroupAction, graph_ref: str | dict | None = None) -> dict:
    return {
        "kind": "group-action",
        "graph": graph_ref if graph_ref is not None else graph_to_json(a.graph),
        "group": group_to_json(a.group),
        "generators": [automorphism_to_json(a.image(g)) for g in a.group.generators],
    }


def blowup_input_to_json(inp: BlowupInput, action_ref: str | dict | None = None) -> dict:
    out = {
        "kind": "blowup-input",
        "action": action_ref if action_ref is not None else action_to_json(inp.action),
        "omega0": [[k, id_to_str(x)] for k, x in inp.omega0],
        "K": [perm_to_cycles(g) for g in inp.K.generators],
    }
    if inp.S:
        out["S"] = [{"rep": [w[0], id_to_str(w[1])], "elements": [perm_to_cycles(g) for g in els]}
                    for w, els in sorted(inp.S.items(), key=lambda kv: (kv[0][0], id_to_str(kv[0][1])))]
    if inp.F:
        out["F"] = [perm_to_cycles(g) for g in inp.F]
    return out


def hat_to_json(d: HatCoverData) -> dict:
    L = d.quotient
    return {
        "kind": "hat-cover-data",
        "name": d.name,
        "quotient": graph_to_json(L),
        "vertex_spaces": {id_to_str(v): graph_to_json(d.vertex_spaces[v]) for v in L.vertices},
        "edge_spaces": {id_to_str(e): graph_to_json(d.edge_spaces[e]) for e in L.geometric_edges()},
        "attachments": {id_to_str(e): morphism_to_json(d.attachments[e]) for e in L.darts},
        "groups": {id_to_str(v): {k: graph_group_to_json(getattr(d, k)[v])
                                  for k in ("Q", "Gamma", "Gamma2", "Qhat")} for v in L.vertices},
    }


def gos_morphism_to_json(f: GoSMorphism, target_ref: str | dict) -> dict:
    """``projection`` block for the source file of ``f``."""
    S = f.source
    return {
        "target": target_ref,
        "base": maps_to_json(f.base.vmap, f.base.dmap),
        "vertex_maps": {id_to_str(v): maps_to_json(f.vertex_maps[v].vmap, f.vertex_maps[v].dmap)
                        for v in S.graph.vertices},
        "edge_maps": {id_to_str(r): maps_to_json(f.edge_maps[r].vmap, f.edge_maps[r].dmap)
                      for r in S.graph.geometric_edges()},
    }
