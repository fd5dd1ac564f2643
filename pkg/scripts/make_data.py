"""Regenerate the sample inputs under data/.  Output is deterministic."""
from __future__ import annotations

import os
import sys

from graphdisc import io
from graphdisc.blowup import BlowupInput
from graphdisc.builders import (bouquet, complete_bipartite, complete_graph, cycle_graph, path_graph,
                                single_vertex, star_graph)
from graphdisc.catalog import blowup_catalog, decorated_cycle_action, hat_instances
from graphdisc.gos import GraphOfSpaces, gos_voltage_cover
from graphdisc.graph import GraphMorphism, SerreGraph
from graphdisc.permgrp import PermGroup
from graphdisc.voltage import voltage_cover

OUT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "data")


def put(name: str, obj: dict) -> None:
    io.write_json(obj, os.path.join(OUT, name))


def graph_with_map(cover: SerreGraph, f: GraphMorphism, target: str) -> dict:
    out = io.graph_to_json(cover)
    out["map"] = io.morphism_to_json(f, target)
    return out


def main() -> int:
    os.makedirs(OUT, exist_ok=True)
    put("loop.json", {"kind": "serre-graph", "vertices": ["x"],
                      "darts": [{"id": "a", "bar": "A", "from": "x", "to": "x"},
                                {"id": "A", "bar": "a", "from": "x", "to": "x"}]})
    for name, g in [("cycle3", cycle_graph(3)), ("star3", star_graph(3)), ("cycle4", cycle_graph(4)),
                    ("cycle6", cycle_graph(6)), ("k4", complete_graph(4)), ("k33", complete_bipartite(3, 3)),
                    ("bouquet2", bouquet(2))]:
        put(f"{name}.json", io.graph_to_json(g))

    c3 = cycle_graph(3)
    e0 = c3.geometric_edges()[0]
    hexa, f = voltage_cover(c3, 2, {e0: (1, 0)})
    put("cycle6_over_cycle3.json", graph_with_map(hexa, f, "cycle3.json"))
    two, g = voltage_cover(c3, 2, {})
    put("two_triangles_over_cycle3.json", graph_with_map(two, g, "cycle3.json"))
    # vertex map folds the path onto the triangle; not locally bijective at the ends
    p = path_graph(3)
    vm = {0: 0, 1: 1, 2: 2, 3: 0}
    dm = {}
    for e in p.darts:
        a, b = vm[p.iota(e)], vm[p.tau(e)]
        dm[e] = next(d for d in c3.darts if c3.iota(d) == a and c3.tau(d) == b)
    put("path_over_cycle3.json", graph_with_map(p, GraphMorphism(p, c3, vm, dm), "cycle3.json"))

    cat = blowup_catalog()
    for name in ("sym3-edge", "z2-inversion", "sym3-star"):
        inp = cat[name]
        a = inp.action
        put(f"{name}-tree.json", io.graph_to_json(a.graph))
        put(f"{name}-group.json", io.group_to_json(a.group))
        act = io.action_to_json(a, f"{name}-tree.json")
        act["group"] = f"{name}-group.json"
        put(f"{name}-action.json", act)
        put(f"{name}-blowup.json", io.blowup_input_to_json(inp, f"{name}-action.json"))
    # central subgroups for the imprimitivity quotient: the whole stabilizers
    inp = cat["sym3-edge"]
    kw = io.blowup_input_to_json(inp, "sym3-edge-action.json")
    kw["Kw"] = {v: [io.perm_to_cycles(g) for g in inp.G.generators] for v in ("u", "v")}
    put("sym3-edge-blowup-kw.json", kw)

    a, K = decorated_cycle_action(4)
    put("decorated-cycle4.json", io.graph_to_json(a.graph))
    put("decorated-cycle4-group.json", io.group_to_json(a.group))
    act = io.action_to_json(a, "decorated-cycle4.json")
    act["group"] = "decorated-cycle4-group.json"
    put("decorated-cycle4-action.json", act)
    put("decorated-cycle4-leafswaps.json", io.group_to_json(PermGroup(a.group.domain, K.generators)))

    L = bouquet(2)
    X = path_graph(5)
    pt = single_vertex()

    def at(x):
        return GraphMorphism(pt, X, {0: x}, {})
    y = GraphOfSpaces(L, {0: X}, {r: pt for r in L.geometric_edges()},
                      {(0, 1): at(0), (0, -1): at(1), (1, 1): at(3), (1, -1): at(4)})
    put("gos-base.json", io.gos_to_json(y))
    y1, f1 = gos_voltage_cover(y, 2, {(0, 1): (1, 0)})
    y2, f2 = gos_voltage_cover(y, 3, {(0, 1): (1, 2, 0), (1, 1): (0, 2, 1)})
    for name, yy, ff in (("gos-cover2.json", y1, f1), ("gos-cover3.json", y2, f2)):
        out = io.gos_to_json(yy)
        out["projection"] = io.gos_morphism_to_json(ff, "gos-base.json")
        put(name, out)

    for name, d in hat_instances().items():
        put(f"hat-{name}.json", io.hat_to_json(d))
    return 0


if __name__ == "__main__":
    sys.exit(main())
