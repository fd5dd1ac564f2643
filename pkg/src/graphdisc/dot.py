"""Graphviz DOT output.  Visualization only; never parsed back."""
from __future__ import annotations

from typing import Mapping

from .graph import SerreGraph
from .ids import id_to_str, sorted_ids

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
           "#bcbd22", "#17becf")


def _q(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _color_index(labels: Mapping) -> dict:
    # palette slot by first appearance in sorted label order
    return {lab: i % len(PALETTE) for i, lab in enumerate(sorted_ids(set(labels.values())))}


def graph_to_dot(g: SerreGraph, vertex_groups: Mapping | None = None, dart_groups: Mapping | None = None,
                 name: str = "G") -> str:
    """Every dart becomes one directed edge, so a geometric edge shows as a
    pair.  ``vertex_groups`` (fiber, block, type...) and ``dart_groups`` are
    rendered as colors and recorded in a ``group`` attribute."""
    lines = [f"digraph {_q(name)} {{", "  node [shape=circle, style=filled, fillcolor=white];"]
    vc = _color_index(vertex_groups) if vertex_groups else {}
    dc = _color_index(dart_groups) if dart_groups else {}
    for v in g.vertices:
        attrs = [f"label={_q(id_to_str(v))}"]
        if vertex_groups and v in vertex_groups:
            lab = vertex_groups[v]
            attrs += [f"fillcolor={_q(PALETTE[vc[lab]])}", f"group={_q(id_to_str(lab))}"]
        lines.append(f"  {_q(id_to_str(v))} [{', '.join(attrs)}];")
    for e in g.darts:
        attrs = [f"id={_q(id_to_str(e))}", f"bar={_q(id_to_str(g.bar(e)))}"]
        if dart_groups and e in dart_groups:
            lab = dart_groups[e]
            attrs += [f"color={_q(PALETTE[dc[lab]])}", f"group={_q(id_to_str(lab))}"]
        lines.append(f"  {_q(id_to_str(g.iota(e)))} -> {_q(id_to_str(g.tau(e)))} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_dot(path: str, g: SerreGraph, **kw) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(graph_to_dot(g, **kw))
