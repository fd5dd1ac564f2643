"""Matplotlib rendering of graph outputs through a networkx layout."""
from __future__ import annotations

from typing import Mapping

from .graph import SerreGraph
from .ids import id_to_str, sorted_ids

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import networkx as nx  # noqa: E402


def to_networkx(g: SerreGraph) -> nx.MultiGraph:
    h = nx.MultiGraph()
    h.add_nodes_from(id_to_str(v) for v in g.vertices)
    for e in g.geometric_edges():
        h.add_edge(id_to_str(g.iota(e)), id_to_str(g.tau(e)), key=id_to_str(e))
    return h


def draw_graph(g: SerreGraph, path: str, vertex_groups: Mapping | None = None, title: str | None = None,
               seed: int = 0) -> None:
    """Spring layout with a fixed seed; vertex colors follow ``vertex_groups``."""
    h = to_networkx(g)
    pos = nx.spring_layout(h, seed=seed)
    colors = "#dddddd"
    if vertex_groups:
        labs = sorted_ids(set(vertex_groups.values()))
        idx = {lab: i for i, lab in enumerate(labs)}
        cmap = plt.get_cmap("tab10")
        colors = [cmap(idx[vertex_groups[v]] % 10) if v in vertex_groups else "#dddddd" for v in g.vertices]
    fig, ax = plt.subplots(figsize=(6, 6))
    nx.draw_networkx_edges(h, pos, ax=ax)
    nx.draw_networkx_nodes(h, pos, nodelist=[id_to_str(v) for v in g.vertices], node_color=colors,
                           node_size=120 if g.num_vertices() > 40 else 300, ax=ax)
    if g.num_vertices() <= 40:
        nx.draw_networkx_labels(h, pos, font_size=7, ax=ax)
    loops = sum(1 for e in g.geometric_edges() if g.iota(e) == g.tau(e))
    if loops:
        ax.text(0.01, 0.01, f"{loops} loop(s) not drawn", transform=ax.transAxes, fontsize=8)
    if title:
        ax.set_title(title)
    ax.set_axis_off()
    meta = {"Date": None} if path.endswith((".svg", ".pdf")) else {}
    fig.savefig(path, metadata=meta or None)
    plt.close(fig)
