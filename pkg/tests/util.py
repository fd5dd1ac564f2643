"""Shared constructions for the test modules."""
from __future__ import annotations

import random

import networkx as nx

from graphdisc.builders import bouquet, path_graph, single_vertex
from graphdisc.gos import GraphOfSpaces
from graphdisc.graph import GraphMorphism, SerreGraph


def to_nx(g: SerreGraph) -> nx.MultiGraph:
    h = nx.MultiGraph()
    h.add_nodes_from(g.vertices)
    for e in g.geometric_edges():
        h.add_edge(g.iota(e), g.tau(e))
    return h


def walk_map(g: SerreGraph, k: int, rng: random.Random) -> GraphMorphism:
    """A path of length k mapped along a random walk (usually not a covering)."""
    p = path_graph(k)
    v = rng.choice(g.vertices)
    vm, dm = {0: v}, {}
    for i in range(k):
        e = rng.choice(g.out_darts(v))
        dm[(i, 1)], dm[(i, -1)] = e, g.bar(e)
        v = g.tau(e)
        vm[i + 1] = v
    return GraphMorphism(p, g, vm, dm)


def gos_base() -> GraphOfSpaces:
    """Two loops at one vertex whose space is a path on six vertices; point
    edge spaces attached at 0, 1, 3 and 4."""
    L = bouquet(2)
    X = path_graph(5)
    pt = single_vertex()

    def at(x):
        return GraphMorphism(pt, X, {0: x}, {})
    return GraphOfSpaces(L, {0: X}, {r: pt for r in L.geometric_edges()},
                         {(0, 1): at(0), (0, -1): at(1), (1, 1): at(3), (1, -1): at(4)})


def restricted_maps(data, l) -> set:
    """Vertex maps of the edge piece induced by the elements of Qhat that
    preserve the mark of dart l; computed directly on vertex images."""
    phi = data.attachments[l]
    img = set(phi.vmap.values())
    back = {x: a for a, x in phi.vmap.items()}
    out = set()
    for q in data.Qhat[data.quotient.tau(l)].elements():
        m = {x: q(("v", x))[1] for x in img}
        if set(m.values()) == img:
            out.add(tuple(sorted((a, back[m[phi.vmap[a]]]) for a in phi.vmap)))
    return out


def glues(data) -> bool:
    L = data.quotient
    return all(restricted_maps(data, e) == restricted_maps(data, L.bar(e)) for e in L.geometric_edges())
