"""Named small graphs used by the catalogs, the tests and the CLI."""
from __future__ import annotations

from itertools import combinations

from .graph import SerreGraph, graph_from_edges


def cycle_graph(n: int) -> SerreGraph:
    """n-cycle on vertices 0..n-1 (n=1 is a loop, n=2 a bigon)."""
    return graph_from_edges([(i, (i + 1) % n) for i in range(n)], range(n))


def path_graph(n_edges: int) -> SerreGraph:
    return graph_from_edges([(i, i + 1) for i in range(n_edges)], range(n_edges + 1))


def star_graph(k: int) -> SerreGraph:
    """Center 0 with leaves 1..k."""
    return graph_from_edges([(0, i) for i in range(1, k + 1)], range(k + 1))


def complete_graph(n: int) -> SerreGraph:
    return graph_from_edges(list(combinations(range(n), 2)), range(n))


def complete_bipartite(m: int, n: int) -> SerreGraph:
    left = [("a", i) for i in range(m)]
    right = [("b", j) for j in range(n)]
    return graph_from_edges([(u, v) for u in left for v in right], left + right)


def bouquet(k: int) -> SerreGraph:
    """One vertex with k loops."""
    return graph_from_edges([(0, 0)] * k, [0])


def theta_graph(k: int = 3) -> SerreGraph:
    """Two vertices joined by k parallel edges."""
    return graph_from_edges([(0, 1)] * k, [0, 1])


def single_vertex() -> SerreGraph:
    return SerreGraph([0], {})


def add_leaf_pairs(g: SerreGraph) -> SerreGraph:
    """Attach two pendant leaves ``(v, "leaf", 0)``, ``(v, "leaf", 1)`` at every vertex."""
    vertices = list(g.vertices)
    darts = g.dart_table()
    for v in g.vertices:
        for k in (0, 1):
            leaf = (v, "leaf", k)
            vertices.append(leaf)
            darts[("leaf", v, k, 1)] = (v, leaf, ("leaf", v, k, -1))
            darts[("leaf", v, k, -1)] = (leaf, v, ("leaf", v, k, 1))
    return SerreGraph(vertices, darts)


def decorated_cycle(n: int) -> SerreGraph:
    """n-cycle with a pair of leaves at every vertex."""
    return add_leaf_pairs(cycle_graph(n))


def asymmetric_six() -> SerreGraph:
    """A smallest asymmetric graph: 6 vertices, 6 edges, trivial automorphism group."""
    return graph_from_edges([(0, 2), (1, 2), (1, 3), (1, 4), (2, 4), (3, 5)], range(6))
