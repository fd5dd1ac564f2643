"""Permutation-voltage covers and random instances for testing.

A voltage is a tuple ``s`` with ``s[i]`` the image of sheet ``i``.  The cover
of ``g`` has vertices ``(v, i)`` and darts ``(e, i)`` running from
``(iota e, i)`` to ``(tau e, s_e[i])``; the voltage of ``bar e`` is the
inverse of the voltage of ``e``.
"""
from __future__ import annotations

import random
from collections import deque
from typing import Mapping

from .graph import GraphMorphism, SerreGraph, graph_from_edges
from .ids import sorted_ids


def identity_perm(n: int) -> tuple:
    return tuple(range(n))


def inverse_perm(s) -> tuple:
    inv = [0] * len(s)
    for i, j in enumerate(s):
        inv[j] = i
    return tuple(inv)


def compose_perm(s, t) -> tuple:
    """``s o t``."""
    return tuple(s[j] for j in t)


def complete_voltages(g: SerreGraph, n: int, voltages: Mapping) -> dict:
    """Voltages on every dart; unspecified pairs get the identity."""
    out = {}
    for e, s in voltages.items():
        s = tuple(s)
        if sorted(s) != list(range(n)):
            raise ValueError(f"voltage on {e!r} is not a permutation of {n} sheets")
        b = g.bar(e)
        if b in voltages and tuple(voltages[b]) != inverse_perm(s):
            raise ValueError(f"voltages on {e!r} and its bar are not inverse")
        out[e] = s
        out[b] = inverse_perm(s)
    for e in g.darts:
        out.setdefault(e, identity_perm(n))
    return out


def voltage_cover(g: SerreGraph, n: int, voltages: Mapping) -> tuple[SerreGraph, GraphMorphism]:
    vol = complete_voltages(g, n, voltages)
    vertices = [(v, i) for v in g.vertices for i in range(n)]
    darts = {}
    for e in g.darts:
        s = vol[e]
        for i in range(n):
            darts[(e, i)] = ((g.iota(e), i), (g.tau(e), s[i]), (g.bar(e), s[i]))
    cover = SerreGraph(vertices, darts)
    f = GraphMorphism(cover, g, {x: x[0] for x in vertices}, {d: d[0] for d in darts}, check=False)
    return cover, f


def spanning_tree_darts(g: SerreGraph) -> set:
    """Darts (both orientations) of a BFS spanning forest."""
    seen = set()
    tree = set()
    for root in g.vertices:
        if root in seen:
            continue
        seen.add(root)
        todo = deque([root])
        while todo:
            x = todo.popleft()
            for e in g.out_darts(x):
                y = g.tau(e)
                if y not in seen:
                    seen.add(y)
                    tree.add(e)
                    tree.add(g.bar(e))
                    todo.append(y)
    return tree


def cotree_edges(g: SerreGraph) -> list:
    tree = spanning_tree_darts(g)
    return [e for e in g.geometric_edges() if e not in tree]


def random_perm(n: int, rng: random.Random) -> tuple:
    s = list(range(n))
    rng.shuffle(s)
    return tuple(s)


def random_voltages(g: SerreGraph, n: int, rng: random.Random) -> dict:
    return {e: random_perm(n, rng) for e in cotree_edges(g)}


def random_connected_graph(rng: random.Random, max_vertices: int = 6, max_degree: int = 4,
                           extra: int | None = None, simple: bool = False) -> SerreGraph:
    """Random connected multigraph: a random tree plus extra edges (loops and
    parallel edges allowed unless ``simple``), respecting ``max_degree``."""
    n = rng.randint(1, max_vertices)
    deg = [0] * n
    edges = []
    for v in range(1, n):
        choices = [u for u in range(v) if deg[u] < max_degree]
        u = rng.choice(choices) if choices else rng.randrange(v)
        edges.append((u, v))
        deg[u] += 1
        deg[v] += 1
    if extra is None:
        extra = rng.randint(1, max(1, n))
    present = {frozenset(e) for e in edges}
    for _ in range(extra):
        u, v = rng.randrange(n), rng.randrange(n)
        need = 2 if u == v else 1
        if deg[u] + need > max_degree or deg[v] + (0 if u == v else 1) > max_degree:
            continue
        if simple and (u == v or frozenset((u, v)) in present):
            continue
        edges.append((u, v))
        present.add(frozenset((u, v)))
        deg[u] += 1
        deg[v] += 1
    return graph_from_edges(edges, range(n))


def random_connected_cover(g: SerreGraph, n: int, rng: random.Random, tries: int = 50):
    """A connected voltage cover of degree ``n`` (falls back to a cyclic
    voltage on one cotree edge when random draws stay disconnected)."""
    for _ in range(tries):
        cover, f = voltage_cover(g, n, random_voltages(g, n, rng))
        if cover.is_connected():
            return cover, f
    edges = cotree_edges(g)
    if not edges and n > 1:
        raise ValueError("a tree has no connected covers of degree > 1")
    cyc = tuple((i + 1) % n for i in range(n))
    cover, f = voltage_cover(g, n, {edges[0]: cyc} if edges else {})
    return cover, f


def perturb_covering(f: GraphMorphism, rng: random.Random) -> GraphMorphism:
    """A morphism that fails local bijectivity: either one geometric edge is
    deleted from the source, or a parallel copy of one is added."""
    s = f.source
    table = s.dart_table()
    reps = s.geometric_edges()
    e = rng.choice(reps)
    be = s.bar(e)
    vmap = dict(f.vmap)
    if rng.random() < 0.5:
        del table[e]
        del table[be]
        dmap = {d: x for d, x in f.dmap.items() if d not in (e, be)}
    else:
        table[("extra", 1)] = (s.iota(e), s.tau(e), ("extra", -1))
        table[("extra", -1)] = (s.tau(e), s.iota(e), ("extra", 1))
        dmap = dict(f.dmap)
        dmap[("extra", 1)] = f.dmap[e]
        dmap[("extra", -1)] = f.dmap[be]
    src = SerreGraph(s.vertices, table)
    return GraphMorphism(src, f.target, vmap, dmap)


def sheets_of(f: GraphMorphism, v) -> list:
    return sorted_ids(x for x, y in f.vmap.items() if y == v)
