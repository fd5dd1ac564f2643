"""Finite Serre graphs, morphisms, subdivision, partition quotients and
small-loop 2-complexes with integral first homology.

A Serre graph is given by darts (oriented edges) together with a fixed-point
free involution ``bar`` and endpoint maps ``iota`` (initial vertex) and
``tau`` (terminal vertex) with ``tau(bar(e)) == iota(e)``.  Geometric edges
are the ``bar``-orbits and are never stored separately.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Any, Hashable, Iterable, Mapping

from .errors import (
    DanglingReference,
    FixedPointInvolution,
    InvalidGraph,
    InvalidMorphism,
    NonInvolutiveBar,
    PartitionMismatch,
)
from .ids import idkey, min_id, sorted_ids

Id = Hashable


class SerreGraph:
    """Immutable finite graph in Serre form.

    ``darts`` maps each dart id to ``(iota, tau, bar)``.
    """

    __slots__ = ("_vertices", "_vset", "_darts", "_iota", "_tau", "_bar", "_out", "_in")

    def __init__(self, vertices: Iterable[Id], darts: Mapping[Id, tuple]):
        vs = sorted_ids(set(vertices))
        self._vertices = tuple(vs)
        self._vset = frozenset(vs)
        self._darts = tuple(sorted_ids(darts))
        self._iota = {}
        self._tau = {}
        self._bar = {}
        for e in self._darts:
            i, t, b = darts[e]
            self._iota[e] = i
            self._tau[e] = t
            self._bar[e] = b
        self._check()
        out = {v: [] for v in self._vertices}
        inn = {v: [] for v in self._vertices}
        for e in self._darts:
            out[self._iota[e]].append(e)
            inn[self._tau[e]].append(e)
        self._out = {v: tuple(ds) for v, ds in out.items()}
        self._in = {v: tuple(ds) for v, ds in inn.items()}

    def _check(self):
        for e in self._darts:
            b = self._bar[e]
            if self._iota[e] not in self._vset or self._tau[e] not in self._vset:
                raise DanglingReference(f"dart {e!r} has an endpoint outside the vertex set")
            if b not in self._bar:
                raise DanglingReference(f"bar of dart {e!r} is unknown dart {b!r}")
            if b == e:
                raise FixedPointInvolution(f"dart {e!r} is its own bar")
            if self._bar[b] != e:
                raise NonInvolutiveBar(f"bar(bar({e!r})) = {self._bar[b]!r}")
            if self._tau[b] != self._iota[e]:
                raise InvalidGraph(f"tau(bar({e!r})) != iota({e!r})")

    # -- accessors -----------------------------------------------------
    @property
    def vertices(self) -> tuple:
        return self._vertices

    @property
    def darts(self) -> tuple:
        return self._darts

    def iota(self, e):
        return self._iota[e]

    def tau(self, e):
        return self._tau[e]

    def bar(self, e):
        return self._bar[e]

    def has_vertex(self, v) -> bool:
        return v in self._vset

    def has_dart(self, e) -> bool:
        return e in self._bar

    def link(self, v) -> tuple:
        """Darts terminating at ``v``."""
        return self._in[v]

    def out_darts(self, v) -> tuple:
        return self._out[v]

    def degree(self, v) -> int:
        return len(self._in[v])

    def neighbors(self, v) -> list:
        return [self._tau[e] for e in self._out[v]]

    def dart_triple(self, e) -> tuple:
        return (self._iota[e], self._tau[e], self._bar[e])

    def dart_table(self) -> dict:
        return {e: self.dart_triple(e) for e in self._darts}

    def geometric_edges(self) -> list:
        """One canonical dart (the smaller id) per bar-pair."""
        return [e for e in self._darts if idkey(e) <= idkey(self._bar[e])]

    def edge_rep(self, e):
        b = self._bar[e]
        return e if idkey(e) <= idkey(b) else b

    def num_vertices(self) -> int:
        return len(self._vertices)

    def num_darts(self) -> int:
        return len(self._darts)

    def num_edges(self) -> int:
        return len(self._darts) // 2

    def is_simple(self) -> bool:
        seen = set()
        for e in self._darts:
            u, v = self._iota[e], self._tau[e]
            if u == v or (u, v) in seen:
                return False
            seen.add((u, v))
        return True

    # -- connectivity ----------------------------------------------------
    def components(self) -> list:
        """Vertex sets of connected components, in canonical order."""
        seen = set()
        comps = []
        for v in self._vertices:
            if v in seen:
                continue
            comp = []
            todo = deque([v])
            seen.add(v)
            while todo:
                x = todo.popleft()
                comp.append(x)
                for e in self._out[x]:
                    y = self._tau[e]
                    if y not in seen:
                        seen.add(y)
                        todo.append(y)
            comps.append(frozenset(comp))
        return comps

    def is_connected(self) -> bool:
        return len(self._vertices) > 0 and len(self.components()) == 1

    def is_tree(self) -> bool:
        return self.is_connected() and self.num_edges() == self.num_vertices() - 1

    def induced_subgraph(self, vertices: Iterable[Id]) -> "SerreGraph":
        vs = set(vertices)
        darts = {
            e: self.dart_triple(e)
            for e in self._darts
            if self._iota[e] in vs and self._tau[e] in vs
        }
        return SerreGraph(vs, darts)

    def subgraph(self, vertices: Iterable[Id], darts: Iterable[Id]) -> "SerreGraph":
        ds = set(darts)
        return SerreGraph(vertices, {e: self.dart_triple(e) for e in ds})

    def relabel(self, vmap: Mapping, dmap: Mapping) -> "SerreGraph":
        return SerreGraph(
            [vmap[v] for v in self._vertices],
            {
                dmap[e]: (vmap[self._iota[e]], vmap[self._tau[e]], dmap[self._bar[e]])
                for e in self._darts
            },
        )

    def __eq__(self, other):
        if not isinstance(other, SerreGraph):
            return NotImplemented
        return (
            self._vertices == other._vertices
            and self._darts == other._darts
            and all(self.dart_triple(e) == other.dart_triple(e) for e in self._darts)
        )

    __hash__ = None

    def __repr__(self):
        return f"SerreGraph(|V|={len(self._vertices)}, |E|={self.num_edges()})"


def validate_graph(raw: Any) -> SerreGraph:
    """Build a SerreGraph from a raw description.

    ``raw`` is either a mapping with ``vertices`` and ``darts`` where each
    dart entry has ``id``, ``bar``, ``from`` and ``to``, or a
    ``(vertices, {dart: (iota, tau, bar)})`` pair.
    """
    if isinstance(raw, SerreGraph):
        return raw
    if isinstance(raw, Mapping):
        vertices = list(raw["vertices"])
        darts = {}
        for d in raw["darts"]:
            if d["id"] in darts:
                raise InvalidGraph(f"duplicate dart id {d['id']!r}")
            darts[d["id"]] = (d["from"], d["to"], d["bar"])
        if len(set(vertices)) != len(vertices):
            raise InvalidGraph("duplicate vertex ids")
        return SerreGraph(vertices, darts)
    vertices, darts = raw
    return SerreGraph(vertices, darts)


def graph_from_edges(edges: Iterable[tuple], vertices: Iterable[Id] = ()) -> SerreGraph:
    """Graph with one geometric edge per ``(u, v)`` pair; dart ids are
    ``(i, 1)`` for u->v and ``(i, -1)`` for v->u."""
    vs = set(vertices)
    darts = {}
    for i, (u, v) in enumerate(edges):
        vs.add(u)
        vs.add(v)
        darts[(i, 1)] = (u, v, (i, -1))
        darts[(i, -1)] = (v, u, (i, 1))
    return SerreGraph(vs, darts)


def disjoint_union(parts: Mapping[Id, SerreGraph]) -> SerreGraph:
    """Vertices and darts are tagged ``(label, id)``."""
    vertices = []
    darts = {}
    for label, g in parts.items():
        vertices.extend((label, v) for v in g.vertices)
        for e in g.darts:
            darts[(label, e)] = ((label, g.iota(e)), (label, g.tau(e)), (label, g.bar(e)))
    return SerreGraph(vertices, darts)


# ---------------------------------------------------------------------------
# morphisms


class GraphMorphism:
    """Map of graphs commuting with iota, tau and bar."""

    __slots__ = ("source", "target", "vmap", "dmap")

    def __init__(self, source: SerreGraph, target: SerreGraph, vmap: Mapping, dmap: Mapping,
                 check: bool = True):
        self.source = source
        self.target = target
        self.vmap = dict(vmap)
        self.dmap = dict(dmap)
        if check:
            self._check()

    def _check(self):
        s, t = self.source, self.target
        for v in s.vertices:
            if v not in self.vmap or not t.has_vertex(self.vmap[v]):
                raise InvalidMorphism(f"vertex {v!r} has no valid image")
        for e in s.darts:
            if e not in self.dmap or not t.has_dart(self.dmap[e]):
                raise InvalidMorphism(f"dart {e!r} has no valid image")
            fe = self.dmap[e]
            if self.dmap[s.bar(e)] != t.bar(fe):
                raise InvalidMorphism(f"f(bar {e!r}) != bar f({e!r})")
            if t.iota(fe) != self.vmap[s.iota(e)] or t.tau(fe) != self.vmap[s.tau(e)]:
                raise InvalidMorphism(f"endpoints of {e!r} not respected")

    def __call__(self, x):
        return self.vmap[x]

    def compose(self, first: "GraphMorphism") -> "GraphMorphism":
        """``self o first``."""
        return GraphMorphism(
            first.source,
            self.target,
            {v: self.vmap[first.vmap[v]] for v in first.source.vertices},
            {e: self.dmap[first.dmap[e]] for e in first.source.darts},
            check=False,
        )

    def is_injective(self) -> bool:
        return (len(set(self.vmap.values())) == len(self.vmap)
                and len(set(self.dmap.values())) == len(self.dmap))

    def is_isomorphism(self) -> bool:
        return (self.is_injective()
                and len(self.vmap) == self.target.num_vertices()
                and len(self.dmap) == self.target.num_darts())

    def inverse(self) -> "GraphMorphism":
        if not self.is_isomorphism():
            raise InvalidMorphism("morphism is not invertible")
        return GraphMorphism(
            self.target, self.source,
            {w: v for v, w in self.vmap.items()},
            {f: e for e, f in self.dmap.items()},
            check=False,
        )

    def restrict(self, vertices: Iterable[Id]) -> "GraphMorphism":
        sub = self.source.induced_subgraph(vertices)
        return GraphMorphism(sub, self.target,
                             {v: self.vmap[v] for v in sub.vertices},
                             {e: self.dmap[e] for e in sub.darts}, check=False)

    def same_as(self, other: "GraphMorphism") -> bool:
        return self.vmap == other.vmap and self.dmap == other.dmap

    def __repr__(self):
        return f"GraphMorphism({self.source!r} -> {self.target!r})"


def identity_morphism(g: SerreGraph) -> GraphMorphism:
    return GraphMorphism(g, g, {v: v for v in g.vertices}, {e: e for e in g.darts}, check=False)


@dataclass(frozen=True)
class CoveringReport:
    is_covering: bool
    degree: int | None = None
    witness: dict | None = None

    def __bool__(self):
        return self.is_covering

    def as_dict(self) -> dict:
        return {"is_covering": self.is_covering, "degree": self.degree, "witness": self.witness}


def is_covering(f: GraphMorphism) -> CoveringReport:
    """Local-bijectivity test: ``f`` restricts to a bijection
    ``lk(v) -> lk(f(v))`` at every source vertex."""
    s, t = f.source, f.target
    for v in s.vertices:
        fv = f.vmap[v]
        images = [f.dmap[e] for e in s.link(v)]
        target_link = t.link(fv)
        if len(images) != len(set(images)):
            dup = next(x for x in images if images.count(x) > 1)
            return CoveringReport(False, None, {"vertex": v, "reason": "link not injective", "dart": dup})
        if len(images) != len(target_link):
            missing = sorted_ids(set(target_link) - set(images))
            return CoveringReport(False, None, {"vertex": v, "reason": "link not surjective",
                                                "dart": missing[0] if missing else None})
    degree = None
    if t.is_connected() and s.num_vertices() > 0:
        fibers = {w: 0 for w in t.vertices}
        for v in s.vertices:
            fibers[f.vmap[v]] += 1
        sizes = set(fibers.values())
        if len(sizes) == 1:
            degree = sizes.pop()
    return CoveringReport(True, degree, None)


def lift_through_covering(f: GraphMorphism, g: GraphMorphism, x0, y0):
    """Unique lift ``h`` with ``f o h = g`` and ``h(x0) = y0``.

    ``f: Y -> B`` is a covering and ``g: X -> B`` any morphism from a
    connected graph. Returns the lift or ``None`` when no lift exists.
    """
    X, Y = g.source, f.source
    if f.vmap[y0] != g.vmap[x0]:
        return None
    out_index = {}
    for y in Y.vertices:
        for d in Y.out_darts(y):
            out_index[(y, f.dmap[d])] = d
    vmap = {x0: y0}
    dmap = {}
    todo = deque([x0])
    while todo:
        x = todo.popleft()
        y = vmap[x]
        for e in X.out_darts(x):
            d = out_index.get((y, g.dmap[e]))
            if d is None:
                return None
            if e in dmap and dmap[e] != d:
                return None
            dmap[e] = d
            be = X.bar(e)
            if be in dmap and dmap[be] != Y.bar(d):
                return None
            dmap[be] = Y.bar(d)
            x2, y2 = X.tau(e), Y.tau(d)
            if x2 in vmap:
                if vmap[x2] != y2:
                    return None
            else:
                vmap[x2] = y2
                todo.append(x2)
    if len(vmap) != X.num_vertices():
        return None
    return GraphMorphism(X, Y, vmap, dmap, check=False)


def deck_transformations(f: GraphMorphism) -> list:
    """All automorphisms ``h`` of the (connected) source with ``f o h = f``."""
    X = f.source
    if not X.is_connected():
        raise InvalidMorphism("deck transformations need a connected source")
    x0 = X.vertices[0]
    out = []
    for y in X.vertices:
        if f.vmap[y] != f.vmap[x0]:
            continue
        h = lift_through_covering(f, f, x0, y)
        if h is not None and h.is_isomorphism():
            out.append(h)
    return out


# ---------------------------------------------------------------------------
# subdivision


@dataclass(frozen=True)
class Subdivision:
    """Correspondence for a barycentric subdivision.

    Original vertices keep their ids; the midpoint of the geometric edge
    with canonical dart ``r`` is ``("mid", r)``; dart ``e`` becomes
    ``(e, 0)`` (``iota(e)`` -> midpoint) and ``(e, 1)`` (midpoint -> ``tau(e)``).
    """

    graph: SerreGraph
    original: SerreGraph

    def midpoint(self, e):
        return ("mid", self.original.edge_rep(e))

    def vertex(self, v):
        return v

    def half_dart(self, e, towards_mid: bool):
        return (e, 0) if towards_mid else (e, 1)

    def dart_from_midpoint(self, e, v):
        """Dart of the subdivision from the midpoint of ``e`` to endpoint ``v``."""
        g = self.original
        if g.tau(e) == v:
            return (e, 1)
        if g.iota(e) == v:
            return (g.bar(e), 1)
        raise KeyError(f"{v!r} is not an endpoint of {e!r}")

    def is_midpoint(self, x) -> bool:
        return isinstance(x, tuple) and len(x) == 2 and x[0] == "mid" and self.original.has_dart(x[1])


def barycentric_subdivision(g: SerreGraph) -> tuple[SerreGraph, Subdivision]:
    vertices = list(g.vertices)
    darts = {}
    for r in g.geometric_edges():
        m = ("mid", r)
        vertices.append(m)
        for e in (r, g.bar(r)):
            be = g.bar(e)
            darts[(e, 0)] = (g.iota(e), m, (be, 1))
            darts[(e, 1)] = (m, g.tau(e), (be, 0))
    sub = SerreGraph(vertices, darts)
    return sub, Subdivision(sub, g)


# ---------------------------------------------------------------------------
# partitions and quotients


class VertexPartition:
    """Partition of a finite set into nonempty disjoint blocks.

    A block is identified by its smallest member (``rep``).
    """

    __slots__ = ("blocks", "block_of")

    def __init__(self, blocks: Iterable[Iterable[Id]]):
        bl = [frozenset(b) for b in blocks]
        if any(not b for b in bl):
            raise PartitionMismatch("empty block")
        self.block_of = {}
        for b in bl:
            r = min_id(b)
            for x in b:
                if x in self.block_of:
                    raise PartitionMismatch(f"{x!r} lies in two blocks")
                self.block_of[x] = r
        self.blocks = tuple(sorted(bl, key=lambda b: idkey(min_id(b))))

    @classmethod
    def singletons(cls, xs: Iterable[Id]) -> "VertexPartition":
        return cls([[x] for x in xs])

    @classmethod
    def from_labels(cls, labels: Mapping[Id, Any]) -> "VertexPartition":
        groups = {}
        for x, lab in labels.items():
            groups.setdefault(lab, []).append(x)
        return cls(groups.values())

    def rep(self, x):
        return self.block_of[x]

    def domain(self) -> frozenset:
        return frozenset(self.block_of)

    def block(self, x) -> frozenset:
        r = self.block_of[x]
        return next(b for b in self.blocks if r in b)

    def is_trivial(self) -> bool:
        return all(len(b) == 1 for b in self.blocks)

    def as_sets(self) -> set:
        return set(self.blocks)

    def __eq__(self, other):
        if not isinstance(other, VertexPartition):
            return NotImplemented
        return set(self.blocks) == set(other.blocks)

    def __hash__(self):
        return hash(frozenset(self.blocks))

    def __len__(self):
        return len(self.blocks)

    def __repr__(self):
        return "VertexPartition(" + ", ".join(
            "{" + ",".join(repr(x) for x in sorted_ids(b)) + "}" for b in self.blocks) + ")"


@dataclass
class QuotientProjection:
    """Vertex map onto blocks; darts map to a quotient dart or ``None`` when
    they were collapsed (loops) or merged away."""

    vmap: dict
    dmap: dict


def quotient_by_partition(g: SerreGraph, p: VertexPartition, keep_multi: bool = False):
    """Quotient graph whose vertices are the blocks of ``p``.

    By default the result is simple: one-edge loops and multiple edges are
    removed.  ``keep_multi=True`` keeps every dart (diagnostic mode) and the
    projection is then a genuine graph morphism.
    """
    if p.domain() != frozenset(g.vertices):
        raise PartitionMismatch("partition does not cover exactly the vertex set")
    vmap = {v: p.rep(v) for v in g.vertices}
    reps = sorted_ids({p.rep(v) for v in g.vertices})
    darts = {}
    dmap = {}
    if keep_multi:
        for e in g.darts:
            darts[e] = (vmap[g.iota(e)], vmap[g.tau(e)], g.bar(e))
            dmap[e] = e
    else:
        for e in g.darts:
            a, b = vmap[g.iota(e)], vmap[g.tau(e)]
            if a == b:
                dmap[e] = None
                continue
            darts[(a, b)] = (a, b, (b, a))
            dmap[e] = (a, b)
    return SerreGraph(reps, darts), QuotientProjection(vmap, dmap)


# ---------------------------------------------------------------------------
# 2-complexes and homology


class TwoComplex:
    """A graph with 2-cells attached along closed dart walks."""

    __slots__ = ("skeleton", "cells")

    def __init__(self, skeleton: SerreGraph, cells: Iterable[Iterable[Id]]):
        self.skeleton = skeleton
        self.cells = tuple(tuple(c) for c in cells)
        for c in self.cells:
            if not c:
                raise InvalidGraph("empty cell boundary")
            for e in c:
                if not skeleton.has_dart(e):
                    raise DanglingReference(f"cell uses unknown dart {e!r}")
            for a, b in zip(c, c[1:] + c[:1]):
                if skeleton.tau(a) != skeleton.iota(b):
                    raise InvalidGraph(f"cell {c!r} is not a closed walk")

    def __repr__(self):
        return f"TwoComplex({self.skeleton!r}, cells={len(self.cells)})"


def _canonical_cycle(g: SerreGraph, walk: tuple) -> tuple:
    rev = tuple(g.bar(e) for e in reversed(walk))
    best = None
    for w in (walk, rev):
        for i in range(len(w)):
            rot = w[i:] + w[:i]
            k = idkey(rot)
            if best is None or k < best[0]:
                best = (k, rot)
    return best[1]


def attach_small_loops(g: SerreGraph, M: int) -> TwoComplex:
    """Attach a 2-cell along every cyclically reduced closed walk of length
    at most ``M``, one per class under rotation and reversal."""
    if M < 1:
        raise ValueError("M must be positive")
    cells = set()
    for start in g.darts:
        # DFS over reduced walks beginning with ``start``
        stack = [(start,)]
        while stack:
            w = stack.pop()
            last = w[-1]
            if g.tau(last) == g.iota(start) and start != g.bar(last):
                cells.add(_canonical_cycle(g, w))
            if len(w) == M:
                continue
            for e in g.out_darts(g.tau(last)):
                if e != g.bar(last):
                    stack.append(w + (e,))
    return TwoComplex(g, sorted(cells, key=lambda c: (len(c), idkey(c))))


def smith_invariants(matrix: list[list[int]]) -> list[int]:
    """Nonzero diagonal entries of the Smith normal form (each divides the next)."""
    a = [list(map(int, row)) for row in matrix]
    m = len(a)
    n = len(a[0]) if m else 0
    diag = []
    t = 0
    while t < m and t < n:
        # pivot: smallest nonzero absolute value in the remaining block
        piv = None
        for i in range(t, m):
            for j in range(t, n):
                if a[i][j] and (piv is None or abs(a[i][j]) < abs(a[piv[0]][piv[1]])):
                    piv = (i, j)
        if piv is None:
            break
        i, j = piv
        a[t], a[i] = a[i], a[t]
        for row in a:
            row[t], row[j] = row[j], row[t]
        while True:
            done = True
            p = a[t][t]
            for i in range(t + 1, m):
                q = a[i][t] // p
                if q:
                    a[i] = [x - q * y for x, y in zip(a[i], a[t])]
                if a[i][t]:
                    done = False
            for j in range(t + 1, n):
                q = a[t][j] // p
                if q:
                    for row in a:
                        row[j] -= q * row[t]
                if a[t][j]:
                    done = False
            if done:
                # enforce divisibility of the rest of the block
                bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                            if a[i][j] % p), None)
                if bad is None:
                    break
                a[t] = [x + y for x, y in zip(a[t], a[bad[0]])]
                continue
            # move the smallest nonzero entry of row/col t to the pivot
            best = (abs(a[t][t]), t, t)
            for i in range(t + 1, m):
                if a[i][t] and abs(a[i][t]) < best[0]:
                    best = (abs(a[i][t]), i, t)
            for j in range(t + 1, n):
                if a[t][j] and abs(a[t][j]) < best[0]:
                    best = (abs(a[t][j]), t, j)
            _, i, j = best
            if i != t:
                a[t], a[i] = a[i], a[t]
            if j != t:
                for row in a:
                    row[t], row[j] = row[j], row[t]
        diag.append(abs(a[t][t]))
        t += 1
    return diag


@dataclass(frozen=True)
class Homology:
    rank: int
    torsion: tuple = field(default_factory=tuple)

    def is_trivial(self) -> bool:
        return self.rank == 0 and not self.torsion


def boundary_matrices(c: TwoComplex):
    g = c.skeleton
    edges = g.geometric_edges()
    eidx = {e: i for i, e in enumerate(edges)}
    vidx = {v: i for i, v in enumerate(g.vertices)}
    d1 = [[0] * len(edges) for _ in g.vertices]
    for e, i in eidx.items():
        d1[vidx[g.tau(e)]][i] += 1
        d1[vidx[g.iota(e)]][i] -= 1
    d2 = [[0] * len(c.cells) for _ in edges]
    for k, cell in enumerate(c.cells):
        for e in cell:
            if e in eidx:
                d2[eidx[e]][k] += 1
            else:
                d2[eidx[g.bar(e)]][k] -= 1
    return d1, d2


def homology_h1(c: TwoComplex) -> Homology:
    """H_1 of the 2-complex: free rank and torsion coefficients."""
    d1, d2 = boundary_matrices(c)
    n_edges = c.skeleton.num_edges()
    rank_d1 = len(smith_invariants(d1)) if d1 and n_edges else 0
    inv2 = smith_invariants(d2) if n_edges and c.cells else []
    return Homology(n_edges - rank_d1 - len(inv2), tuple(d for d in inv2 if d > 1))
