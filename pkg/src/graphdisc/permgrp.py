"""Permutation groups on finite domains of opaque ids.

Groups are handled by full element enumeration below a configurable bound;
normality, intersections and products are then exact.  Composition is
functional: ``(g * h)(x) == g(h(x))`` so groups act on the left.
"""
from __future__ import annotations

from collections import deque
from typing import Hashable, Iterable, Mapping, Sequence

from .errors import ElementBoundExceeded, InvalidAction, NotASubgroup, NotNormal, NotTransitive
from .graph import SerreGraph, VertexPartition
from .ids import idkey, sorted_ids

DEFAULT_ELEMENT_BOUND = 20000


class Domain:
    """Interned ordered point set."""

    _cache: dict = {}
    __slots__ = ("points", "index", "__weakref__")

    def __new__(cls, points: Iterable[Hashable]):
        pts = tuple(sorted_ids(set(points)))
        obj = cls._cache.get(pts)
        if obj is None:
            obj = super().__new__(cls)
            obj.points = pts
            obj.index = {p: i for i, p in enumerate(pts)}
            cls._cache[pts] = obj
        return obj

    def __len__(self):
        return len(self.points)

    def __contains__(self, x):
        return x in self.index

    def __repr__(self):
        return f"Domain({len(self.points)} points)"


def as_domain(d) -> Domain:
    return d if isinstance(d, Domain) else Domain(d)


class Permutation:
    __slots__ = ("domain", "perm", "_hash")

    def __init__(self, domain: Domain, perm: Sequence[int]):
        self.domain = domain
        self.perm = tuple(perm)
        self._hash = hash(self.perm)

    @classmethod
    def identity(cls, domain) -> "Permutation":
        d = as_domain(domain)
        return cls(d, range(len(d)))

    @classmethod
    def from_mapping(cls, mapping: Mapping, domain=None) -> "Permutation":
        """Points absent from ``mapping`` are fixed."""
        d = as_domain(domain if domain is not None else set(mapping) | set(mapping.values()))
        perm = list(range(len(d)))
        for x, y in mapping.items():
            perm[d.index[x]] = d.index[y]
        if len(set(perm)) != len(perm):
            raise ValueError("mapping is not a bijection")
        return cls(d, perm)

    @classmethod
    def from_cycles(cls, cycles: Iterable[Sequence], domain) -> "Permutation":
        mapping = {}
        for c in cycles:
            c = list(c)
            for a, b in zip(c, c[1:] + c[:1]):
                if a in mapping:
                    raise ValueError(f"point {a!r} appears twice in cycles")
                mapping[a] = b
        return cls.from_mapping(mapping, domain)

    def __call__(self, x):
        d = self.domain
        return d.points[self.perm[d.index[x]]]

    def __mul__(self, other: "Permutation") -> "Permutation":
        if other.domain is not self.domain:
            raise ValueError("permutations on different domains")
        p = self.perm
        return Permutation(self.domain, [p[i] for i in other.perm])

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.perm)
        for i, j in enumerate(self.perm):
            inv[j] = i
        return Permutation(self.domain, inv)

    def __invert__(self):
        return self.inverse()

    def __pow__(self, n: int) -> "Permutation":
        if n < 0:
            return self.inverse() ** (-n)
        r = Permutation.identity(self.domain)
        base = self
        while n:
            if n & 1:
                r = r * base
            base = base * base
            n >>= 1
        return r

    def conj(self, g: "Permutation") -> "Permutation":
        """``g * self * g^-1``."""
        return g * self * g.inverse()

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.perm))

    def mapping(self) -> dict:
        pts = self.domain.points
        return {pts[i]: pts[j] for i, j in enumerate(self.perm)}

    def support(self) -> list:
        pts = self.domain.points
        return [pts[i] for i, j in enumerate(self.perm) if i != j]

    def cycles(self) -> list:
        pts = self.domain.points
        seen = set()
        out = []
        for i in range(len(self.perm)):
            if i in seen or self.perm[i] == i:
                continue
            c = []
            j = i
            while j not in seen:
                seen.add(j)
                c.append(pts[j])
                j = self.perm[j]
            out.append(tuple(c))
        return out

    def order(self) -> int:
        from math import lcm
        r = 1
        for c in self.cycles():
            r = lcm(r, len(c))
        return r

    def sort_key(self):
        return self.perm

    def __eq__(self, other):
        return (isinstance(other, Permutation) and other.domain is self.domain
                and other.perm == self.perm)

    def __lt__(self, other):
        return self.perm < other.perm

    def __hash__(self):
        return self._hash

    def __repr__(self):
        cyc = self.cycles()
        if not cyc:
            return "()"
        return "".join("(" + " ".join(repr(x) for x in c) + ")" for c in cyc)


def _closure(gens: Iterable[Permutation], identity: Permutation, bound: int,
             start: Iterable[Permutation] = ()) -> set:
    gens = [g for g in gens if not g.is_identity()]
    elems = set(start) or {identity}
    elems.add(identity)
    todo = deque(elems)
    while todo:
        h = todo.popleft()
        for s in gens:
            g = s * h
            if g not in elems:
                elems.add(g)
                if len(elems) > bound:
                    raise ElementBoundExceeded(f"group has more than {bound} elements")
                todo.append(g)
    return elems


class PermGroup:
    """Permutation group given by generators, with bounded full enumeration."""

    __slots__ = ("domain", "generators", "bound", "_elements")

    def __init__(self, domain, generators: Iterable[Permutation] = (), bound: int = DEFAULT_ELEMENT_BOUND,
                 elements: Iterable[Permutation] | None = None):
        self.domain = as_domain(domain)
        gens = []
        for g in generators:
            if g.domain is not self.domain:
                raise ValueError("generator on a different domain")
            if not g.is_identity() and g not in gens:
                gens.append(g)
        self.generators = tuple(gens)
        self.bound = bound
        self._elements = frozenset(elements) if elements is not None else None

    @classmethod
    def from_elements(cls, domain, elements: Iterable[Permutation], bound: int = DEFAULT_ELEMENT_BOUND):
        """Subgroup with a known (closed) element set; a small generating set is
        chosen greedily in canonical order."""
        d = as_domain(domain)
        elems = frozenset(elements)
        ident = Permutation.identity(d)
        gens = []
        cur = {ident}
        for g in sorted(elems):
            if g not in cur:
                gens.append(g)
                cur = _closure(gens, ident, bound, start=cur)
        if cur != set(elems) | {ident}:
            raise NotASubgroup("element set is not closed under multiplication")
        return cls(d, gens, bound, elements=cur)

    @classmethod
    def trivial(cls, domain, bound: int = DEFAULT_ELEMENT_BOUND) -> "PermGroup":
        d = as_domain(domain)
        return cls(d, (), bound, elements=[Permutation.identity(d)])

    @classmethod
    def symmetric(cls, points) -> "PermGroup":
        pts = sorted_ids(points)
        d = Domain(pts)
        gens = []
        if len(pts) > 1:
            gens.append(Permutation.from_cycles([pts[:2]], d))
            gens.append(Permutation.from_cycles([pts], d))
        return cls(d, gens)

    @property
    def identity(self) -> Permutation:
        return Permutation.identity(self.domain)

    def elements(self) -> frozenset:
        if self._elements is None:
            self._elements = frozenset(_closure(self.generators, self.identity, self.bound))
        return self._elements

    def sorted_elements(self) -> list:
        return sorted(self.elements())

    def order(self) -> int:
        return len(self.elements())

    def __len__(self):
        return self.order()

    def __contains__(self, g: Permutation) -> bool:
        return g in self.elements()

    def __iter__(self):
        return iter(self.sorted_elements())

    def is_trivial(self) -> bool:
        return self.order() == 1

    def is_subgroup_of(self, other: "PermGroup") -> bool:
        return all(g in other for g in self.generators)

    def __le__(self, other):
        return self.is_subgroup_of(other)

    def __eq__(self, other):
        if not isinstance(other, PermGroup):
            return NotImplemented
        return self.domain is other.domain and self.elements() == other.elements()

    def __hash__(self):
        return hash(self.elements())

    def orbit(self, x) -> frozenset:
        seen = {x}
        todo = [x]
        while todo:
            y = todo.pop()
            for g in self.generators:
                z = g(y)
                if z not in seen:
                    seen.add(z)
                    todo.append(z)
        return frozenset(seen)

    def is_transitive(self) -> bool:
        pts = self.domain.points
        return not pts or len(self.orbit(pts[0])) == len(pts)

    def __repr__(self):
        return f"PermGroup(degree={len(self.domain)}, gens={list(self.generators)!r})"


def _require_subgroup(H: PermGroup, G: PermGroup, name="H"):
    if H.domain is not G.domain or not H.is_subgroup_of(G):
        raise NotASubgroup(f"{name} is not a subgroup of the ambient group")


# ---------------------------------------------------------------------------
# orbits, stabilizers, blocks


def orbit_partition(G: PermGroup, S: Iterable | None = None) -> VertexPartition:
    """G-orbits intersected with ``S`` (default: the whole domain)."""
    pts = list(G.domain.points) if S is None else sorted_ids(set(S))
    seen = set()
    blocks = []
    sset = set(pts)
    for x in pts:
        if x in seen:
            continue
        orb = G.orbit(x)
        seen |= orb
        blocks.append(orb & sset)
    return VertexPartition(blocks)


def point_stabilizer(G: PermGroup, x) -> PermGroup:
    return PermGroup.from_elements(G.domain, [g for g in G.elements() if g(x) == x], G.bound)


def setwise_stabilizer(G: PermGroup, S: Iterable) -> PermGroup:
    s = frozenset(S)
    return PermGroup.from_elements(G.domain, [g for g in G.elements()
                                              if all(g(x) in s for x in s)], G.bound)


def minimal_block_containing(G: PermGroup, a, b) -> VertexPartition:
    """Finest G-invariant partition in which ``a`` and ``b`` share a block."""
    parent = {x: x for x in G.domain.points}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if idkey(ry) < idkey(rx):
            rx, ry = ry, rx
        parent[ry] = rx

    union(a, b)
    todo = [(a, b)]
    while todo:
        x, y = todo.pop()
        for g in G.generators:
            u, v = find(g(x)), find(g(y))
            if u != v:
                union(u, v)
                todo.append((u, v))
    return VertexPartition.from_labels({x: find(x) for x in G.domain.points})


def minimal_block_systems(G: PermGroup) -> list:
    """All minimal nontrivial block systems of a transitive group; empty iff
    the group is primitive."""
    pts = G.domain.points
    if not G.is_transitive():
        raise NotTransitive("block systems need a transitive group")
    if len(pts) < 3:
        return []
    alpha = pts[0]
    candidates = {}
    for beta in pts[1:]:
        p = minimal_block_containing(G, alpha, beta)
        if len(p) > 1:
            candidates[p.block(alpha)] = p
    blocks = list(candidates)
    minimal = [b for b in blocks if not any(c < b for c in blocks)]
    return [candidates[b] for b in sorted(minimal, key=lambda b: idkey(tuple(sorted_ids(b))))]


def is_invariant_partition(gens: Iterable[Permutation], p: VertexPartition) -> bool:
    for g in gens:
        for b in p.blocks:
            images = {p.rep(g(x)) for x in b}
            if len(images) != 1:
                return False
    return True


# ---------------------------------------------------------------------------
# subgroup arithmetic


def index(G: PermGroup, H: PermGroup) -> int:
    _require_subgroup(H, G)
    return G.order() // H.order()


def is_normal(G: PermGroup, H: PermGroup) -> bool:
    _require_subgroup(H, G)
    hs = H.elements()
    return all(h.conj(g) in hs for g in G.generators for h in H.generators)


def intersection(H: PermGroup, K: PermGroup) -> PermGroup:
    if H.domain is not K.domain:
        raise ValueError("groups on different domains")
    return PermGroup.from_elements(H.domain, H.elements() & K.elements(), min(H.bound, K.bound))


def conjugate(H: PermGroup, g: Permutation) -> PermGroup:
    """``g H g^-1``."""
    return PermGroup(H.domain, [h.conj(g) for h in H.generators], H.bound,
                     elements=[h.conj(g) for h in H.elements()])


def normal_core(G: PermGroup, H: PermGroup) -> PermGroup:
    _require_subgroup(H, G)
    core = set(H.elements())
    changed = True
    while changed:
        changed = False
        for g in G.generators:
            gi = g.inverse()
            keep = {h for h in core if gi * h * g in core}
            if keep != core:
                core = keep
                changed = True
    return PermGroup.from_elements(G.domain, core, G.bound)


def product_set(H: PermGroup, K: PermGroup) -> PermGroup:
    """HK as a group; raises NotASubgroup when HK != KH."""
    if H.domain is not K.domain:
        raise ValueError("groups on different domains")
    hk = {h * k for h in H.elements() for k in K.elements()}
    kh = {k * h for h in H.elements() for k in K.elements()}
    if hk != kh:
        raise NotASubgroup("the product set HK is not a subgroup")
    return PermGroup.from_elements(H.domain, hk, min(H.bound, K.bound))


def all_subgroups(G: PermGroup) -> list:
    """Every subgroup of ``G``, as joins of cyclic subgroups (desk-scale only)."""
    els = G.sorted_elements()
    cyclic = {}
    for g in els:
        c = PermGroup(G.domain, [g], G.bound)
        cyclic.setdefault(c.elements(), c)
    found = dict(cyclic)
    frontier = list(found.values())
    while frontier:
        new = []
        for H in frontier:
            for C in cyclic.values():
                if C.elements() <= H.elements():
                    continue
                J = PermGroup(G.domain, list(H.generators) + list(C.generators), G.bound)
                if J.elements() not in found:
                    found[J.elements()] = J
                    new.append(J)
        frontier = new
    return sorted(found.values(), key=lambda H: (H.order(), sorted(x.sort_key() for x in H.elements())))


def small_index_core(G: PermGroup, M: int) -> PermGroup:
    """Intersection of all subgroups of index at most ``M``; characteristic in G."""
    core = G.elements()
    n = G.order()
    for H in all_subgroups(G):
        if n // H.order() <= M:
            core = core & H.elements()
    return PermGroup.from_elements(G.domain, core, G.bound)


def subgroup_ops(G: PermGroup, H: PermGroup, K: PermGroup | None = None, kind: str = "index",
                 g: Permutation | None = None):
    """Dispatch to the named subgroup computation."""
    _require_subgroup(H, G, "H")
    if K is not None:
        _require_subgroup(K, G, "K")
    if kind == "index":
        return index(G, H)
    if kind == "is_normal":
        return is_normal(G, H)
    if kind == "intersection":
        return intersection(H, K)
    if kind == "conjugate":
        return conjugate(H, g)
    if kind == "normal_core":
        return normal_core(G, H)
    if kind == "product_set":
        return product_set(H, K)
    raise ValueError(f"unknown subgroup operation {kind!r}")


def require_normal(G: PermGroup, K: PermGroup, name: str = "K"):
    _require_subgroup(K, G, name)
    if not is_normal(G, K):
        raise NotNormal(f"{name} is not normal")


# ---------------------------------------------------------------------------
# actions on graphs


def graph_points(g: SerreGraph) -> Domain:
    """Tagged point set ``("v", vertex)`` and ``("d", dart)`` of a graph."""
    return Domain([("v", v) for v in g.vertices] + [("d", e) for e in g.darts])


def graph_automorphism_perm(g: SerreGraph, vmap: Mapping, dmap: Mapping) -> Permutation:
    """Permutation of ``graph_points(g)``; raises InvalidAction unless the maps
    form an automorphism.  Missing entries are fixed."""
    vm = {v: vmap.get(v, v) for v in g.vertices}
    dm = {e: dmap.get(e, e) for e in g.darts}
    if sorted_ids(vm.values()) != list(g.vertices) or sorted_ids(dm.values()) != list(g.darts):
        raise InvalidAction("vertex or dart map is not a bijection")
    for e in g.darts:
        f = dm[e]
        if dm[g.bar(e)] != g.bar(f) or g.iota(f) != vm[g.iota(e)] or g.tau(f) != vm[g.tau(e)]:
            raise InvalidAction(f"map does not preserve the graph structure at dart {e!r}")
    m = {("v", v): ("v", w) for v, w in vm.items()}
    m.update({("d", e): ("d", f) for e, f in dm.items()})
    return Permutation.from_mapping(m, graph_points(g))


def split_graph_perm(p: Permutation) -> tuple[dict, dict]:
    vm, dm = {}, {}
    for (t, x), (_, y) in p.mapping().items():
        (vm if t == "v" else dm)[x] = y
    return vm, dm


class GroupAction:
    """Action of a permutation group on a graph by automorphisms.

    ``images[i]`` is the automorphism (a permutation of ``graph_points``)
    assigned to ``group.generators[i]``.  The assignment is verified to extend
    to a homomorphism on the enumerated group.
    """

    __slots__ = ("group", "graph", "points", "gen_images", "_hom")

    def __init__(self, group: PermGroup, graph: SerreGraph, gen_images: Sequence[Permutation]):
        self.group = group
        self.graph = graph
        self.points = graph_points(graph)
        if len(gen_images) != len(group.generators):
            raise InvalidAction("one image per group generator is required")
        for p in gen_images:
            if p.domain is not self.points:
                raise InvalidAction("generator image is not a permutation of the graph points")
        self.gen_images = tuple(gen_images)
        self._hom = self._extend()

    @classmethod
    def from_maps(cls, group: PermGroup, graph: SerreGraph, maps: Sequence[tuple[Mapping, Mapping]]):
        return cls(group, graph, [graph_automorphism_perm(graph, vm, dm) for vm, dm in maps])

    @classmethod
    def natural(cls, group: PermGroup, graph: SerreGraph) -> "GroupAction":
        """A group of permutations of ``graph_points(graph)`` acting on the graph."""
        if group.domain is not graph_points(graph):
            raise InvalidAction("group does not act on the graph points")
        for g in group.generators:
            vm, dm = split_graph_perm(g)
            graph_automorphism_perm(graph, vm, dm)
        return cls(group, graph, list(group.generators))

    def _extend(self) -> dict:
        ident = self.group.identity
        hom = {ident: Permutation.identity(self.points)}
        todo = deque([ident])
        gens = list(zip(self.group.generators, self.gen_images))
        bound = self.group.bound
        while todo:
            h = todo.popleft()
            ih = hom[h]
            for s, si in gens:
                g = s * h
                ig = si * ih
                old = hom.get(g)
                if old is None:
                    hom[g] = ig
                    if len(hom) > bound:
                        raise ElementBoundExceeded(f"group has more than {bound} elements")
                    todo.append(g)
                elif old != ig:
                    raise InvalidAction("generator images do not extend to a homomorphism")
        if self.group._elements is None:
            self.group._elements = frozenset(hom)
        return hom

    def image(self, g: Permutation) -> Permutation:
        return self._hom[g]

    def act_vertex(self, g: Permutation, v):
        return self._hom[g](("v", v))[1]

    def act_dart(self, g: Permutation, e):
        return self._hom[g](("d", e))[1]

    def vertex_map(self, g: Permutation) -> dict:
        p = self._hom[g]
        return {v: p(("v", v))[1] for v in self.graph.vertices}

    def dart_map(self, g: Permutation) -> dict:
        p = self._hom[g]
        return {e: p(("d", e))[1] for e in self.graph.darts}

    def vertex_orbit(self, v, elements: Iterable[Permutation] | None = None) -> frozenset:
        els = self.group.elements() if elements is None else elements
        return frozenset(self.act_vertex(g, v) for g in els)

    def vertex_stabilizer(self, v) -> PermGroup:
        return PermGroup.from_elements(
            self.group.domain, [g for g in self.group.elements() if self.act_vertex(g, v) == v],
            self.group.bound)

    def edge_stabilizer(self, e) -> PermGroup:
        """Setwise stabilizer of the geometric edge ``{e, bar e}`` (inversions allowed)."""
        pair = {e, self.graph.bar(e)}
        return PermGroup.from_elements(
            self.group.domain, [g for g in self.group.elements() if self.act_dart(g, e) in pair],
            self.group.bound)

    def dart_stabilizer(self, e) -> PermGroup:
        return PermGroup.from_elements(
            self.group.domain, [g for g in self.group.elements() if self.act_dart(g, e) == e],
            self.group.bound)

    def image_group(self) -> PermGroup:
        return PermGroup(self.points, self.gen_images, self.group.bound)

    def __repr__(self):
        return f"GroupAction(|G|={self.group.order()}, {self.graph!r})"


def action_kernel(a: GroupAction) -> PermGroup:
    """Elements acting trivially on all vertices and darts."""
    return PermGroup.from_elements(
        a.group.domain, [g for g in a.group.elements() if a.image(g).is_identity()], a.group.bound)
