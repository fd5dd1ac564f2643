"""Acceptance gate: one test per criterion, each timed against its budget
and printing a single PASS/FAIL line."""
from __future__ import annotations

import random
import time
from contextlib import contextmanager

import networkx as nx
from util import glues, gos_base, to_nx, walk_map

from graphdisc.autgrp import automorphism_group, vertex_stabilizer_orbit_bound
from graphdisc.blowup import construct_blowup, verify_blowup, vertex_count_formula
from graphdisc.builders import bouquet, complete_bipartite, complete_graph, cycle_graph
from graphdisc.catalog import blowup_catalog, covering_catalog, decorated_cycle_action, hat_instances, wrap_cycle
from graphdisc.errors import GluingMismatch
from graphdisc.gos import check_gos_covering, fiber_product, gos_voltage_cover, is_fiber_product_diagram
from graphdisc.graph import GraphMorphism, TwoComplex, attach_small_loops, homology_h1, is_covering
from graphdisc.hatcover import twist_attachment, verify_and_glue_hat
from graphdisc.imprimitivity import check_invariant, imprimitivity_from_normal, induced_quotient_action
from graphdisc.leighton import brute_force_common_cover, common_cover_gos, common_cover_graphs, refinement_preserved
from graphdisc.permgrp import index, split_graph_perm
from graphdisc.voltage import perturb_covering, random_connected_cover, random_connected_graph, random_voltages, \
    voltage_cover


@contextmanager
def criterion(capsys, number: int, title: str, budget: float):
    t0 = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        dt = time.perf_counter() - t0
        ok = ok and dt < budget
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} ({dt:.2f} s, budget {budget:g} s)")
    assert dt < budget, f"criterion {number} took {dt:.2f} s"


def test_criterion_1_covering_verifier(capsys):
    with criterion(capsys, 1, "covering verifier vs 200 voltage covers and 200 perturbations", 5):
        rng = random.Random(2024)
        for _ in range(200):
            g = random_connected_graph(rng, 6, 4)
            n = rng.randint(1, 4)
            _, f = voltage_cover(g, n, random_voltages(g, n, rng))
            rep = is_covering(f)
            assert rep.is_covering and rep.degree == n
            bad = is_covering(perturb_covering(f, rng))
            assert not bad.is_covering and bad.witness


def test_criterion_2_blowup_suite(capsys):
    with criterion(capsys, 2, "blowup catalog verifies with |VX| = [G:K]|Omega0|", 10):
        cat = blowup_catalog()
        assert len(cat) >= 10 and "z2-inversion" in cat
        for name, inp in cat.items():
            assert inp.G.order() <= 48 and inp.T.num_vertices() <= 9
            r = construct_blowup(inp)
            rep = verify_blowup(r)
            assert rep.ok, (name, rep.witnesses)
            assert r.X.num_vertices() == vertex_count_formula(r)
            assert r.X.num_vertices() == inp.G.order() // inp.K.order() * len(inp.omega0)


def test_criterion_3_imprimitivity(capsys):
    with criterion(capsys, 3, "decorated n-cycles: orbit bound 2, quotient kernel = leaf swaps", 10):
        for n in range(3, 7):
            a, K = decorated_cycle_action(n)
            assert vertex_stabilizer_orbit_bound(a)[0] == 2
            p = imprimitivity_from_normal(a, K)
            check_invariant(a, p)
            _, _, kernel = induced_quotient_action(a, p)
            assert K.is_subgroup_of(kernel)
            assert kernel == K and kernel.order() == 2 ** n


def test_criterion_4_leighton_oracle(capsys):
    with criterion(capsys, 4, "oracle agreement on C4/C6 and K4/K33", 60):
        c4, c6 = cycle_graph(4), cycle_graph(6)
        r = brute_force_common_cover(c4, c6)
        assert r.order == 12
        z, p1, p2 = common_cover_graphs(c4, c6)
        assert is_covering(p1) and is_covering(p2) and z.num_vertices() % 12 == 0
        k4, k33 = complete_graph(4), complete_bipartite(3, 3)
        r = brute_force_common_cover(k4, k33)
        assert r is not None and r.order % 12 == 0
        assert is_covering(r.p1) and is_covering(r.p2)
        z, p1, p2 = common_cover_graphs(k4, k33)
        assert is_covering(p1) and is_covering(p2) and z.num_vertices() % r.order == 0


def test_criterion_5_leighton_random(capsys):
    with criterion(capsys, 5, "50 random cover pairs get verified common covers", 120):
        rng = random.Random(7)
        for _ in range(50):
            g = random_connected_graph(rng, 6, 4)
            while g.num_edges() < g.num_vertices():
                g = random_connected_graph(rng, 6, 4)
            x1, f1 = random_connected_cover(g, rng.randint(1, 3), rng)
            x2, f2 = random_connected_cover(g, rng.randint(1, 3), rng)
            z, p1, p2 = common_cover_graphs(x1, x2)
            assert is_covering(p1) and is_covering(p2)
            for f in (f1, f2, p1, p2):
                assert refinement_preserved(f)


def test_criterion_6_fiber_products(capsys):
    with criterion(capsys, 6, "fiber products of catalog coverings re-verify", 5):
        rng = random.Random(11)
        cat = covering_catalog()
        for name, f in cat.items():
            partners = [walk_map(f.target, k, rng) for k in (1, 3, 5)]
            partners += [h for h in cat.values() if h.target == f.target]
            for h in partners:
                fp = fiber_product(f, h)
                assert fp.components
                for _, _, p2 in fp.components:
                    assert is_covering(p2), name
                assert is_fiber_product_diagram(fp.pi2, fp.pi1, h, f)
        w = wrap_cycle(6, 3)
        fp = fiber_product(w, w)
        assert len(fp.components) == 2
        assert all(nx.is_isomorphic(to_nx(c), nx.cycle_graph(6)) for c, _, _ in fp.components)


def test_criterion_7_hat_pipeline(capsys):
    with criterion(capsys, 7, "hat-cover instances glue, twists are caught, GoS common covers verify", 30):
        inst = hat_instances()
        assert len(inst) >= 3
        mutated = 0
        for name, data in inst.items():
            glue = verify_and_glue_hat(data)
            for (v, lattice), vc in glue.covers.items():
                assert vc.regular and vc.deck_order == index(getattr(data, lattice)[v], data.Qhat[v])
            for l in data.quotient.darts:
                E = data.edge_space(l)
                for p in automorphism_group(E).sorted_elements():
                    vm, dm = split_graph_perm(p)
                    t = twist_attachment(data, l, GraphMorphism(E, E, vm, dm))
                    if glues(t):
                        continue
                    mutated += 1
                    try:
                        verify_and_glue_hat(t)
                    except GluingMismatch:
                        continue
                    raise AssertionError(f"{name}: twist at {l!r} was not caught")
        assert mutated > 0
        y = gos_base()
        y1, _ = gos_voltage_cover(y, 2, {(0, 1): (1, 0)})
        y2, _ = gos_voltage_cover(y, 3, {(0, 1): (1, 2, 0), (1, 1): (0, 2, 1)})
        zy, f1, f2 = common_cover_gos(y1, y2)
        assert check_gos_covering(f1) and check_gos_covering(f2)


def test_criterion_8_homology(capsys):
    with criterion(capsys, 8, "small-loop complexes: H1 trivial, free rank 1, torsion Z/2", 1):
        for n in range(3, 9):
            for M in range(2, 11):
                h = homology_h1(attach_small_loops(cycle_graph(n), M))
                if M >= n:
                    assert h.is_trivial()
                else:
                    assert h.rank == 1 and not h.torsion
        g = bouquet(1)
        e = g.geometric_edges()[0]
        h = homology_h1(TwoComplex(g, [[e, e]]))
        assert h.rank == 0 and h.torsion == (2,)
