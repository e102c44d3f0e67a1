from __future__ import annotations

import math
import random
from fractions import Fraction
from functools import reduce

import networkx as nx
import numpy as np
import pytest
from hypothesis import given

from netflow import (
    ColumnStochasticOperator,
    ConvergenceError,
    GraphTemplate,
    ReducibleOperatorError,
    adjacency,
    attractor_weights,
    cyclic_classes,
    disjoint_union,
    example_g2,
    example_g3,
    find_attractor,
    imprimitivity_index,
    is_irreducible,
    is_strongly_connected,
    random_graph,
    spectral_projection,
    truncate,
)
from netflow.operator import l1

from .conftest import graph_from_seed, seeds

half = Fraction(1, 2)


# -- independent oracles ----------------------------------------------------


def support_digraph(B: ColumnStochasticOperator) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(range(B.dim))
    for j, col in enumerate(B.columns):
        for i, v in col.items():
            if v:
                g.add_edge(j, i)
    return g


def cycle_gcd(B: ColumnStochasticOperator) -> int:
    return reduce(math.gcd, (len(c) for c in nx.simple_cycles(support_digraph(B))), 0)


def peripheral_count(B: ColumnStochasticOperator) -> int:
    ev = np.linalg.eigvals(B.to_numpy())
    return int(np.sum(np.abs(ev) > 1 - 1e-6))


def subdominant_modulus(B: ColumnStochasticOperator) -> float:
    ev = np.abs(np.linalg.eigvals(B.to_numpy()))
    inner = ev[ev < 1 - 1e-6]
    return float(inner.max()) if inner.size else 0.0


def paths_into(spec, v, W, L) -> Fraction:
    """Total weight of paths with 1..L edges from v ending in W, by explicit enumeration."""
    total = Fraction(0)
    stack = [(v, Fraction(1), 0)]
    while stack:
        u, w, depth = stack.pop()
        if depth == L:
            continue
        for e in spec.out_edges(u):
            nw = w * e.weight
            if e.head in W:
                total += nw
            stack.append((e.head, nw, depth + 1))
    return total


# -- operator ---------------------------------------------------------------


class TestApply:
    def test_g2(self):
        assert adjacency(example_g2()).apply({0: 1}) == {1: 1}

    def test_zero(self):
        assert adjacency(example_g3()).apply({}) == {}

    def test_g3(self):
        y = adjacency(example_g3()).apply({0: Fraction(1)})
        assert y == {1: half, 2: half}
        assert l1(y) == 1

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            adjacency(example_g2()).apply({5: 1})

    @given(seeds)
    def test_l1_preserved_on_positive_contracted_on_signed(self, seed):
        rng = random.Random(seed)
        B = adjacency(random_graph(rng))
        x = {j: Fraction(rng.randint(0, 5), rng.randint(1, 5)) for j in range(B.dim)}
        assert l1(B.apply(x)) == l1(x)
        y = {j: Fraction(rng.randint(-5, 5), rng.randint(1, 5)) for j in range(B.dim)}
        assert l1(B.apply(y)) <= l1(y)

    def test_power_cache_consistent(self):
        B = adjacency(example_g3())
        assert B.power(5) == B.matmul(B.power(4))
        assert B.power(0) == ColumnStochasticOperator.identity(4)


# -- irreducibility and period ----------------------------------------------


class TestIrreducibility:
    def test_examples(self):
        assert is_irreducible(adjacency(truncate(GraphTemplate("cycle", (3,)), 1)))
        assert is_irreducible(adjacency(example_g3()))
        assert not is_irreducible(adjacency(disjoint_union(example_g2(), example_g2())))

    @given(seeds)
    def test_matches_scc_oracle_and_graph_connectivity(self, seed):
        spec = graph_from_seed(seed, strongly_connected=None)
        B = adjacency(spec)
        oracle = nx.is_strongly_connected(support_digraph(B))
        assert is_irreducible(B) == oracle == is_strongly_connected(spec)


class TestPeriod:
    @pytest.mark.parametrize("spec, k", [
        (truncate(GraphTemplate("cycle", (3,)), 1), 3),
        (example_g2(), 2),
        (example_g3(), 1),
        (truncate(GraphTemplate("mixed-cycles", (2, 4)), 1), 2),
        (truncate(GraphTemplate("mixed-cycles", (3, 6)), 1), 3),
    ])
    def test_known(self, spec, k):
        assert imprimitivity_index(adjacency(spec)) == k

    def test_reducible_rejected(self):
        with pytest.raises(ReducibleOperatorError):
            imprimitivity_index(adjacency(disjoint_union(example_g2(), example_g2())))

    @given(seeds)
    def test_cycle_gcd_and_eigen_oracles(self, seed):
        B = adjacency(graph_from_seed(seed))
        k = imprimitivity_index(B)
        assert k == cycle_gcd(B)
        assert k == peripheral_count(B)

    @given(seeds)
    def test_cyclic_classes_shift_by_one(self, seed):
        B = adjacency(graph_from_seed(seed))
        k = imprimitivity_index(B)
        cls = cyclic_classes(B, k)
        for j, targets in enumerate(B.support_successors()):
            assert all(cls[i] == (cls[j] + 1) % k for i in targets)


# -- attractors -------------------------------------------------------------


class TestAttractor:
    def test_g3(self):
        cert = find_attractor(example_g3(), 5, 3)
        assert (cert.W, cert.L, cert.delta) == ((0,), 2, half)

    def test_cycle3(self):
        # paths need at least one edge, so v0 itself needs the full lap
        cert = find_attractor(truncate(GraphTemplate("cycle", (3,)), 1), 5, 1)
        assert (cert.W, cert.L, cert.delta) == ((0,), 3, 1)

    def test_two_disjoint_cycles_none(self):
        spec = disjoint_union(example_g2(), example_g2())
        assert find_attractor(spec, 20, 1) is None

    def test_ladder_truncation(self):
        spec = truncate(GraphTemplate("ladder"), 4)
        cert = find_attractor(spec, 20, 1)
        assert cert.W == (0,)
        for v in spec.vertices:
            assert paths_into(spec, v, {0}, cert.L) >= cert.delta

    @given(seeds)
    def test_delta_matches_enumeration(self, seed):
        spec = graph_from_seed(seed)
        cert = find_attractor(spec, spec.n_vertices + 1, 2)
        assert cert is not None
        W = set(cert.W)
        by_path = {v: paths_into(spec, v, W, cert.L) for v in spec.vertices}
        assert by_path == attractor_weights(spec, cert.W, cert.L)
        assert cert.delta == min(by_path.values()) > 0
        if cert.L > 1:
            # minimality in L: one step shorter some vertex misses W
            assert min(paths_into(spec, v, W, cert.L - 1) for v in spec.vertices) == 0


# -- spectral projection ----------------------------------------------------


class TestProjection:
    def test_g2(self):
        dec = spectral_projection(adjacency(example_g2()))
        assert dec.k == 2
        assert np.array_equal(dec.P, np.eye(2))
        assert dec.rho == 0

    def test_cycle3(self):
        dec = spectral_projection(adjacency(truncate(GraphTemplate("cycle", (3,)), 1)))
        assert np.array_equal(dec.P, np.eye(3))
        assert dec.rho == 0
        assert len(dec.peripheral_eigenvalues) == 3

    def test_g3_stationary(self):
        B = adjacency(example_g3())
        pi = {0: Fraction(2, 5), 1: Fraction(1, 5), 2: Fraction(1, 5), 3: Fraction(1, 5)}
        assert B.apply(pi) == pi
        # linear-solve oracle for pi
        M = B.to_numpy() - np.eye(4)
        M[-1] = 1
        rhs = np.zeros(4)
        rhs[-1] = 1
        assert np.allclose(np.linalg.solve(M, rhs), [0.4, 0.2, 0.2, 0.2], atol=1e-14)
        dec = spectral_projection(B)
        expected = np.outer([float(pi[i]) for i in range(4)], np.ones(4))
        assert np.abs(dec.P - expected).sum(axis=0).max() < 1e-9
        # rho is a fitted estimate; a longer run sharpens it
        assert dec.rho == pytest.approx(subdominant_modulus(B), abs=1e-2)
        fine = spectral_projection(B, tol=1e-13)
        assert fine.rho == pytest.approx(subdominant_modulus(B), abs=1e-4)

    @given(seeds)
    def test_invariants(self, seed):
        B = adjacency(graph_from_seed(seed))
        tol = 1e-10
        dec = spectral_projection(B, tol=tol)
        inv = dec.invariants(B)
        assert inv["idempotence"] <= 10 * tol
        assert inv["commutation"] <= 10 * tol
        assert inv["fixed_by_Bk"] <= 10 * tol
        assert inv["min_entry"] >= -1e-12
        assert np.abs(dec.P).sum(axis=0).min() >= 1 / B.dim - 1e-8
        assert dec.rho < 1

    def test_peripheral_roots(self):
        dec = spectral_projection(adjacency(example_g2()))
        z = np.array(dec.peripheral_eigenvalues)
        assert np.allclose(np.sort_complex(z), [-1, 1])

    def test_reducible_rejected(self):
        with pytest.raises(ReducibleOperatorError):
            spectral_projection(adjacency(disjoint_union(example_g2(), example_g2())), k=1)

    def test_nonconvergence_reports_residual(self):
        with pytest.raises(ConvergenceError) as exc:
            spectral_projection(adjacency(example_g3()), tol=1e-14, max_iter=3)
        assert exc.value.residual > 0
        assert exc.value.iterations == 3

    def test_json(self):
        doc = spectral_projection(adjacency(example_g2())).to_json()
        assert set(doc) == {"k", "peripheral", "rho", "residual", "iterations"}
        assert doc["k"] == 2
