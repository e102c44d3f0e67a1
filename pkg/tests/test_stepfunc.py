from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given

from netflow import EdgeStepFunction, Piecewise, l1_norm, linf_norm
from netflow.stepfunc import from_cells

from .conftest import random_step, seeds

half = Fraction(1, 2)


class TestPiecewise:
    def test_canonical_merges_and_trims(self):
        p = Piecewise.make([0, "1/4", "1/2", "3/4", 1], [0, 2, 2, 0])
        assert p.breaks == (Fraction(1, 4), Fraction(3, 4))
        assert p.values == (2,)

    def test_half_open(self):
        p = Piecewise.make([0, half, 1], [1, 2])
        assert p(0) == 1
        assert p(half) == 2
        assert p(1) == 0
        assert p.left_limit(1) == 2
        assert p.left_limit(half) == 1

    def test_float_breaks_rejected(self):
        with pytest.raises(TypeError):
            Piecewise.make([0, 0.5, 1], [1, 2])

    def test_bad_breaks(self):
        with pytest.raises(ValueError):
            Piecewise((Fraction(1), Fraction(0)), (1,))
        with pytest.raises(ValueError):
            Piecewise((Fraction(0), Fraction(1)), (1, 2))

    def test_restrict_and_integral(self):
        p = Piecewise.constant(1).restrict(Fraction(1, 4), Fraction(3, 4))
        assert p.integral() == half

    def test_affine(self):
        p = Piecewise.constant(3, 0, half).affine(2, 0)
        assert p.breaks == (0, 1)

    def test_arithmetic_equality_is_functional(self):
        a = Piecewise.make([0, half, 1], [1, 1])
        b = Piecewise.constant(1)
        assert a == b
        assert (a - b).is_zero


class TestEdgeStepFunction:
    def test_norms_indicator(self):
        f = EdgeStepFunction.indicator(0)
        assert l1_norm(f) == 1
        assert linf_norm(f) == 1

    def test_norms_zero(self):
        assert l1_norm(EdgeStepFunction.zero()) == 0
        assert linf_norm(EdgeStepFunction.zero()) == 0

    def test_norms_mixed(self):
        f = EdgeStepFunction.from_arrays({0: ([0, half], [half]), 1: ([0, 1], [1])})
        assert l1_norm(f) == Fraction(5, 4)
        assert linf_norm(f) == Fraction(3, 2)

    def test_support_outside_unit_interval(self):
        with pytest.raises(ValueError):
            EdgeStepFunction({0: Piecewise.constant(1, 0, 2)})

    def test_value_at_one_uses_last_piece(self):
        f = EdgeStepFunction.indicator(2, half, 1, 7)
        assert f.value(1) == {2: 7}
        assert f.value(Fraction(1, 4)) == {}

    @given(seeds)
    def test_cells_roundtrip(self, seed):
        f = random_step(random.Random(seed), 5, signed=True)
        assert from_cells(list(f.cells())) == f

    @given(seeds)
    def test_linear_algebra(self, seed):
        rng = random.Random(seed)
        f, g = random_step(rng, 4, True), random_step(rng, 4, True)
        assert (f + g) - g == f
        assert f.scale(2) == f + f
        assert l1_norm(f + g) <= l1_norm(f) + l1_norm(g)
        assert linf_norm(f) <= linf_norm(f + g) + linf_norm(g)
