"""Shared generators for random graphs, step data and measures."""
from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from netflow import EdgeMeasure, EdgeStepFunction, GraphSpec, Piecewise, random_graph

settings.register_profile(
    "default", max_examples=60, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def random_rational(rng: random.Random, lo=0, hi=1, den: int = 12) -> Fraction:
    """Uniform-ish rational in [lo, hi] with denominator dividing ``den``."""
    lo, hi = Fraction(lo), Fraction(hi)
    steps = int((hi - lo) * den)
    return lo + Fraction(rng.randint(0, steps), den)


def random_breaks(rng: random.Random, den: int = 12, max_pieces: int = 4) -> list[Fraction]:
    inner = sorted({Fraction(rng.randint(1, den - 1), den) for _ in range(rng.randint(0, max_pieces - 1))})
    return [Fraction(0)] + inner + [Fraction(1)]


def random_step(rng: random.Random, n_edges: int, signed: bool = False, den: int = 12) -> EdgeStepFunction:
    comps = {}
    for j in rng.sample(range(n_edges), rng.randint(1, n_edges)):
        bs = random_breaks(rng, den)
        lo = -3 if signed else 0
        vals = [Fraction(rng.randint(lo, 3), rng.randint(1, 4)) for _ in bs[:-1]]
        comps[j] = Piecewise.make(bs, vals)
    return EdgeStepFunction(comps)


def random_measure(rng: random.Random, n_edges: int, signed: bool = False, den: int = 12,
                   atoms_only: bool = False, positions=None) -> EdgeMeasure:
    atoms: dict[int, dict] = {}
    lo = -3 if signed else 1
    for j in rng.sample(range(n_edges), rng.randint(1, n_edges)):
        per = {}
        for _ in range(rng.randint(1, 3)):
            p = rng.choice(positions) if positions else Fraction(rng.randint(0, den - 1), den)
            w = Fraction(rng.randint(lo, 3), rng.randint(1, 4))
            if w:
                per[p] = w
        atoms[j] = per
    dens = EdgeStepFunction() if atoms_only else random_step(rng, n_edges, signed, den)
    return EdgeMeasure(atoms, dens)


def random_time(rng: random.Random, tmax: int = 5, den: int = 12) -> Fraction:
    return random_rational(rng, 0, tmax, den)


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240611)


# hypothesis strategies ----------------------------------------------------

rationals01 = st.builds(lambda a, d: Fraction(a % (d + 1), d), st.integers(0, 64), st.integers(1, 16))
times = st.builds(lambda a, d: Fraction(a, d), st.integers(0, 80), st.integers(1, 16))
seeds = st.integers(0, 2**32 - 1)


def graph_from_seed(seed: int, strongly_connected=True) -> GraphSpec:
    return random_graph(random.Random(seed), strongly_connected=strongly_connected)


def pytest_terminal_summary(terminalreporter):
    from .test_acceptance import RESULTS, TITLES

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(TITLES):
        if n in RESULTS:
            title, ok = RESULTS[n]
            terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {title}")
        else:
            terminalreporter.write_line(f"criterion {n}: FAIL  {TITLES[n]} (did not finish)")
