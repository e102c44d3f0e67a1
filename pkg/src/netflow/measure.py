"""l1-valued measures on [0, 1]: Dirac atoms plus a step density.

The j-th coordinate of a measure is the scalar measure
``sum_p atoms[j][p] * delta_p + density_j(s) ds``. This class is closed
under restriction, translation, the extended flow S(t) and multiplication
by matrices, and pairs exactly with continuous piecewise-linear test
functions.

Mass at position p moves to p - t. Under S(t) with ``n = floor(t)`` and
``tau = t - n``, mass on ``[tau, 1]`` moves left by ``tau`` under B^n, and
mass on ``[0, tau)`` moves to ``p + 1 - tau`` under B^(n+1). An atom sitting
exactly at ``p = tau`` belongs to the first part. Embedded step functions
therefore evolve exactly as under T(t). The semigroup law is exact for
measures without an atom at position 1: such an atom is still at 1 after
S(1), but S(1/2) S(1/2) carries it to 0.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .operator import ColumnStochasticOperator
from .stepfunc import ONE, ZERO, EdgeStepFunction, _frac, from_cells


def _clean_atoms(atoms: Mapping[int, Mapping]) -> dict[int, dict[Fraction, object]]:
    out = {}
    for j, per in atoms.items():
        kept = {_frac(p): w for p, w in per.items() if w != 0}
        if kept:
            out[int(j)] = dict(sorted(kept.items()))
    return dict(sorted(out.items()))


@dataclass(frozen=True)
class EdgeMeasure:
    atoms: Mapping[int, Mapping[Fraction, object]] = field(default_factory=dict)
    density: EdgeStepFunction = field(default_factory=EdgeStepFunction)

    def __post_init__(self):
        clean = _clean_atoms(self.atoms)
        for j, per in clean.items():
            for p in per:
                if not 0 <= p <= 1:
                    raise ValueError(f"atom position {p} on edge {j} outside [0, 1]")
        object.__setattr__(self, "atoms", clean)

    @classmethod
    def dirac(cls, pos, weights: Mapping[int, object]) -> "EdgeMeasure":
        """delta_pos tensor w for a sparse vector ``w``."""
        p = _frac(pos)
        return cls({j: {p: w} for j, w in weights.items()})

    @classmethod
    def zero(cls) -> "EdgeMeasure":
        return cls()

    @property
    def is_zero(self) -> bool:
        return not self.atoms and self.density.is_zero

    @property
    def active_edges(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.atoms) | set(self.density.active_edges)))

    def atom_vectors(self) -> dict[Fraction, dict[int, object]]:
        """Atoms grouped by position: ``{pos: {edge: weight}}``."""
        out: dict[Fraction, dict[int, object]] = {}
        for j, per in self.atoms.items():
            for p, w in per.items():
                out.setdefault(p, {})[j] = w
        return dict(sorted(out.items()))

    def __add__(self, other: "EdgeMeasure") -> "EdgeMeasure":
        atoms: dict[int, dict] = {j: dict(per) for j, per in self.atoms.items()}
        for j, per in other.atoms.items():
            mine = atoms.setdefault(j, {})
            for p, w in per.items():
                mine[p] = mine.get(p, 0) + w
        return EdgeMeasure(atoms, self.density + other.density)

    def __neg__(self) -> "EdgeMeasure":
        return self.scale(-1)

    def __sub__(self, other: "EdgeMeasure") -> "EdgeMeasure":
        return self + (-other)

    def scale(self, c) -> "EdgeMeasure":
        return EdgeMeasure(
            {j: {p: c * w for p, w in per.items()} for j, per in self.atoms.items()},
            self.density.scale(c),
        )

    def total(self) -> dict[int, object]:
        """mu([0, 1]) as a sparse vector."""
        out: dict[int, object] = {}
        for j, per in self.atoms.items():
            out[j] = out.get(j, 0) + sum(per.values())
        for j, p in self.density.components.items():
            out[j] = out.get(j, 0) + p.integral()
        return {j: v for j, v in out.items() if v != 0}


def variation(mu: EdgeMeasure):
    """Total variation ||mu||: sum of atom weight norms plus the integral of |density|."""
    atoms = sum((abs(w) for per in mu.atoms.values() for w in per.values()), ZERO)
    dens = sum((p.integral(abs) for p in mu.density.components.values()), ZERO)
    return atoms + dens


def embed(f: EdgeStepFunction) -> EdgeMeasure:
    """The atom-free measure f ds."""
    return EdgeMeasure({}, f)


def restrict(mu: EdgeMeasure, a, b, closed: bool = False) -> EdgeMeasure:
    """mu restricted to [a, b) (or [a, b] with ``closed=True``)."""
    a, b = _frac(a), _frac(b)

    def keep(p):
        return a <= p < b or (closed and p == b)

    atoms = {j: {p: w for p, w in per.items() if keep(p)} for j, per in mu.atoms.items()}
    density = mu.density.map_components(lambda p: p.restrict(a, b))
    return EdgeMeasure(atoms, density)


def _translate(mu: EdgeMeasure, d: Fraction) -> EdgeMeasure:
    atoms = {j: {p + d: w for p, w in per.items()} for j, per in mu.atoms.items()}
    density = mu.density.map_components(lambda p: p.translate(d))
    return EdgeMeasure(atoms, density)


def shift(mu: EdgeMeasure, t) -> EdgeMeasure:
    """delta_{-t} * mu: mass at p moves to p - t.

    Raises ``ValueError`` if mass would leave [0, 1]; restrict first.
    """
    return _translate(mu, -_frac(t))


def nilpotent_shift(mu: EdgeMeasure, t) -> EdgeMeasure:
    """tau_0(t) mu = delta_{-t} * mu|_[t, 1]; zero once t > 1."""
    t = _frac(t)
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t > 1:
        return EdgeMeasure()
    return shift(restrict(mu, t, 1, closed=True), t)


def multiply(mu: EdgeMeasure, M) -> EdgeMeasure:
    """Apply a matrix to every weight and density value of ``mu``.

    ``M`` is a :class:`ColumnStochasticOperator` (exact) or a 2-D numpy array.
    """
    apply = _as_apply(M)
    atoms: dict[int, dict] = {}
    for p, vec in mu.atom_vectors().items():
        for i, w in apply(vec).items():
            atoms.setdefault(i, {})[p] = w
    cells = []
    for a, b, vec in mu.density.cells():
        if vec:
            cells.append((a, b, apply(vec)))
    return EdgeMeasure(atoms, from_cells(cells))


def _as_apply(M):
    if isinstance(M, ColumnStochasticOperator):
        return M.apply
    arr = np.asarray(M)

    def apply(vec):
        out: dict[int, object] = {}
        for j, v in vec.items():
            col = arr[:, j]
            for i in np.nonzero(col)[0]:
                out[int(i)] = out.get(int(i), 0) + float(col[i]) * float(v)
        return {i: v for i, v in out.items() if v != 0}

    return apply


def evaluate_S(B: ColumnStochasticOperator, t, mu: EdgeMeasure) -> EdgeMeasure:
    """Extended flow S(t) mu."""
    t = _frac(t)
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t}")
    for j in mu.active_edges:
        if j >= B.dim:
            raise ValueError(f"edge {j} outside operator dimension {B.dim}")
    n = math.floor(t)
    tau = t - n
    upper = shift(restrict(mu, tau, 1, closed=True), tau)
    result = multiply(upper, B.power(n))
    if tau > 0:
        lower = _translate(restrict(mu, 0, tau), 1 - tau)
        result = result + multiply(lower, B.power(n + 1))
    return result


@dataclass(frozen=True)
class TestFunction:
    """Continuous piecewise-linear c0-valued function on [0, 1] with finite support.

    ``components[j] = (knots, values)`` with knots from 0 to 1; edges not
    listed are identically zero.
    """

    __test__ = False  # not a pytest class

    components: Mapping[int, tuple[tuple[Fraction, ...], tuple]] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for j, (knots, values) in self.components.items():
            knots = tuple(_frac(k) for k in knots)
            values = tuple(values)
            if len(knots) < 2 or knots[0] != 0 or knots[-1] != 1:
                raise ValueError("knots must run from 0 to 1")
            if any(not a < b for a, b in zip(knots, knots[1:])):
                raise ValueError("knots must be strictly increasing")
            if len(values) != len(knots):
                raise ValueError("one value per knot")
            clean[int(j)] = (knots, values)
        object.__setattr__(self, "components", clean)

    @classmethod
    def linear(cls, edges: Iterable[int], left=0, right=1) -> "TestFunction":
        return cls({j: ((ZERO, ONE), (left, right)) for j in edges})

    def value(self, j: int, s):
        if j not in self.components:
            return 0
        knots, values = self.components[j]
        if s >= 1:
            return values[-1]
        i = bisect.bisect_right(knots, s) - 1
        a, b = knots[i], knots[i + 1]
        return values[i] + (values[i + 1] - values[i]) * (s - a) / (b - a)

    def lipschitz(self):
        best = ZERO
        for knots, values in self.components.values():
            for (a, b), (u, v) in zip(zip(knots, knots[1:]), zip(values, values[1:])):
                best = max(best, abs(v - u) / (b - a))
        return best

    def sup_norm(self):
        return max((abs(v) for _, values in self.components.values() for v in values), default=ZERO)


def pair(f: TestFunction, mu: EdgeMeasure):
    """<f, mu>: atoms evaluate f, densities integrate exactly against it."""
    total = ZERO
    for j, per in mu.atoms.items():
        for p, w in per.items():
            total += f.value(j, p) * w
    for j, dens in mu.density.components.items():
        if j not in f.components:
            continue
        knots, _ = f.components[j]
        grid = sorted(set(knots) | set(dens.breaks))
        for a, b in zip(grid, grid[1:]):
            c = dens(a)
            if c == 0:
                continue
            total += c * (b - a) * (f.value(j, a) + f.value(j, b)) / 2
    return total


@dataclass(frozen=True)
class ProbeSample:
    t: Fraction
    pairing_gap: object
    tv_gap: object
    bound: object

    @property
    def ok(self) -> bool:
        return self.pairing_gap <= self.bound


def weakstar_continuity_probe(
    B: ColumnStochasticOperator, mu: EdgeMeasure, f: TestFunction, tgrid: Sequence
) -> list[ProbeSample]:
    """|<f, S(t) mu - mu>| and ||S(t) mu - mu|| along ``tgrid``.

    ``bound`` is ``Lip(f) t ||mu|| + 2 ||f||_inf ||mu|_[0, t)||``: the drift
    of mass that stays on its edge plus the mass that crossed a vertex.
    """
    lip = f.lipschitz()
    sup = f.sup_norm()
    var = variation(mu)
    out = []
    for t in tgrid:
        t = _frac(t)
        diff = evaluate_S(B, t, mu) - mu
        jump = variation(restrict(mu, 0, min(t, ONE)))
        out.append(ProbeSample(t, abs(pair(f, diff)), variation(diff), lip * t * var + 2 * sup * jump))
    return out
