"""Piecewise-constant functions with rational breakpoints.

:class:`Piecewise` is a scalar step function that vanishes outside
``[breaks[0], breaks[-1])``; intervals are half-open ``[b_i, b_{i+1})``.
:class:`EdgeStepFunction` is an l1-valued step function on [0, 1]: one
:class:`Piecewise` per active edge. Both are kept in a canonical form
(adjacent equal values merged, zero ends trimmed, zero components dropped),
so ``==`` is equality of the represented functions.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Optional, Sequence

ZERO = Fraction(0)
ONE = Fraction(1)


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("breakpoints must be exact (int, Fraction or 'p/q' string), got float")
    return Fraction(x)


@dataclass(frozen=True)
class Piecewise:
    breaks: tuple[Fraction, ...] = ()
    values: tuple = ()

    def __post_init__(self):
        if len(self.breaks) == 0:
            if self.values:
                raise ValueError("values without breakpoints")
            return
        if len(self.values) != len(self.breaks) - 1:
            raise ValueError("need exactly one value per interval")
        for a, b in zip(self.breaks, self.breaks[1:]):
            if not a < b:
                raise ValueError(f"breakpoints must be strictly increasing ({a} !< {b})")

    @classmethod
    def make(cls, breaks: Iterable, values: Iterable) -> "Piecewise":
        """Build and canonicalize; ``"p/q"`` string values become fractions."""
        vals = [Fraction(v) if isinstance(v, str) else v for v in values]
        return _canonical([_frac(b) for b in breaks], vals)

    @classmethod
    def constant(cls, value, a=ZERO, b=ONE) -> "Piecewise":
        return cls.make([a, b], [value])

    @property
    def is_zero(self) -> bool:
        return not self.breaks

    @property
    def support(self) -> Optional[tuple[Fraction, Fraction]]:
        return (self.breaks[0], self.breaks[-1]) if self.breaks else None

    def pieces(self):
        return zip(self.breaks, self.breaks[1:], self.values)

    def __call__(self, s) -> object:
        """Value at ``s`` with the half-open convention."""
        if not self.breaks or s < self.breaks[0] or s >= self.breaks[-1]:
            return 0
        return self.values[bisect.bisect_right(self.breaks, s) - 1]

    def left_limit(self, s) -> object:
        if not self.breaks or s <= self.breaks[0] or s > self.breaks[-1]:
            return 0
        return self.values[bisect.bisect_left(self.breaks, s) - 1]

    def on(self, grid: Sequence[Fraction]) -> list:
        """Values on consecutive intervals of ``grid``; ``grid`` must refine the breaks."""
        out = []
        for a in grid[:-1]:
            out.append(self(a))
        return out

    def restrict(self, a, b) -> "Piecewise":
        """Cut to ``[a, b)``."""
        if not self.breaks or b <= a:
            return Piecewise()
        lo, hi = max(a, self.breaks[0]), min(b, self.breaks[-1])
        if lo >= hi:
            return Piecewise()
        bs = [lo] + [x for x in self.breaks if lo < x < hi] + [hi]
        return _canonical(bs, [self(x) for x in bs[:-1]])

    def translate(self, d) -> "Piecewise":
        if not self.breaks:
            return self
        return Piecewise(tuple(b + d for b in self.breaks), self.values)

    def affine(self, scale, shift) -> "Piecewise":
        """The function ``x -> self((x - shift) / scale)`` for ``scale > 0``."""
        if scale <= 0:
            raise ValueError("scale must be positive")
        if not self.breaks:
            return self
        return Piecewise(tuple(b * scale + shift for b in self.breaks), self.values)

    def map_values(self, fn: Callable) -> "Piecewise":
        return _canonical(list(self.breaks), [fn(v) for v in self.values])

    def integral(self, fn: Callable = lambda v: v):
        return sum(((b - a) * fn(v) for a, b, v in self.pieces()), ZERO)

    def __add__(self, other: "Piecewise") -> "Piecewise":
        return _combine(self, other, lambda x, y: x + y)

    def __sub__(self, other: "Piecewise") -> "Piecewise":
        return _combine(self, other, lambda x, y: x - y)

    def __neg__(self) -> "Piecewise":
        return self.map_values(lambda v: -v)

    def scale(self, c) -> "Piecewise":
        return self.map_values(lambda v: c * v)


def _canonical(breaks: list, values: list) -> Piecewise:
    if not breaks:
        return Piecewise()
    bs = [breaks[0]]
    vs: list = []
    for b, v in zip(breaks[1:], values):
        if b == bs[-1]:
            continue
        if vs and vs[-1] == v:
            bs[-1] = b
        else:
            vs.append(v)
            bs.append(b)
    # trim zero ends
    start, stop = 0, len(vs)
    while start < stop and vs[start] == 0:
        start += 1
    while stop > start and vs[stop - 1] == 0:
        stop -= 1
    if start == stop:
        return Piecewise()
    return Piecewise(tuple(bs[start:stop + 1]), tuple(vs[start:stop]))


def _combine(f: Piecewise, g: Piecewise, op) -> Piecewise:
    grid = sorted(set(f.breaks) | set(g.breaks))
    if not grid:
        return Piecewise()
    return _canonical(grid, [op(f(a), g(a)) for a in grid[:-1]])


def merged_grid(parts: Iterable[Piecewise], extra: Iterable = ()) -> list[Fraction]:
    pts = set(extra)
    for p in parts:
        pts.update(p.breaks)
    return sorted(pts)


@dataclass(frozen=True)
class EdgeStepFunction:
    """l1-valued step function on [0, 1]: ``components[j]`` is the j-th coordinate."""

    components: Mapping[int, Piecewise] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for j, p in self.components.items():
            if not isinstance(p, Piecewise):
                raise TypeError("components must be Piecewise")
            if p.is_zero:
                continue
            lo, hi = p.support
            if lo < 0 or hi > 1:
                raise ValueError(f"component {j} is not supported in [0, 1]")
            clean[int(j)] = p
        object.__setattr__(self, "components", dict(sorted(clean.items())))

    @classmethod
    def from_arrays(cls, data: Mapping[int, tuple[Sequence, Sequence]]) -> "EdgeStepFunction":
        """``{edge: (breaks, values)}`` with breaks spanning the interval they cover."""
        return cls({j: Piecewise.make(b, v) for j, (b, v) in data.items()})

    @classmethod
    def indicator(cls, edge: int, a=ZERO, b=ONE, value=ONE) -> "EdgeStepFunction":
        return cls({edge: Piecewise.make([a, b], [value])})

    @classmethod
    def constant(cls, vector: Mapping[int, object]) -> "EdgeStepFunction":
        return cls({j: Piecewise.constant(v) for j, v in vector.items()})

    @classmethod
    def zero(cls) -> "EdgeStepFunction":
        return cls({})

    @property
    def active_edges(self) -> tuple[int, ...]:
        return tuple(self.components)

    @property
    def is_zero(self) -> bool:
        return not self.components

    def grid(self, extra: Iterable = ()) -> list[Fraction]:
        return merged_grid(self.components.values(), [ZERO, ONE, *extra])

    def value(self, s) -> dict:
        """f(s) as a sparse vector; at s = 1 the last interval's value is used."""
        s = _frac(s) if not isinstance(s, (float, Fraction)) else s
        if s == 1:
            vals = {j: p.left_limit(1) for j, p in self.components.items()}
        else:
            vals = {j: p(s) for j, p in self.components.items()}
        return {j: v for j, v in vals.items() if v != 0}

    def cells(self, extra: Iterable = ()):
        """Yield ``(a, b, vector)`` over the common refinement of all components."""
        grid = self.grid(extra)
        for a, b in zip(grid, grid[1:]):
            vec = {j: p(a) for j, p in self.components.items()}
            yield a, b, {j: v for j, v in vec.items() if v != 0}

    def map_components(self, fn: Callable[[Piecewise], Piecewise]) -> "EdgeStepFunction":
        return EdgeStepFunction({j: fn(p) for j, p in self.components.items()})

    def __add__(self, other: "EdgeStepFunction") -> "EdgeStepFunction":
        keys = set(self.components) | set(other.components)
        empty = Piecewise()
        return EdgeStepFunction(
            {j: self.components.get(j, empty) + other.components.get(j, empty) for j in keys}
        )

    def __sub__(self, other: "EdgeStepFunction") -> "EdgeStepFunction":
        return self + (-other)

    def __neg__(self) -> "EdgeStepFunction":
        return self.map_components(lambda p: -p)

    def scale(self, c) -> "EdgeStepFunction":
        return self.map_components(lambda p: p.scale(c))

    def is_nonnegative(self) -> bool:
        return all(v >= 0 for p in self.components.values() for v in p.values)


def from_cells(cells: Iterable[tuple[Fraction, Fraction, Mapping[int, object]]]) -> EdgeStepFunction:
    """Assemble an :class:`EdgeStepFunction` from ``(a, b, vector)`` cells."""
    cells = sorted(cells, key=lambda c: c[0])
    per_edge: dict[int, tuple[list, list]] = {}
    edges = set()
    for _, _, vec in cells:
        edges.update(vec)
    for j in edges:
        bs: list = []
        vs: list = []
        for a, b, vec in cells:
            if bs and bs[-1] != a:
                # gap between cells: fill with zero
                vs.append(0)
                bs.append(a)
            if not bs:
                bs.append(a)
            vs.append(vec.get(j, 0))
            bs.append(b)
        per_edge[j] = (bs, vs)
    return EdgeStepFunction({j: _canonical(bs, vs) for j, (bs, vs) in per_edge.items()})


def l1_norm(f: EdgeStepFunction):
    """Integral over [0, 1] of the l1 norm of f(s); exact for exact values."""
    return sum((p.integral(abs) for p in f.components.values()), ZERO)


def linf_norm(f: EdgeStepFunction):
    """Essential supremum over [0, 1] of the l1 norm of f(s)."""
    best = ZERO
    for _, _, vec in f.cells():
        norm = sum((abs(v) for v in vec.values()), ZERO)
        if norm > best:
            best = norm
    return best
