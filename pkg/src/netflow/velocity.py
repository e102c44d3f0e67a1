"""Rationally related velocities via edge subdivision.

With ``c`` a common multiplier of the velocities (``l_j = c / c_j`` all
integers), edge ``e_j`` is cut into a chain of ``l_j`` unit edges. The
unit-speed flow on the subdivided graph, run ``c`` times faster, is
conjugate to the variable-speed flow:

    T_C(t) = S^{-1} T~(c t) S.

``S`` is the L1-isometric stretch: on segment ``m`` of edge ``j`` (segment 0
starts at the tail, i.e. at x = 1) it takes the value ``f_j(x) / l_j`` at the
matching point ``x``. The resulting boundary condition on the original graph
is ``u(1) = C^{-1} B C u(0)``, and the conserved quantity is the plain
integral of the l1 norm.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction
from typing import Optional

from .graph import Edge, GraphSpec, adjacency, require_valid
from .operator import ColumnStochasticOperator
from .spectral import imprimitivity_index
from .stepfunc import EdgeStepFunction, Piecewise, _frac
from .flow import evaluate_T

MAX_SEGMENTS = 100_000


def minimal_multiplier(velocities) -> Fraction:
    """Smallest c > 0 with c / c_j a positive integer for every c_j.

    For ``c_j = p_j / q_j`` in lowest terms this is ``lcm(p_j) / gcd(q_j)``.
    """
    vs = [_frac(v) for v in velocities]
    if not vs or any(v <= 0 for v in vs):
        raise ValueError("velocities must be positive")
    num = 1
    den = 0
    for v in vs:
        num = num * v.numerator // math.gcd(num, v.numerator)
        den = math.gcd(den, v.denominator)
    return Fraction(num, den)


@dataclass(frozen=True)
class SubdivisionMap:
    original: GraphSpec
    multiplier: Fraction
    lengths: tuple[int, ...]
    subdivided: GraphSpec
    index_map: dict  # (edge, segment) -> new edge id

    @property
    def new_edge_count(self) -> int:
        return self.subdivided.n_edges

    @cached_property
    def operator(self) -> ColumnStochasticOperator:
        return adjacency(self.subdivided)

    def period(self) -> Fraction:
        """Period of the conjugated flow on the peripheral part: k~ / c."""
        return Fraction(imprimitivity_index(self.operator)) / self.multiplier

    def stretch(self, f: EdgeStepFunction) -> EdgeStepFunction:
        """S f on the subdivided graph."""
        comps = {}
        for j, p in f.components.items():
            ell = self.lengths[j]
            for m in range(ell):
                lo = Fraction(ell - 1 - m, ell)
                piece = p.restrict(lo, lo + Fraction(1, ell))
                if piece.is_zero:
                    continue
                # y = ell * x - (ell - 1 - m)
                comps[self.index_map[(j, m)]] = piece.affine(ell, -(ell - 1 - m)).scale(Fraction(1, ell))
        return EdgeStepFunction(comps)

    def compress(self, g: EdgeStepFunction) -> EdgeStepFunction:
        """S^{-1} g back on the original graph."""
        owner = {new: key for key, new in self.index_map.items()}
        per_edge: dict[int, Piecewise] = {}
        for new, p in g.components.items():
            j, m = owner[new]
            ell = self.lengths[j]
            # x = (y + ell - 1 - m) / ell
            back = p.affine(Fraction(1, ell), Fraction(ell - 1 - m, ell)).scale(ell)
            per_edge[j] = per_edge.get(j, Piecewise()) + back
        return EdgeStepFunction(per_edge)

    def to_json(self) -> dict:
        return {
            "c": str(self.multiplier),
            "l": list(self.lengths),
            "new_edge_count": self.new_edge_count,
            "index_map": [
                {"edge": j, "segment": m, "new_edge": new}
                for (j, m), new in sorted(self.index_map.items())
            ],
        }


def subdivide(spec: GraphSpec, multiplier=None, max_segments: int = MAX_SEGMENTS) -> SubdivisionMap:
    """Replace each edge e_j by a chain of ``l_j = c / c_j`` unit edges.

    Original vertices keep their ids; the ``l_j - 1`` interior vertices of
    each edge are appended in edge order. Segment ids of one edge are
    consecutive, segment 0 leaving the original tail with the original
    weight; interior vertices pass everything on with weight 1.

    Raises
    ------
    ValueError
        If some velocity is missing, ``multiplier`` does not make every
        ``l_j`` a positive integer, or the subdivision exceeds ``max_segments``.
    """
    require_valid(spec)
    if spec.n_edges and not all(e.velocity is not None for e in spec.edges):
        raise ValueError("every edge needs a velocity")
    vels = [e.velocity for e in spec.edges]
    c = minimal_multiplier(vels) if multiplier is None else _frac(multiplier)
    lengths = []
    for e in spec.edges:
        ell = c / e.velocity
        if ell.denominator != 1 or ell < 1:
            raise ValueError(f"c / c_{e.id} = {ell} is not a positive integer")
        lengths.append(int(ell))
    if sum(lengths) > max_segments:
        raise ValueError(f"subdivision needs {sum(lengths)} edges, limit is {max_segments}")

    next_vertex = spec.n_vertices
    edges: list[Edge] = []
    index_map = {}
    for e, ell in zip(spec.edges, lengths):
        chain = [e.tail] + list(range(next_vertex, next_vertex + ell - 1)) + [e.head]
        next_vertex += ell - 1
        for m, (u, v) in enumerate(zip(chain, chain[1:])):
            index_map[(e.id, m)] = len(edges)
            edges.append(Edge(len(edges), u, v, e.weight if m == 0 else Fraction(1)))
    sub = GraphSpec(tuple(range(next_vertex)), tuple(edges))
    require_valid(sub)
    return SubdivisionMap(spec, c, tuple(lengths), sub, index_map)


def velocity_adjacency(spec: GraphSpec) -> list[list[Fraction]]:
    """B^C = C^{-1} B C with C = diag(c_j), exact."""
    B = adjacency(spec)
    c = [e.velocity for e in spec.edges]
    return [
        [B.entry(i, j) * c[j] / c[i] for j in range(B.dim)] for i in range(B.dim)
    ]


def conjugated_evaluate_TC(smap: SubdivisionMap, t, f: EdgeStepFunction) -> EdgeStepFunction:
    """T_C(t) f = S^{-1} T~(c t) S f, exact."""
    t = _frac(t)
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t}")
    for j in f.active_edges:
        if j >= smap.original.n_edges:
            raise ValueError(f"edge {j} is not an edge of the original graph")
    return smap.compress(evaluate_T(smap.operator, smap.multiplier * t, smap.stretch(f)))
