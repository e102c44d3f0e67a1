"""Directed weighted graphs, their validation and incidence/adjacency operators.

Vertices and edges carry dense 0-based integer ids fixed by input order.
All weights are :class:`fractions.Fraction`; floating point never enters here.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .operator import ColumnStochasticOperator, SparseColumns


@dataclass(frozen=True)
class Edge:
    id: int
    tail: int
    head: int
    weight: Fraction
    velocity: Optional[Fraction] = None


@dataclass(frozen=True)
class GraphSpec:
    """A finite directed weighted graph G = (V, E).

    ``velocity_bounds`` is the pair (c_min, c_max) the per-edge velocities
    must respect; it is only meaningful when velocities are present.
    """

    vertices: tuple[int, ...]
    edges: tuple[Edge, ...]
    velocity_bounds: Optional[tuple[Fraction, Fraction]] = None

    @classmethod
    def from_edges(
        cls,
        n_vertices: int,
        edges: Iterable[Sequence],
        velocities: Optional[Sequence] = None,
        velocity_bounds: Optional[tuple] = None,
    ) -> "GraphSpec":
        """Build a spec from ``(tail, head, weight)`` triples; edge ids follow order."""
        built = []
        for idx, (tail, head, weight) in enumerate(edges):
            vel = None if velocities is None else Fraction(velocities[idx])
            built.append(Edge(idx, int(tail), int(head), Fraction(weight), vel))
        bounds = None
        if velocity_bounds is not None:
            bounds = (Fraction(velocity_bounds[0]), Fraction(velocity_bounds[1]))
        elif velocities is not None:
            vs = [Fraction(v) for v in velocities]
            bounds = (min(vs), max(vs)) if vs else None
        return cls(tuple(range(n_vertices)), tuple(built), bounds)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def has_velocities(self) -> bool:
        return any(e.velocity is not None for e in self.edges)

    def out_edges(self, v: int) -> list[Edge]:
        return [e for e in self.edges if e.tail == v]

    def in_edges(self, v: int) -> list[Edge]:
        return [e for e in self.edges if e.head == v]

    def with_velocities(self, velocities: Sequence, bounds: Optional[tuple] = None) -> "GraphSpec":
        vs = [Fraction(v) for v in velocities]
        if len(vs) != self.n_edges:
            raise ValueError(f"expected {self.n_edges} velocities, got {len(vs)}")
        edges = tuple(Edge(e.id, e.tail, e.head, e.weight, v) for e, v in zip(self.edges, vs))
        if bounds is None:
            bounds = (min(vs), max(vs))
        return GraphSpec(self.vertices, edges, (Fraction(bounds[0]), Fraction(bounds[1])))


@dataclass(frozen=True)
class Violation:
    kind: str
    subject: str
    message: str

    def __str__(self) -> str:
        return self.message


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def messages(self) -> list[str]:
        return [v.message for v in self.violations]

    def __contains__(self, text: str) -> bool:
        return any(text in v.message for v in self.violations)


class InvalidGraphError(ValueError):
    """Raised when an operation needs a valid graph and gets an invalid one."""

    def __init__(self, report: ValidationReport):
        self.report = report
        super().__init__("invalid graph: " + "; ".join(report.messages()))


def validate_graph(spec: GraphSpec) -> ValidationReport:
    """Collect every structural violation of ``spec``.

    Checks, in order: dense ids, endpoints, loops, multi-edges, weight
    positivity, non-degeneracy, exact weight conservation at each vertex and
    velocity bounds. Violations are data; nothing is raised.
    """
    out: list[Violation] = []

    def add(kind, subject, message):
        out.append(Violation(kind, subject, message))

    if tuple(spec.vertices) != tuple(range(len(spec.vertices))):
        add("ids", "vertices", "vertex ids are not dense 0..n-1")
    if tuple(e.id for e in spec.edges) != tuple(range(len(spec.edges))):
        add("ids", "edges", "edge ids are not dense 0..m-1 in input order")

    vset = set(spec.vertices)
    seen: dict[tuple[int, int], int] = {}
    for e in spec.edges:
        if e.tail not in vset or e.head not in vset:
            add("endpoint", f"e{e.id}", f"edge e{e.id} has an unknown endpoint")
            continue
        if e.tail == e.head:
            add("loop", f"v{e.tail}", f"loop at v{e.tail} (edge e{e.id})")
        pair = (e.tail, e.head)
        if pair in seen:
            add("multi-edge", f"e{e.id}",
                f"multi-edge v{e.tail}->v{e.head} (edges e{seen[pair]}, e{e.id})")
        else:
            seen[pair] = e.id
        if e.weight <= 0:
            add("weight", f"e{e.id}", f"nonpositive weight {e.weight} on e{e.id}")

    n_in = {v: 0 for v in spec.vertices}
    n_out = {v: 0 for v in spec.vertices}
    wsum = {v: Fraction(0) for v in spec.vertices}
    for e in spec.edges:
        if e.tail in vset and e.head in vset:
            n_out[e.tail] += 1
            n_in[e.head] += 1
            wsum[e.tail] += e.weight
    for v in spec.vertices:
        if n_in[v] == 0 or n_out[v] == 0:
            add("degenerate", f"v{v}", f"degenerate: v{v} (in={n_in[v]}, out={n_out[v]})")
        if n_out[v] and wsum[v] != 1:
            add("weight-sum", f"v{v}", f"weight sum at v{v} is {wsum[v]}, not 1")

    vels = [e.velocity for e in spec.edges]
    if any(v is not None for v in vels):
        if any(v is None for v in vels):
            add("velocity", "edges", "velocities given for some edges only")
        bounds = spec.velocity_bounds
        if bounds is not None and not (0 < bounds[0] <= bounds[1]):
            add("velocity", "bounds", f"velocity bounds {bounds[0]}, {bounds[1]} are not 0 < c_min <= c_max")
        for e in spec.edges:
            if e.velocity is None:
                continue
            if e.velocity <= 0:
                add("velocity", f"e{e.id}", f"nonpositive velocity {e.velocity} on e{e.id}")
            elif bounds is not None and not (bounds[0] <= e.velocity <= bounds[1]):
                add("velocity", f"e{e.id}", f"velocity {e.velocity} on e{e.id} outside [{bounds[0]}, {bounds[1]}]")
    return ValidationReport(tuple(out))


def require_valid(spec: GraphSpec) -> None:
    report = validate_graph(spec)
    if not report.ok:
        raise InvalidGraphError(report)


@dataclass(frozen=True)
class IncidenceMatrices:
    """Incidence matrices as sparse columns indexed vertices x edges."""

    phi_plus: SparseColumns
    phi_minus: SparseColumns
    phi_w_minus: SparseColumns


def incidence_matrices(spec: GraphSpec) -> IncidenceMatrices:
    n = spec.n_vertices
    plus = tuple({e.head: Fraction(1)} for e in spec.edges)
    minus = tuple({e.tail: Fraction(1)} for e in spec.edges)
    w_minus = tuple({e.tail: e.weight} for e in spec.edges)
    return IncidenceMatrices(
        SparseColumns(n, plus), SparseColumns(n, minus), SparseColumns(n, w_minus)
    )


def build_operators(spec: GraphSpec) -> tuple[IncidenceMatrices, ColumnStochasticOperator]:
    """Incidence matrices and the weighted line-graph adjacency B = (Phi_w^-)^T Phi^+.

    Raises
    ------
    InvalidGraphError
        If ``spec`` fails :func:`validate_graph`; the report is attached.
    """
    require_valid(spec)
    inc = incidence_matrices(spec)
    m = spec.n_edges
    # (Phi_w^-)^T Phi^+ column by column: column j collects, for each vertex k
    # with Phi^+[k, j] != 0, the row k of Phi_w^- transposed.
    rows_by_vertex: dict[int, list[tuple[int, Fraction]]] = {}
    for i, col in enumerate(inc.phi_w_minus.columns):
        for k, w in col.items():
            rows_by_vertex.setdefault(k, []).append((i, w))
    cols = []
    for j, col in enumerate(inc.phi_plus.columns):
        out: dict[int, Fraction] = {}
        for k, a in col.items():
            for i, w in rows_by_vertex.get(k, ()):
                out[i] = out.get(i, Fraction(0)) + w * a
        cols.append({i: v for i, v in out.items() if v != 0})
    return inc, ColumnStochasticOperator(m, tuple(cols))


def adjacency(spec: GraphSpec) -> ColumnStochasticOperator:
    return build_operators(spec)[1]


def is_strongly_connected(spec: GraphSpec) -> bool:
    """Strong connectivity of the vertex digraph (forward and backward reach from v0)."""
    if spec.n_vertices == 0:
        return False
    fwd: dict[int, list[int]] = {v: [] for v in spec.vertices}
    bwd: dict[int, list[int]] = {v: [] for v in spec.vertices}
    for e in spec.edges:
        fwd[e.tail].append(e.head)
        bwd[e.head].append(e.tail)
    root = spec.vertices[0]
    return len(_reach(fwd, root)) == spec.n_vertices and len(_reach(bwd, root)) == spec.n_vertices


def _reach(adj: dict[int, list[int]], root: int) -> set[int]:
    seen = {root}
    stack = [root]
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def disjoint_union(a: GraphSpec, b: GraphSpec) -> GraphSpec:
    """Place ``b`` after ``a``; ids of ``b`` are offset to stay dense."""
    nv, ne = a.n_vertices, a.n_edges
    edges = list(a.edges) + [
        Edge(e.id + ne, e.tail + nv, e.head + nv, e.weight, e.velocity) for e in b.edges
    ]
    return GraphSpec(tuple(range(nv + b.n_vertices)), tuple(edges), a.velocity_bounds or b.velocity_bounds)


def example_g2() -> GraphSpec:
    """Two vertices, one edge each way."""
    return GraphSpec.from_edges(2, [(0, 1, 1), (1, 0, 1)])


def example_g3() -> GraphSpec:
    """Three vertices with a 2-cycle and a 3-cycle through v0 (aperiodic)."""
    half = Fraction(1, 2)
    return GraphSpec.from_edges(3, [(0, 1, 1), (1, 0, half), (1, 2, half), (2, 0, 1)])
