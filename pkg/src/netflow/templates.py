"""Deterministic graph templates, their finite truncations, and random test graphs.

An infinite graph is represented by a rule that produces consistent finite
truncations. ``truncate(template, r + 1)`` contains every non-wrap edge of
``truncate(template, r)`` with the same id, endpoints and weight.

Built-in templates
------------------
cycle(n)
    The directed n-cycle with unit weights. Finite; ignores the radius.
mixed-cycles(a, b)
    A cycle of length ``a`` and one of length ``b`` glued at v0, which splits
    its outgoing mass 1/2 : 1/2. Finite; period gcd(a, b).
ladder
    Infinite chain of cells ``i = 0, 1, 2, ...`` with vertices
    ``a_i = 2i`` and ``b_i = 2i + 1``. Edges: ``a_i -> b_i`` (rung),
    ``b_i -> a_{i+1}`` (forward) and, for ``i >= 1``, ``a_i -> a_0``
    (return). ``a_0`` sends everything down its rung, every other ``a_i``
    splits 1/2 : 1/2 between rung and return. ``{a_0}`` is an attractor of
    the infinite graph with L = 3, delta = 1/2. The truncation at radius r
    keeps cells ``0..r-1``; the forward edge of the last cell becomes the
    wrap edge ``b_{r-1} -> a_0`` with unchanged id and weight.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from .graph import Edge, GraphSpec, validate_graph


@dataclass(frozen=True)
class GraphTemplate:
    name: str
    params: tuple[int, ...] = ()

    def __str__(self) -> str:
        if not self.params:
            return self.name
        return f"{self.name}:{','.join(map(str, self.params))}"

    @classmethod
    def parse(cls, text: str) -> "GraphTemplate":
        """Parse ``name`` or ``name:p1,p2`` (``name(p1,p2)`` is accepted too)."""
        text = text.strip()
        if "(" in text and text.endswith(")"):
            name, rest = text[:-1].split("(", 1)
        elif ":" in text:
            name, rest = text.split(":", 1)
        else:
            name, rest = text, ""
        params = tuple(int(p) for p in rest.split(",") if p.strip())
        return cls(name.strip(), params)


def _cycle(params: tuple[int, ...], radius: int) -> tuple[GraphSpec, tuple[int, ...]]:
    (n,) = params
    if n < 2:
        raise ValueError("cycle needs n >= 2")
    return GraphSpec.from_edges(n, [(i, (i + 1) % n, 1) for i in range(n)]), ()


def _mixed_cycles(params: tuple[int, ...], radius: int) -> tuple[GraphSpec, tuple[int, ...]]:
    a, b = params
    if a < 2 or b < 2:
        raise ValueError("mixed-cycles needs both lengths >= 2")
    half = Fraction(1, 2)
    edges = []
    # first cycle 0 -> 1 -> ... -> a-1 -> 0
    chain_a = [0] + list(range(1, a)) + [0]
    # second cycle 0 -> a -> ... -> a+b-2 -> 0
    chain_b = [0] + list(range(a, a + b - 1)) + [0]
    for chain in (chain_a, chain_b):
        for u, v in zip(chain, chain[1:]):
            edges.append((u, v, half if u == 0 else 1))
    return GraphSpec.from_edges(a + b - 1, edges), ()


def _ladder(params: tuple[int, ...], radius: int) -> tuple[GraphSpec, tuple[int, ...]]:
    if params:
        raise ValueError("ladder takes no parameters; use the radius")
    half = Fraction(1, 2)
    edges: list[Edge] = []

    def add(tail, head, weight):
        edges.append(Edge(len(edges), tail, head, Fraction(weight)))

    wrap = ()
    for i in range(radius):
        a, b = 2 * i, 2 * i + 1
        if i == 0:
            add(a, b, 1)
        else:
            add(a, b, half)
            add(a, 0, half)
        if i + 1 < radius:
            add(b, 2 * (i + 1), 1)
        else:
            add(b, 0, 1)
            wrap = (len(edges) - 1,)
    return GraphSpec(tuple(range(2 * radius)), tuple(edges)), wrap


_GENERATORS: dict[str, Callable] = {
    "cycle": _cycle,
    "mixed-cycles": _mixed_cycles,
    "ladder": _ladder,
}

FINITE_TEMPLATES = frozenset({"cycle", "mixed-cycles"})


def template_names() -> list[str]:
    return sorted(_GENERATORS)


def _generate(template: GraphTemplate, radius: int):
    if radius < 1:
        raise ValueError("radius must be >= 1")
    try:
        gen = _GENERATORS[template.name]
    except KeyError:
        raise ValueError(
            f"unknown template {template.name!r}; known: {', '.join(template_names())}"
        ) from None
    return gen(template.params, radius)


def truncate(template: GraphTemplate, radius: int) -> GraphSpec:
    """Finite truncation of ``template`` at ``radius`` (>= 1)."""
    return _generate(template, radius)[0]


def wrap_edges(template: GraphTemplate, radius: int) -> tuple[int, ...]:
    """Ids of the edges that close off the boundary of ``truncate(template, radius)``."""
    return _generate(template, radius)[1]


def random_graph(
    rng: random.Random,
    max_edges: int = 12,
    strongly_connected: Optional[bool] = None,
    max_denominator: int = 6,
) -> GraphSpec:
    """A random valid graph with at most ``max_edges`` edges.

    With ``strongly_connected=True`` the graph is built around a random
    Hamiltonian cycle. With ``False`` it is two strongly connected blocks
    joined by a one-way bridge. ``None`` draws out-edges freely, so both
    outcomes occur.
    """
    if strongly_connected is None:
        for _ in range(1000):
            spec = _free_graph(rng, max_edges, max_denominator)
            if spec is not None:
                return spec
        raise RuntimeError("could not draw a valid graph")
    if strongly_connected:
        n = rng.randint(2, max(2, min(6, max_edges // 2 + 1)))
        return _around_cycle(rng, n, max_edges, max_denominator)
    n1 = rng.randint(2, 3)
    n2 = rng.randint(2, 3)
    budget = max_edges - 1
    g1 = _around_cycle(rng, n1, budget // 2, max_denominator)
    g2 = _around_cycle(rng, n2, budget - g1.n_edges, max_denominator)
    pairs = [(e.tail, e.head) for e in g1.edges] + [
        (e.tail + n1, e.head + n1) for e in g2.edges
    ]
    src = rng.randrange(n1)
    dst = n1 + rng.randrange(n2)
    pairs.append((src, dst))
    return _weighted(rng, n1 + n2, pairs, max_denominator)


def _around_cycle(rng, n, max_edges, max_denominator) -> GraphSpec:
    order = list(range(n))
    rng.shuffle(order)
    pairs = {(order[i], order[(i + 1) % n]) for i in range(n)}
    candidates = [(u, v) for u in range(n) for v in range(n) if u != v and (u, v) not in pairs]
    rng.shuffle(candidates)
    extra = rng.randint(0, max(0, min(len(candidates), max_edges - n)))
    pairs.update(candidates[:extra])
    return _weighted(rng, n, sorted(pairs), max_denominator)


def _free_graph(rng, max_edges, max_denominator) -> Optional[GraphSpec]:
    n = rng.randint(2, 6)
    pairs = set()
    for u in range(n):
        k = rng.randint(1, min(3, n - 1))
        for v in rng.sample([w for w in range(n) if w != u], k):
            pairs.add((u, v))
    for v in range(n):
        if not any(h == v for _, h in pairs):
            pairs.add((rng.choice([u for u in range(n) if u != v]), v))
    if len(pairs) > max_edges:
        return None
    spec = _weighted(rng, n, sorted(pairs), max_denominator)
    return spec if validate_graph(spec).ok else None


def _weighted(rng, n, pairs, max_denominator) -> GraphSpec:
    by_tail: dict[int, list[int]] = {}
    for idx, (u, _) in enumerate(pairs):
        by_tail.setdefault(u, []).append(idx)
    weights: dict[int, Fraction] = {}
    for u, idxs in by_tail.items():
        raw = [rng.randint(1, max_denominator) for _ in idxs]
        total = sum(raw)
        for idx, r in zip(idxs, raw):
            weights[idx] = Fraction(r, total)
    edges = [(u, v, weights[i]) for i, (u, v) in enumerate(pairs)]
    return GraphSpec.from_edges(n, edges)
