"""Irreducibility, period, attractors and the peripheral spectral projection of B."""
from __future__ import annotations

import cmath
import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .graph import GraphSpec, require_valid
from .operator import ColumnStochasticOperator


class ReducibleOperatorError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


def _reachable(succ: list[list[int]], root: int) -> set[int]:
    seen = {root}
    stack = [root]
    while stack:
        u = stack.pop()
        for w in succ[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def is_irreducible(B: ColumnStochasticOperator) -> bool:
    """True iff the support digraph on edge indices is strongly connected."""
    if B.dim == 0:
        return False
    succ = B.support_successors()
    pred: list[list[int]] = [[] for _ in range(B.dim)]
    for j, targets in enumerate(succ):
        for i in targets:
            pred[i].append(j)
    return len(_reachable(succ, 0)) == B.dim and len(_reachable(pred, 0)) == B.dim


def imprimitivity_index(B: ColumnStochasticOperator) -> int:
    """Gcd of all directed cycle lengths of the support digraph.

    BFS assigns levels from index 0; the gcd of ``level(u) + 1 - level(v)``
    over all arcs ``u -> v`` is the period of an irreducible digraph.
    """
    if not is_irreducible(B):
        raise ReducibleOperatorError("imprimitivity index needs an irreducible operator")
    succ = B.support_successors()
    level = {0: 0}
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for w in succ[u]:
            if w not in level:
                level[w] = level[u] + 1
                queue.append(w)
    g = 0
    for u, targets in enumerate(succ):
        for w in targets:
            g = math.gcd(g, abs(level[u] + 1 - level[w]))
    return g


def cyclic_classes(B: ColumnStochasticOperator, k: Optional[int] = None) -> list[int]:
    """Class label (BFS level mod k) of each edge index."""
    if k is None:
        k = imprimitivity_index(B)
    succ = B.support_successors()
    level = {0: 0}
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for w in succ[u]:
            if w not in level:
                level[w] = level[u] + 1
                queue.append(w)
    return [level[i] % k for i in range(B.dim)]


@dataclass(frozen=True)
class AttractorCertificate:
    W: tuple[int, ...]
    L: int
    delta: Fraction


def attractor_weights(spec: GraphSpec, W, L: int) -> dict[int, Fraction]:
    """For each vertex, the total weight of all paths of length 1..L ending in ``W``.

    A path's weight is the product of its edge weights. Paths have at least
    one edge.
    """
    Wset = set(W)
    out_edges: dict[int, list[tuple[int, Fraction]]] = {v: [] for v in spec.vertices}
    for e in spec.edges:
        out_edges[e.tail].append((e.head, e.weight))
    # a[v] = weight of paths of exactly length l from v into W
    a = {v: sum((w for h, w in out_edges[v] if h in Wset), Fraction(0)) for v in spec.vertices}
    total = dict(a)
    for _ in range(1, L):
        a = {v: sum((w * a[h] for h, w in out_edges[v]), Fraction(0)) for v in spec.vertices}
        for v in spec.vertices:
            total[v] += a[v]
    return total


def find_attractor(spec: GraphSpec, max_length: int, max_size: int) -> Optional[AttractorCertificate]:
    """Smallest attractor certificate within the bounds, or ``None``.

    Candidates are ordered by ``|W|``, then by the smallest length ``L`` at
    which every vertex routes positive weight into ``W``, then
    lexicographically by ``W``. ``delta`` is the exact minimum over vertices
    of :func:`attractor_weights` at that ``L``. Sets of equal size are
    enumerated exhaustively, so the first size that yields a certificate is
    minimal.
    """
    require_valid(spec)
    verts = list(spec.vertices)
    for size in range(1, min(max_size, len(verts)) + 1):
        best: Optional[AttractorCertificate] = None
        for W in itertools.combinations(verts, size):
            L = _min_length(spec, W, max_length if best is None else best.L)
            if L is None:
                continue
            if best is None or L < best.L:
                weights = attractor_weights(spec, W, L)
                best = AttractorCertificate(tuple(W), L, min(weights.values()))
        if best is not None:
            return best
    return None


def _min_length(spec: GraphSpec, W, max_length: int) -> Optional[int]:
    # positivity only depends on the support, so track reachability sets
    Wset = set(W)
    preds: dict[int, list[int]] = {v: [] for v in spec.vertices}
    for e in spec.edges:
        if e.weight > 0:
            preds[e.head].append(e.tail)
    frontier = set()
    for w in Wset:
        frontier.update(preds[w])
    covered = set(frontier)
    n = len(spec.vertices)
    for L in range(1, max_length + 1):
        if len(covered) == n:
            return L
        nxt = set()
        for v in frontier:
            nxt.update(preds[v])
        frontier = nxt
        covered |= nxt
    return None


@dataclass(frozen=True)
class SpectralDecomposition:
    """Peripheral spectral data of an irreducible column-stochastic B.

    ``P`` is the limit of B^(k m); ``residual`` is the last successive
    difference ``||B^(k(m+1)) - B^(k m)||_1``; ``rho`` estimates the spectral
    radius of B on ker P from the decay of those differences over the final
    ``window`` iterations.
    """

    k: int
    P: np.ndarray
    rho: float
    residual: float
    iterations: int
    differences: tuple[float, ...] = field(default=(), repr=False)
    window: int = 0

    @property
    def peripheral_eigenvalues(self) -> list[complex]:
        return [cmath.exp(2j * math.pi * j / self.k) for j in range(self.k)]

    def invariants(self, B: ColumnStochasticOperator) -> dict[str, float]:
        Bf = B.to_numpy()
        P = self.P
        Bk = np.linalg.matrix_power(Bf, self.k)
        return {
            "idempotence": _norm1(P @ P - P),
            "commutation": _norm1(Bf @ P - P @ Bf),
            "fixed_by_Bk": _norm1(Bk @ P - P),
            "min_entry": float(P.min()) if P.size else 0.0,
            "min_column_norm": float(np.abs(P).sum(axis=0).min()) if P.size else 0.0,
        }

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "peripheral": [{"re": z.real, "im": z.imag} for z in self.peripheral_eigenvalues],
            "rho": self.rho,
            "residual": self.residual,
            "iterations": self.iterations,
        }


def _norm1(M: np.ndarray) -> float:
    if M.size == 0:
        return 0.0
    return float(np.abs(M).sum(axis=0).max())


def spectral_projection(
    B: ColumnStochasticOperator,
    k: Optional[int] = None,
    tol: float = 1e-10,
    max_iter: int = 100_000,
    window: int = 8,
) -> SpectralDecomposition:
    """Peripheral projection P = lim B^(k m) by power iteration.

    Iterates ``X <- B^k X`` from ``X = B^k`` until successive iterates differ
    by less than ``tol`` in the max-column-sum norm. ``rho`` is
    ``exp(slope / k)`` where ``slope`` is the least-squares slope of
    ``log d_m`` against ``m`` over the second half of the differences above
    ``1e-13`` (the last ``window`` of them when fewer than ``2 * window``
    are usable); it is 0 when the first difference already vanishes.

    Raises
    ------
    ReducibleOperatorError
        If B is reducible.
    ConvergenceError
        If ``max_iter`` iterations do not reach ``tol``; carries the last residual.
    """
    if k is None:
        k = imprimitivity_index(B)
    elif not is_irreducible(B):
        raise ReducibleOperatorError("spectral projection needs an irreducible operator")
    Bk = np.linalg.matrix_power(B.to_numpy(), k)
    X = Bk.copy()
    diffs: list[float] = []
    for m in range(1, max_iter + 1):
        Xn = Bk @ X
        d = _norm1(Xn - X)
        diffs.append(d)
        X = Xn
        if d < tol:
            break
    else:
        raise ConvergenceError(
            f"no convergence after {max_iter} iterations (residual {diffs[-1]:.3e})",
            diffs[-1], max_iter,
        )
    rho = _decay_rate(diffs, k, window)
    return SpectralDecomposition(
        k=k, P=X, rho=rho, residual=diffs[-1], iterations=len(diffs),
        differences=tuple(diffs), window=window,
    )


def _decay_rate(diffs: list[float], k: int, window: int) -> float:
    idx = [i for i, d in enumerate(diffs) if d > 1e-13]
    if len(idx) < 2:
        return 0.0
    # oscillating subdominant eigenvalues make short windows biased, so fit
    # over the second half of the usable differences when there are enough
    tail = idx[len(idx) // 2:] if len(idx) >= 2 * window else idx[-window:]
    xs = np.array(tail, dtype=float)
    ys = np.log(np.array([diffs[i] for i in tail]))
    slope = np.polyfit(xs, ys, 1)[0]
    return float(min(math.exp(slope / k), 1.0 - 1e-15))
