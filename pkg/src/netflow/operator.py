"""Sparse exact matrices acting on finitely supported vectors.

A vector is a ``dict`` mapping index -> value. Values are usually
:class:`~fractions.Fraction`, but anything supporting ``+`` and ``*`` with
fractions (floats, complex numbers) works; exactness is kept when the
inputs are exact.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

Vector = Mapping[int, object]


@dataclass(frozen=True)
class SparseColumns:
    """An ``n_rows x len(columns)`` matrix stored column-wise."""

    n_rows: int
    columns: tuple[dict, ...]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_rows, len(self.columns))

    def entry(self, i: int, j: int):
        return self.columns[j].get(i, 0)

    def to_dense(self) -> list[list]:
        rows = [[Fraction(0)] * len(self.columns) for _ in range(self.n_rows)]
        for j, col in enumerate(self.columns):
            for i, v in col.items():
                rows[i][j] = v
        return rows


@dataclass(frozen=True, eq=False)
class ColumnStochasticOperator:
    """Square sparse matrix B on edge indices, columns stored as dicts.

    Nothing here enforces stochasticity; :meth:`column_sums` and
    :meth:`is_column_stochastic` check it.
    """

    dim: int
    columns: tuple[dict, ...]
    _powers: list = field(default_factory=list, init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.columns) != self.dim:
            raise ValueError(f"expected {self.dim} columns, got {len(self.columns)}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, ColumnStochasticOperator):
            return NotImplemented
        return self.dim == other.dim and all(
            _nonzero(a) == _nonzero(b) for a, b in zip(self.columns, other.columns)
        )

    def __hash__(self):
        return hash((self.dim, tuple(tuple(sorted(_nonzero(c).items())) for c in self.columns)))

    @classmethod
    def from_dense(cls, rows) -> "ColumnStochasticOperator":
        n = len(rows)
        cols = tuple(
            {i: Fraction(rows[i][j]) for i in range(n) if rows[i][j] != 0} for j in range(n)
        )
        return cls(n, cols)

    @classmethod
    def identity(cls, n: int) -> "ColumnStochasticOperator":
        return cls(n, tuple({j: Fraction(1)} for j in range(n)))

    def entry(self, i: int, j: int):
        return self.columns[j].get(i, Fraction(0))

    def column_sums(self) -> list:
        return [sum(col.values(), Fraction(0)) for col in self.columns]

    def is_column_stochastic(self) -> bool:
        return all(v >= 0 for col in self.columns for v in col.values()) and all(
            s == 1 for s in self.column_sums()
        )

    def norm1(self):
        """Max column sum of absolute values (the l1 operator norm)."""
        return max((sum(abs(v) for v in col.values()) for col in self.columns), default=Fraction(0))

    def apply(self, x: Vector) -> dict:
        """Exact product B x for a finitely supported ``x``."""
        out: dict = {}
        for j, xj in x.items():
            if j < 0 or j >= self.dim:
                raise ValueError(f"index {j} outside operator dimension {self.dim}")
            if xj == 0:
                continue
            for i, b in self.columns[j].items():
                out[i] = out.get(i, 0) + b * xj
        return {i: v for i, v in out.items() if v != 0}

    def matmul(self, other: "ColumnStochasticOperator") -> "ColumnStochasticOperator":
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        return ColumnStochasticOperator(self.dim, tuple(self.apply(col) for col in other.columns))

    def power(self, n: int) -> "ColumnStochasticOperator":
        """B**n, cached; exact when B is."""
        if n < 0:
            raise ValueError("negative power")
        if not self._powers:
            self._powers.append(ColumnStochasticOperator.identity(self.dim))
        while len(self._powers) <= n:
            self._powers.append(self.matmul(self._powers[-1]))
        return self._powers[n]

    def apply_power(self, n: int, x: Vector) -> dict:
        """B**n x; uses a cached power when available, else n sparse products."""
        if n < 0:
            raise ValueError("negative power")
        if n < len(self._powers):
            return self._powers[n].apply(x)
        y = {i: v for i, v in x.items() if v != 0}
        for _ in range(n):
            if not y:
                break
            y = self.apply(y)
        return y

    def to_dense(self) -> list[list[Fraction]]:
        rows = [[Fraction(0)] * self.dim for _ in range(self.dim)]
        for j, col in enumerate(self.columns):
            for i, v in col.items():
                rows[i][j] = v
        return rows

    def to_numpy(self, dtype=float) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=dtype)
        for j, col in enumerate(self.columns):
            for i, v in col.items():
                out[i, j] = v
        return out

    def support_successors(self) -> list[list[int]]:
        """Arcs j -> i of the support digraph (mass on edge j can move to edge i)."""
        return [sorted(i for i, v in col.items() if v != 0) for col in self.columns]


def _nonzero(col: Mapping) -> dict:
    return {i: v for i, v in col.items() if v != 0}


def l1(x: Vector):
    return sum((abs(v) for v in x.values()), Fraction(0))
