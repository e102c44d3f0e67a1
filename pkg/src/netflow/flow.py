"""The transport semigroup T(t) on l1-valued step data, its resolvent and diagnostics.

T(t) f(s) = B^m f(s + t - m) where m is the integer with m <= s + t < m + 1.
On step data with rational breakpoints this is evaluated exactly.
"""
from __future__ import annotations

import bisect
import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .graph import GraphSpec, adjacency, is_strongly_connected
from .operator import ColumnStochasticOperator
from .spectral import (
    AttractorCertificate,
    ReducibleOperatorError,
    SpectralDecomposition,
    find_attractor,
    is_irreducible,
    spectral_projection,
)
from .stepfunc import EdgeStepFunction, _frac, from_cells, l1_norm, linf_norm


def _split_time(t) -> tuple[int, Fraction]:
    t = _frac(t)
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t}")
    n = math.floor(t)
    return n, t - n


def evaluate_T(B: ColumnStochasticOperator, t, f: EdgeStepFunction) -> EdgeStepFunction:
    """Exact T(t) f.

    With ``n = floor(t)`` and ``tau = t - n``, the data on ``[tau, 1]`` moves
    to ``[0, 1 - tau)`` under B^n and the data on ``[0, tau)`` wraps to
    ``[1 - tau, 1)`` under B^(n+1).
    """
    n, tau = _split_time(t)
    for j in f.active_edges:
        if j >= B.dim:
            raise ValueError(f"edge {j} outside operator dimension {B.dim}")
    cells = []
    for a, b, vec in f.cells(extra=[tau]):
        if not vec:
            continue
        if a >= tau:
            cells.append((a - tau, b - tau, B.apply_power(n, vec)))
        else:
            cells.append((a + 1 - tau, b + 1 - tau, B.apply_power(n + 1, vec)))
    return from_cells(cells)


def defect(B: ColumnStochasticOperator, P: np.ndarray, t) -> float:
    """Upper bound max(||B^n (I - P)||_1, ||B^(n+1) (I - P)||_1), n = floor(t).

    B^n is formed exactly and converted to floating point before the
    product with ``I - P``.
    """
    P = np.asarray(P, dtype=float)
    if P.shape != (B.dim, B.dim):
        raise ValueError(f"P has shape {P.shape}, expected {(B.dim, B.dim)}")
    n, _ = _split_time(t)
    Q = np.eye(B.dim) - P
    vals = []
    for m in (n, n + 1):
        D = B.power(m).to_numpy() @ Q
        vals.append(float(np.abs(D).sum(axis=0).max()) if D.size else 0.0)
    return max(vals)


# ---------------------------------------------------------------------------
# resolvent
# ---------------------------------------------------------------------------


def _int_exp(beta: float, a: float, b: float) -> float:
    """Integral of exp(beta x) over [a, b]."""
    if abs(beta) * (b - a) < 1e-12:
        return math.exp(beta * a) * (b - a) * (1 + beta * (b - a) / 2)
    return math.exp(beta * a) * math.expm1(beta * (b - a)) / beta


@dataclass(frozen=True)
class ExpStepFunction:
    """Vector function on [0, 1] that is a finite sum of exponentials on each piece.

    On ``[breaks[i], breaks[i+1])`` the value is
    ``sum_alpha coeffs[i][alpha] * exp(alpha * s)`` with coefficient vectors
    of length ``dim``. The resolvent maps this class into itself.
    """

    dim: int
    breaks: tuple[float, ...]
    coeffs: tuple[dict, ...]

    @classmethod
    def from_step(cls, f: EdgeStepFunction, dim: int) -> "ExpStepFunction":
        grid = f.grid()
        coeffs = []
        for a, b, vec in f.cells():
            c = np.zeros(dim, dtype=complex if _any_complex(vec) else float)
            for j, v in vec.items():
                c[j] = complex(v) if isinstance(v, complex) else float(v)
            coeffs.append({0.0: c})
        return cls(dim, tuple(float(x) for x in grid), tuple(coeffs))

    def __call__(self, s: float) -> np.ndarray:
        i = bisect.bisect_right(self.breaks, s) - 1
        i = min(max(i, 0), len(self.coeffs) - 1)
        out = np.zeros(self.dim, dtype=complex if self.is_complex else float)
        for alpha, c in self.coeffs[i].items():
            out = out + c * math.exp(alpha * s)
        return out

    @property
    def is_complex(self) -> bool:
        return any(np.iscomplexobj(c) for cs in self.coeffs for c in cs.values())

    def sample(self, grid: Sequence[float]) -> np.ndarray:
        return np.array([self(float(s)) for s in grid])

    def sup_bound(self) -> float:
        """An upper bound for sup_s ||f(s)||_1."""
        best = 0.0
        for (a, b), cs in zip(zip(self.breaks, self.breaks[1:]), self.coeffs):
            tot = sum(np.abs(c).sum() * max(math.exp(al * a), math.exp(al * b)) for al, c in cs.items())
            best = max(best, tot)
        return best

    def __sub__(self, other: "ExpStepFunction") -> "ExpStepFunction":
        return _exp_combine(self, other, -1.0)

    def __add__(self, other: "ExpStepFunction") -> "ExpStepFunction":
        return _exp_combine(self, other, 1.0)

    def scale(self, c: float) -> "ExpStepFunction":
        return ExpStepFunction(
            self.dim, self.breaks, tuple({al: c * v for al, v in cs.items()} for cs in self.coeffs)
        )


def _any_complex(vec) -> bool:
    return any(isinstance(v, complex) for v in vec.values())


def _exp_combine(f: ExpStepFunction, g: ExpStepFunction, sign: float) -> ExpStepFunction:
    grid = sorted(set(f.breaks) | set(g.breaks))
    coeffs = []
    for a in grid[:-1]:
        out: dict = {}
        for h, sgn in ((f, 1.0), (g, sign)):
            i = min(max(bisect.bisect_right(h.breaks, a) - 1, 0), len(h.coeffs) - 1)
            for al, c in h.coeffs[i].items():
                out[al] = out.get(al, 0) + sgn * c
        coeffs.append(out)
    return ExpStepFunction(f.dim, tuple(grid), tuple(coeffs))


@dataclass(frozen=True)
class ResolventResult:
    lam: float
    function: ExpStepFunction
    tail_bound: float
    terms: int
    grid: tuple[float, ...] = ()
    values: Optional[np.ndarray] = field(default=None, repr=False)


def resolvent(
    B: ColumnStochasticOperator,
    lam: float,
    f,
    tol: float = 1e-12,
    grid: Optional[Sequence[float]] = None,
) -> ResolventResult:
    """R(lam, A) f for the generator A of T(t), in closed form on each piece.

    (R f)(s) = e^{-lam(1-s)} sum_{n>=0} e^{-lam n} B^{n+1} g
               + int_s^1 e^{lam(s-t)} f(t) dt,   g = int_0^1 e^{-lam t} f(t) dt.

    The series is cut at the first N with
    ``e^{-lam N} ||f||_inf / (lam (1 - e^{-lam})) < tol``; that quantity is
    returned as ``tail_bound``. ``f`` may be an :class:`EdgeStepFunction` or
    an :class:`ExpStepFunction` whose exponents differ from ``lam``.
    """
    lam = float(lam)
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    if isinstance(f, EdgeStepFunction):
        f = ExpStepFunction.from_step(f, B.dim)
    if f.dim != B.dim:
        raise ValueError("dimension mismatch")
    norm = f.sup_bound()
    denom = lam * (-math.expm1(-lam))
    N = 0
    if norm > 0:
        N = max(0, math.ceil((math.log(norm / (denom * tol))) / lam) + 1)
    tail = math.exp(-lam * N) * norm / denom if norm > 0 else 0.0

    dtype = complex if f.is_complex else float
    g = np.zeros(B.dim, dtype=dtype)
    pieces = list(zip(f.breaks, f.breaks[1:]))
    # tail integrals K_i = int_{b_{i+1}}^1 e^{-lam t} f(t) dt
    piece_int = []
    for (a, b), cs in zip(pieces, f.coeffs):
        acc = np.zeros(B.dim, dtype=dtype)
        for al, c in cs.items():
            if al == lam:
                raise ValueError("input exponent equals lambda; not representable")
            acc = acc + c * _int_exp(al - lam, a, b)
        piece_int.append(acc)
        g = g + acc
    Bf = B.to_numpy()
    h = np.zeros(B.dim, dtype=dtype)
    v = Bf @ g
    decay = math.exp(-lam)
    weight = 1.0
    for _ in range(N):
        h = h + weight * v
        v = Bf @ v
        weight *= decay
    boundary = decay * h  # coefficient of e^{lam s}

    coeffs = []
    suffix = np.zeros(B.dim, dtype=dtype)
    for i in range(len(pieces) - 1, -1, -1):
        a, b = pieces[i]
        out: dict = {}
        lam_coef = boundary + suffix
        for al, c in f.coeffs[i].items():
            beta = al - lam
            # int_s^b e^{beta t} dt = (e^{beta b} - e^{beta s}) / beta
            lam_coef = lam_coef + c * math.exp(beta * b) / beta
            out[al] = out.get(al, 0) - c / beta
        out[lam] = out.get(lam, 0) + lam_coef
        coeffs.append(out)
        suffix = suffix + piece_int[i]
    coeffs.reverse()
    fn = ExpStepFunction(B.dim, f.breaks, tuple(coeffs))
    values = fn.sample(grid) if grid is not None else None
    return ResolventResult(lam, fn, tail, N, tuple(float(s) for s in grid or ()), values)


# ---------------------------------------------------------------------------
# periodicity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PeriodicityReport:
    theta: int
    samples: tuple[tuple[float, float], ...]
    rate: float
    rho: float
    passed: bool
    monotone: bool
    attractor: Optional[AttractorCertificate]
    residual: float
    fit_points: int
    note: str = ""

    def to_json(self) -> dict:
        cert = None
        if self.attractor is not None:
            cert = {"W": list(self.attractor.W), "L": self.attractor.L, "delta": str(self.attractor.delta)}
        return {
            "theta": self.theta,
            "rate": self.rate if math.isfinite(self.rate) else None,
            "log_rho": math.log(self.rho) if self.rho > 0 else None,
            "rho": self.rho,
            "passed": self.passed,
            "monotone": self.monotone,
            "residual": self.residual,
            "fit_points": self.fit_points,
            "attractor": cert,
            "note": self.note,
            "samples": [{"t": t, "defect": d} for t, d in self.samples],
        }


def fit_log_rate(samples: Sequence[tuple[float, float]], floor: float = 0.0) -> tuple[float, int]:
    """Least-squares slope of log(defect) against t over samples above ``floor``."""
    pts = [(t, d) for t, d in samples if d > floor]
    if not pts:
        return -math.inf, 0
    if len(pts) == 1:
        return -math.inf if pts[0][1] == 0 else math.nan, 1
    xs = np.array([p[0] for p in pts], dtype=float)
    ys = np.log(np.array([p[1] for p in pts]))
    return float(np.polyfit(xs, ys, 1)[0]), len(pts)


def periodicity_report(
    spec: GraphSpec,
    tmax,
    grid: Optional[Sequence] = None,
    tol: float = 1e-13,
    max_attractor_length: Optional[int] = None,
) -> PeriodicityReport:
    """Period, defect samples and the decay fit for the flow on ``spec``.

    ``grid`` defaults to the multiples of theta up to ``tmax``. The rate is
    fitted on the second half of the samples, skipping samples below
    ``100 * max(residual, 1e-15)`` where floating point noise dominates. The
    report passes when the rate is at most ``log(rho) + 0.05`` (or all
    fitted samples vanish) and the defect is nonincreasing along multiples
    of theta up to 1e-12.
    """
    B = adjacency(spec)
    if not is_irreducible(B) or not is_strongly_connected(spec):
        raise ReducibleOperatorError("periodicity needs a strongly connected graph")
    dec = spectral_projection(B, tol=tol)
    k = dec.k
    tmax = _frac(tmax)
    if grid is None:
        grid = [Fraction(k * m) for m in range(0, int(tmax // k) + 1)]
    grid = [_frac(t) for t in grid]
    samples = tuple((float(t), defect(B, dec.P, t)) for t in grid)
    n_len = max_attractor_length or spec.n_vertices + 1
    cert = find_attractor(spec, n_len, 1)
    floor = 100 * max(dec.residual, 1e-15)
    half = samples[len(samples) // 2:]
    rate, used = fit_log_rate(half, floor)
    log_rho = math.log(dec.rho) if dec.rho > 0 else -math.inf
    passed = (rate == -math.inf) or (math.isfinite(rate) and rate <= log_rho + 0.05)
    multiples = [(t, d) for (t, d), tt in zip(samples, grid) if tt % k == 0]
    monotone = all(d2 <= d1 + 1e-12 for (_, d1), (_, d2) in zip(multiples, multiples[1:]))
    note = "finite graph: an attractor always exists" if cert is not None else "no attractor found within bounds"
    return PeriodicityReport(
        theta=k, samples=samples, rate=rate, rho=dec.rho, passed=passed and monotone,
        monotone=monotone, attractor=cert, residual=dec.residual, fit_points=used, note=note,
    )


# ---------------------------------------------------------------------------
# eigenfunctions of the generator
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EigenflowResult:
    max_deviation: float
    approximation_bound: float
    deviations: tuple[float, ...]

    @property
    def within_contract(self) -> bool:
        return self.max_deviation <= 1e-6 + self.approximation_bound


def eigenflow_check(
    B: ColumnStochasticOperator,
    lam: complex,
    v: Sequence[complex],
    tgrid: Sequence,
    pieces: int = 256,
) -> EigenflowResult:
    """Check that f(s) = e^{lam s} v moves as e^{lam t} f under T(t).

    f is replaced by its midpoint step approximation on ``pieces`` equal
    intervals; ``approximation_bound`` is the resulting worst-case relative
    deviation, ``(1 + |e^{lam t}|) ||f - f_N||_1 / ||f_N||_1`` maximised over
    the grid.
    """
    v = np.asarray(v, dtype=complex)
    if v.shape != (B.dim,):
        raise ValueError("eigenvector has the wrong length")
    mu = cmath.exp(lam)
    Bf = B.to_numpy(dtype=complex)
    scale = max(float(np.abs(v).sum()), 1.0)
    if float(np.abs(Bf @ v - mu * v).sum()) > 1e-10 * scale:
        raise ValueError("(lam, v) is not an eigenpair: B v != e^lam v")
    if not np.any(v):
        return EigenflowResult(0.0, 0.0, tuple(0.0 for _ in tgrid))
    N = int(pieces)
    breaks = [Fraction(i, N) for i in range(N + 1)]
    comps = {}
    for j in np.nonzero(v)[0]:
        vals = [complex(cmath.exp(lam * (i + 0.5) / N) * v[j]) for i in range(N)]
        comps[int(j)] = (breaks, vals)
    fN = EdgeStepFunction.from_arrays(comps)
    norm_fN = float(l1_norm(fN))
    # midpoint rule: |e^{lam s} - e^{lam s_mid}| <= |lam| e^{max(Re lam, 0)} / (2N)
    approx = float(np.abs(v).sum()) * abs(lam) * math.exp(max(complex(lam).real, 0.0)) / (2 * N)
    devs = []
    bound = 0.0
    for t in tgrid:
        t = _frac(t)
        growth = cmath.exp(lam * float(t))
        diff = evaluate_T(B, t, fN) - fN.scale(growth)
        devs.append(float(l1_norm(diff)) / norm_fN)
        bound = max(bound, (1 + abs(growth)) * approx / norm_fN)
    return EigenflowResult(max(devs) if devs else 0.0, bound, tuple(devs))
