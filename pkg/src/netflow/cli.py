"""Command line front end: ``netflow <command> [options]``.

Every command reads a graph (``--graph FILE``, ``--template NAME --radius N``
or ``--template random --seed N``), runs one analysis and writes its
artifacts to ``--out DIR``. Without ``--out`` the JSON report goes to stdout
and CSV tables are printed after it.

Exit status is 0 when the run succeeded and every check passed, 1 when a
check failed and 2 on input errors (unreadable files, invalid or reducible
graphs).

CSV tables
----------
simulate.csv
    ``t, l1_norm, linf_norm, defect, theta_residual``. Exact columns are
    ``p/q`` strings; ``defect`` is a float. ``theta_residual`` is
    ``||T(t + theta) f - T(t) f||_1``. Both are empty for reducible graphs.
periodicity.csv
    ``t, defect``.
resolvent.csv
    ``lambda, s, e0, e1, ...``: samples of R(lambda, A) f.
measure_series.csv
    ``t, variation, mass``: variation of S(t) mu and the l1 norm of its total mass.
probe.csv
    ``t, pairing_gap, tv_gap``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import random
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .flow import evaluate_T, defect, periodicity_report, resolvent
from .graph import GraphSpec, InvalidGraphError, adjacency, is_strongly_connected, validate_graph
from .measure import (
    EdgeMeasure,
    TestFunction,
    evaluate_S,
    variation,
    weakstar_continuity_probe,
)
from .serialize import (
    FormatError,
    dump_json,
    float_str,
    graph_from_json,
    load_json,
    measure_from_json,
    measure_to_json,
    parse_frac,
    step_from_json,
    step_to_json,
)
from .spectral import (
    ConvergenceError,
    ReducibleOperatorError,
    find_attractor,
    imprimitivity_index,
    is_irreducible,
    spectral_projection,
)
from .stepfunc import EdgeStepFunction, l1_norm, linf_norm
from .templates import GraphTemplate, random_graph, truncate
from .velocity import subdivide

EXIT_OK, EXIT_CHECK_FAILED, EXIT_INPUT = 0, 1, 2


class UsageError(Exception):
    pass


def parse_grid(text: str) -> list[Fraction]:
    """``a:b:step`` (inclusive of b) or a comma list of rationals, strictly increasing."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"grid {text!r} is not a:b:step")
        a, b, step = (parse_frac(p) for p in parts)
        if step <= 0:
            raise UsageError("grid step must be positive")
        n = math.floor((b - a) / step)
        grid = [a + i * step for i in range(n + 1)]
    else:
        grid = [parse_frac(p) for p in text.split(",") if p.strip()]
    if not grid:
        raise UsageError("empty grid")
    if any(not x < y for x, y in zip(grid, grid[1:])):
        raise UsageError("grid must be strictly increasing")
    return grid


def _load_graph(args) -> GraphSpec:
    if args.graph and args.template:
        raise UsageError("give either --graph or --template, not both")
    if args.graph:
        spec = graph_from_json(load_json(args.graph))
    elif args.template == "random":
        rng = random.Random(args.seed if args.seed is not None else 0)
        spec = random_graph(rng, strongly_connected=True)
    elif args.template:
        try:
            spec = truncate(GraphTemplate.parse(args.template), args.radius)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    else:
        raise UsageError("a graph is required: --graph FILE or --template NAME")
    if getattr(args, "velocities", None):
        spec = spec.with_velocities([parse_frac(v) for v in args.velocities.split(",")])
    report = validate_graph(spec)
    if not report.ok:
        raise InvalidGraphError(report)
    return spec


def _load_step(args, spec: GraphSpec) -> EdgeStepFunction:
    if args.init:
        f = step_from_json(load_json(args.init))
    else:
        f = EdgeStepFunction.indicator(0)
    bad = [j for j in f.active_edges if j >= spec.n_edges]
    if bad:
        raise UsageError(f"initial data uses unknown edges {bad}")
    return f


def _load_measure(args, spec: GraphSpec) -> EdgeMeasure:
    if args.init:
        mu = measure_from_json(load_json(args.init))
    else:
        mu = EdgeMeasure.dirac(Fraction(1, 2), {0: Fraction(1)})
    bad = [j for j in mu.active_edges if j >= spec.n_edges]
    if bad:
        raise UsageError(f"initial measure uses unknown edges {bad}")
    return mu


class _Output:
    def __init__(self, out: Optional[str]):
        self.dir = Path(out) if out else None
        if self.dir is not None:
            self.dir.mkdir(parents=True, exist_ok=True)
        self._tables: list[tuple[str, str]] = []

    def json(self, name: str, doc) -> None:
        if self.dir is not None:
            dump_json(doc, self.dir / name)
        print(json.dumps(doc, indent=2))

    def csv(self, name: str, header: Sequence[str], rows) -> None:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        if self.dir is not None:
            (self.dir / name).write_text(buf.getvalue())
        else:
            self._tables.append((name, buf.getvalue()))

    def flush(self) -> None:
        for name, text in self._tables:
            print(f"# {name}")
            print(text, end="")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, int):
        return str(x)
    return float_str(x)


# -- commands ---------------------------------------------------------------


def cmd_analyze(args, out: _Output) -> int:
    spec = _load_graph(args)
    B = adjacency(spec)
    strong = is_strongly_connected(spec)
    irred = is_irreducible(B)
    cert = find_attractor(spec, args.max_length or spec.n_vertices + 1, args.max_size or spec.n_vertices)
    doc = {
        "n_vertices": spec.n_vertices,
        "n_edges": spec.n_edges,
        "valid": True,
        "violations": [],
        "strongly_connected": strong,
        "irreducible": irred,
        "attractor": None if cert is None else {"W": list(cert.W), "L": cert.L, "delta": str(cert.delta)},
    }
    if irred:
        doc["k"] = imprimitivity_index(B)
    out.json("analyze.json", doc)
    return EXIT_OK if strong == irred else EXIT_CHECK_FAILED


def cmd_spectral(args, out: _Output) -> int:
    spec = _load_graph(args)
    B = adjacency(spec)
    dec = spectral_projection(B, tol=args.tol)
    doc = dec.to_json()
    doc["invariants"] = dec.invariants(B)
    out.json("spectral.json", doc)
    inv = doc["invariants"]
    ok = inv["idempotence"] < 1e-8 and inv["commutation"] < 1e-8 and inv["min_entry"] > 0
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_simulate(args, out: _Output) -> int:
    spec = _load_graph(args)
    B = adjacency(spec)
    f = _load_step(args, spec)
    grid = parse_grid(args.tgrid) if args.tgrid else [Fraction(0)]
    P = theta = None
    if is_irreducible(B):
        dec = spectral_projection(B, tol=args.tol)
        P, theta = dec.P, dec.k
    rows = []
    ok = True
    norm0 = l1_norm(f)
    for t in grid:
        ft = evaluate_T(B, t, f)
        n1 = l1_norm(ft)
        ok &= n1 <= norm0
        res = None
        if theta is not None:
            res = l1_norm(evaluate_T(B, t + theta, f) - ft)
        rows.append([_fmt(t), _fmt(n1), _fmt(linf_norm(ft)),
                     "" if P is None else _fmt(defect(B, P, t)), _fmt(res)])
    out.csv("simulate.csv", ["t", "l1_norm", "linf_norm", "defect", "theta_residual"], rows)
    final = evaluate_T(B, grid[-1], f)
    out.json("simulate.json", {"t_final": str(grid[-1]), "contraction_ok": ok, "final": step_to_json(final)})
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_periodicity(args, out: _Output) -> int:
    spec = _load_graph(args)
    if not is_strongly_connected(spec):
        raise ReducibleOperatorError("periodicity needs a strongly connected graph")
    grid = parse_grid(args.tgrid) if args.tgrid else None
    tmax = grid[-1] if grid else Fraction(args.tmax)
    rep = periodicity_report(spec, tmax, grid=grid, tol=args.tol)
    out.csv("periodicity.csv", ["t", "defect"], [[_fmt(t), _fmt(d)] for t, d in rep.samples])
    out.json("periodicity.json", rep.to_json())
    return EXIT_OK if rep.passed else EXIT_CHECK_FAILED


def cmd_resolvent(args, out: _Output) -> int:
    spec = _load_graph(args)
    B = adjacency(spec)
    f = _load_step(args, spec)
    lams = [float(parse_frac(x)) for x in args.lam.split(",")]
    sgrid = [float(s) for s in parse_grid(args.sgrid)]
    rows = []
    reports = []
    ok = True
    for lam in lams:
        res = resolvent(B, lam, f, tol=args.tol, grid=sgrid)
        reports.append({"lambda": lam, "tail_bound": res.tail_bound, "terms": res.terms})
        ok &= res.tail_bound <= args.tol
        for s, v in zip(sgrid, res.values):
            rows.append([_fmt(lam), _fmt(s)] + [_fmt(float(x)) for x in v])
    out.csv("resolvent.csv", ["lambda", "s"] + [f"e{j}" for j in range(B.dim)], rows)
    out.json("resolvent.json", {"results": reports})
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_subdivide(args, out: _Output) -> int:
    spec = _load_graph(args)
    smap = subdivide(spec, multiplier=parse_frac(args.multiplier) if args.multiplier else None)
    doc = smap.to_json()
    if is_strongly_connected(smap.subdivided):
        doc["period"] = str(smap.period())
    out.json("subdivide.json", doc)
    return EXIT_OK


def cmd_measure_sim(args, out: _Output) -> int:
    spec = _load_graph(args)
    B = adjacency(spec)
    mu = _load_measure(args, spec)
    grid = parse_grid(args.tgrid) if args.tgrid else [Fraction(0)]
    var0 = variation(mu)
    ok = True
    rows = []
    for t in grid:
        mt = evaluate_S(B, t, mu)
        v = variation(mt)
        ok &= v <= var0
        mass = sum((abs(x) for x in mt.total().values()), Fraction(0))
        rows.append([_fmt(t), _fmt(v), _fmt(mass)])
    out.csv("measure_series.csv", ["t", "variation", "mass"], rows)
    probe_grid = sorted(parse_grid(args.probe_grid), reverse=True)
    tf = TestFunction.linear(range(spec.n_edges))
    samples = weakstar_continuity_probe(B, mu, tf, probe_grid)
    ok &= all(s.ok for s in samples)
    out.csv("probe.csv", ["t", "pairing_gap", "tv_gap"],
            [[_fmt(s.t), _fmt(s.pairing_gap), _fmt(s.tv_gap)] for s in samples])
    final = evaluate_S(B, grid[-1], mu)
    out.json("measure_sim.json", {
        "t_final": str(grid[-1]), "contraction_ok": ok, "probe_ok": all(s.ok for s in samples),
        "final": measure_to_json(final),
    })
    return EXIT_OK if ok else EXIT_CHECK_FAILED


COMMANDS = {
    "analyze": cmd_analyze,
    "spectral": cmd_spectral,
    "simulate": cmd_simulate,
    "periodicity": cmd_periodicity,
    "resolvent": cmd_resolvent,
    "subdivide": cmd_subdivide,
    "measure-sim": cmd_measure_sim,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="netflow", description="Exact transport flows on metric graphs")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--graph", help="graph JSON file")
    common.add_argument("--template", help="template name, e.g. cycle:3, ladder, random")
    common.add_argument("--radius", type=int, default=1, help="truncation radius for templates")
    common.add_argument("--seed", type=int, help="seed for --template random")
    common.add_argument("--velocities", help="comma list of edge velocities, e.g. 1,1/2")
    common.add_argument("--init", help="initial data JSON (step function or measure)")
    common.add_argument("--tgrid", help="time grid a:b:step or comma list")
    common.add_argument("--tol", type=float, default=1e-12, help="numerical tolerance")
    common.add_argument("--out", help="output directory")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="validation, connectivity and attractor")
    p.add_argument("--max-length", type=int)
    p.add_argument("--max-size", type=int)
    sub.add_parser("spectral", parents=[common], help="period, projection P and rho")
    sub.add_parser("simulate", parents=[common], help="T(t) series")
    p = sub.add_parser("periodicity", parents=[common], help="defect decay report")
    p.add_argument("--tmax", default="50", help="largest time when --tgrid is absent")
    p = sub.add_parser("resolvent", parents=[common], help="R(lambda, A) f on an s-grid")
    p.add_argument("--lambda", dest="lam", default="1", help="comma list of positive lambdas")
    p.add_argument("--sgrid", default="0:1:1/64", help="s-grid a:b:step or comma list")
    p = sub.add_parser("subdivide", parents=[common], help="subdivision for rational velocities")
    p.add_argument("--multiplier", help="common multiplier c (default: minimal)")
    p = sub.add_parser("measure-sim", parents=[common], help="S(t) series and weak* probe")
    p.add_argument("--probe-grid", default="1/640,1/320,1/160,1/80,1/40,1/20,1/10",
                   help="probe times (sorted descending internally)")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.tol <= 0:
        print("error: --tol must be positive", file=sys.stderr)
        return EXIT_INPUT
    out = _Output(args.out)
    try:
        status = COMMANDS[args.command](args, out)
    except InvalidGraphError as exc:
        print("error: invalid graph", file=sys.stderr)
        for msg in exc.report.messages():
            print(f"  {msg}", file=sys.stderr)
        return EXIT_INPUT
    except (UsageError, FormatError, ReducibleOperatorError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    out.flush()
    return status


if __name__ == "__main__":
    sys.exit(main())
