"""JSON encoding of graphs, step functions and measures.

Exact rationals are written as ``"p/q"`` strings (``"p"`` for integers) so
every document round-trips to an equal in-memory value. Floats that come
out of numerical diagnostics are written with 17 significant digits.
"""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Union

from .graph import Edge, GraphSpec
from .measure import EdgeMeasure
from .stepfunc import EdgeStepFunction, Piecewise


class FormatError(ValueError):
    """Malformed input document."""


def frac_str(x: Fraction) -> str:
    return str(Fraction(x))


def parse_frac(text: Any) -> Fraction:
    if isinstance(text, bool) or isinstance(text, float):
        raise FormatError(f"expected an exact rational, got {text!r}")
    try:
        return Fraction(text)
    except (TypeError, ValueError, ZeroDivisionError):
        raise FormatError(f"not a rational: {text!r}") from None


def float_str(x: float) -> str:
    return format(float(x), ".17g")


# -- graphs -----------------------------------------------------------------


def graph_to_json(spec: GraphSpec) -> dict:
    edges = []
    for e in spec.edges:
        d = {"id": e.id, "tail": e.tail, "head": e.head, "weight": frac_str(e.weight)}
        if e.velocity is not None:
            d["velocity"] = frac_str(e.velocity)
        edges.append(d)
    out: dict = {"vertices": list(spec.vertices), "edges": edges}
    if spec.velocity_bounds is not None:
        out["velocity_bounds"] = [frac_str(b) for b in spec.velocity_bounds]
    return out


def graph_from_json(doc: dict) -> GraphSpec:
    try:
        vertices = tuple(int(v) for v in doc["vertices"])
        edges = []
        for d in doc["edges"]:
            vel = d.get("velocity")
            edges.append(Edge(
                int(d["id"]), int(d["tail"]), int(d["head"]), parse_frac(d["weight"]),
                None if vel is None else parse_frac(vel),
            ))
    except (KeyError, TypeError) as exc:
        raise FormatError(f"bad graph document: {exc}") from None
    bounds = doc.get("velocity_bounds")
    if bounds is not None:
        bounds = (parse_frac(bounds[0]), parse_frac(bounds[1]))
    return GraphSpec(vertices, tuple(edges), bounds)


# -- step functions ---------------------------------------------------------


def _piecewise_to_json(p: Piecewise) -> dict:
    return {"breaks": [frac_str(b) for b in p.breaks], "values": [frac_str(v) for v in p.values]}


def _piecewise_from_json(d: dict) -> Piecewise:
    try:
        return Piecewise.make([parse_frac(b) for b in d["breaks"]], [parse_frac(v) for v in d["values"]])
    except KeyError as exc:
        raise FormatError(f"missing key {exc}") from None


def step_to_json(f: EdgeStepFunction) -> dict:
    return {"edges": {str(j): _piecewise_to_json(p) for j, p in f.components.items()}}


def step_from_json(doc: dict) -> EdgeStepFunction:
    try:
        edges = doc["edges"]
    except (KeyError, TypeError):
        raise FormatError("step function document needs an 'edges' object") from None
    return EdgeStepFunction({int(j): _piecewise_from_json(d) for j, d in edges.items()})


# -- measures ---------------------------------------------------------------


def measure_to_json(mu: EdgeMeasure) -> dict:
    edges: dict[str, dict] = {}
    for j in mu.active_edges:
        entry: dict = {}
        atoms = mu.atoms.get(j, {})
        if atoms:
            entry["atoms"] = [{"pos": frac_str(p), "weight": frac_str(w)} for p, w in atoms.items()]
        dens = mu.density.components.get(j)
        if dens is not None:
            entry["density"] = _piecewise_to_json(dens)
        edges[str(j)] = entry
    return {"edges": edges}


def measure_from_json(doc: dict) -> EdgeMeasure:
    try:
        edges = doc["edges"]
    except (KeyError, TypeError):
        raise FormatError("measure document needs an 'edges' object") from None
    atoms: dict[int, dict] = {}
    dens: dict[int, Piecewise] = {}
    for j, entry in edges.items():
        j = int(j)
        per: dict[Fraction, Fraction] = {}
        for a in entry.get("atoms", []):
            p = parse_frac(a["pos"])
            if p in per:
                raise FormatError(f"duplicate atom position {p} on edge {j}")
            per[p] = parse_frac(a["weight"])
        if per:
            atoms[j] = per
        if "density" in entry:
            dens[j] = _piecewise_from_json(entry["density"])
    return EdgeMeasure(atoms, EdgeStepFunction(dens))


# -- files ------------------------------------------------------------------


def load_json(path: Union[str, Path]) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: {exc}") from None


def dump_json(doc: Any, path: Union[str, Path]) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
