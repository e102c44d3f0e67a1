from __future__ import annotations

import csv
import json
from fractions import Fraction

import pytest

from netflow import EdgeMeasure, EdgeStepFunction, example_g3
from netflow.cli import main, parse_grid
from netflow.serialize import (
    graph_from_json,
    graph_to_json,
    measure_from_json,
    measure_to_json,
    step_from_json,
    step_to_json,
)


@pytest.fixture
def g3_file(tmp_path):
    path = tmp_path / "g3.json"
    path.write_text(json.dumps(graph_to_json(example_g3())))
    return str(path)


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


class TestGrid:
    def test_range(self):
        assert parse_grid("0:1:1/4") == [Fraction(k, 4) for k in range(5)]

    def test_list(self):
        assert parse_grid("0,1/2,3") == [0, Fraction(1, 2), 3]

    def test_not_increasing(self):
        from netflow.cli import UsageError
        with pytest.raises(UsageError):
            parse_grid("1,0")


class TestCommands:
    def test_analyze_g3(self, g3_file, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["analyze", "--graph", g3_file, "--out", str(out)]) == 0
        doc = json.loads((out / "analyze.json").read_text())
        assert doc["strongly_connected"] and doc["irreducible"]
        assert doc["attractor"] == {"W": [0], "L": 2, "delta": "1/2"}
        assert json.loads(capsys.readouterr().out) == doc

    def test_periodicity_cycle3(self, tmp_path):
        out = tmp_path / "p"
        assert main(["periodicity", "--template", "cycle:3", "--tgrid", "0:30:3", "--out", str(out)]) == 0
        doc = json.loads((out / "periodicity.json").read_text())
        assert doc["theta"] == 3
        rows = read_csv(out / "periodicity.csv")
        assert all(float(r["defect"]) == 0 for r in rows)

    def test_periodicity_reducible(self, tmp_path, capsys):
        path = tmp_path / "two.json"
        doc = {"vertices": [0, 1, 2, 3], "edges": [
            {"id": 0, "tail": 0, "head": 1, "weight": "1"}, {"id": 1, "tail": 1, "head": 0, "weight": "1"},
            {"id": 2, "tail": 2, "head": 3, "weight": "1"}, {"id": 3, "tail": 3, "head": 2, "weight": "1"}]}
        path.write_text(json.dumps(doc))
        assert main(["periodicity", "--graph", str(path)]) == 2
        assert "strongly connected" in capsys.readouterr().err

    def test_simulate_time_zero_echoes(self, g3_file, tmp_path):
        f = EdgeStepFunction.from_arrays({0: ([0, "1/2"], ["1/2"]), 1: ([0, 1], [1])})
        init = tmp_path / "f.json"
        init.write_text(json.dumps(step_to_json(f)))
        out = tmp_path / "s"
        assert main(["simulate", "--graph", g3_file, "--init", str(init), "--tgrid", "0", "--out", str(out)]) == 0
        rows = read_csv(out / "simulate.csv")
        assert list(rows[0]) == ["t", "l1_norm", "linf_norm", "defect", "theta_residual"]
        assert rows[0]["l1_norm"] == "5/4" and rows[0]["linf_norm"] == "3/2"
        doc = json.loads((out / "simulate.json").read_text())
        assert step_from_json(doc["final"]) == f

    def test_simulate_series(self, g3_file, tmp_path):
        out = tmp_path / "s"
        assert main(["simulate", "--graph", g3_file, "--tgrid", "0:10:1/2", "--out", str(out)]) == 0
        rows = read_csv(out / "simulate.csv")
        assert len(rows) == 21
        assert all(r["l1_norm"] == "1" for r in rows)
        assert float(rows[-1]["defect"]) < float(rows[0]["defect"])

    def test_spectral(self, g3_file, tmp_path):
        out = tmp_path / "sp"
        assert main(["spectral", "--graph", g3_file, "--tol", "1e-12", "--out", str(out)]) == 0
        doc = json.loads((out / "spectral.json").read_text())
        assert doc["k"] == 1
        assert 0.6 < doc["rho"] < 0.8

    def test_resolvent(self, tmp_path):
        out = tmp_path / "r"
        assert main(["resolvent", "--template", "cycle:2", "--lambda", "1/2,1,2",
                     "--sgrid", "0:1:1/8", "--out", str(out)]) == 0
        rows = read_csv(out / "resolvent.csv")
        assert len(rows) == 27
        assert list(rows[0]) == ["lambda", "s", "e0", "e1"]

    def test_subdivide(self, tmp_path):
        out = tmp_path / "d"
        assert main(["subdivide", "--template", "cycle:2", "--velocities", "1,1/2", "--out", str(out)]) == 0
        doc = json.loads((out / "subdivide.json").read_text())
        assert doc["l"] == [1, 2] and doc["new_edge_count"] == 3 and doc["period"] == "3"

    def test_measure_sim(self, tmp_path):
        mu = EdgeMeasure.dirac(Fraction(1, 2), {0: 1})
        init = tmp_path / "m.json"
        init.write_text(json.dumps(measure_to_json(mu)))
        out = tmp_path / "m"
        assert main(["measure-sim", "--template", "cycle:2", "--init", str(init),
                     "--tgrid", "0:2:1/4", "--out", str(out)]) == 0
        probe = read_csv(out / "probe.csv")
        assert list(probe[0]) == ["t", "pairing_gap", "tv_gap"]
        assert all(r["tv_gap"] == "2" for r in probe)
        doc = json.loads((out / "measure_sim.json").read_text())
        # two laps on the 2-cycle bring the atom home
        assert measure_from_json(doc["final"]) == mu

    def test_random_template_deterministic(self, tmp_path, capsys):
        assert main(["analyze", "--template", "random", "--seed", "7"]) == 0
        a = capsys.readouterr().out
        assert main(["analyze", "--template", "random", "--seed", "7"]) == 0
        assert capsys.readouterr().out == a


class TestErrors:
    def test_invalid_graph(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"vertices": [0, 1], "edges": [{"id": 0, "tail": 0, "head": 1, "weight": "1"}]}))
        assert main(["analyze", "--graph", str(path)]) == 2
        assert "degenerate: v1" in capsys.readouterr().err

    def test_missing_file(self, capsys):
        assert main(["analyze", "--graph", "/nonexistent.json"]) == 2

    def test_bad_json(self, tmp_path):
        path = tmp_path / "x.json"
        path.write_text("{not json")
        assert main(["analyze", "--graph", str(path)]) == 2

    def test_no_graph(self):
        assert main(["analyze"]) == 2

    def test_unknown_template(self):
        assert main(["analyze", "--template", "torus"]) == 2


def test_emitted_graph_json_reingests(g3_file):
    with open(g3_file) as fh:
        assert graph_from_json(json.load(fh)) == example_g3()
