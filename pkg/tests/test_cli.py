import csv
import json

import pytest

from orlicz import cli
from orlicz.config import load_config
from orlicz.errors import ConfigurationError

SUBLINEAR = {
    "nfunction": {"kind": "exponential"},
    "nonlinearity": {"family": "sublinear", "kappa": 5.0, "s": 0.75},
    "mesh": {"nx": 12, "ny": 12},
    "solver": {"seed": 3},
}
CONCAVE_CONVEX = {
    "nfunction": {"kind": "exponential"},
    "nonlinearity": {"family": "concave_convex", "lambda": 0.25, "alpha": 0.75, "q": 2.0},
    "mesh": {"nx": 16, "ny": 16, "Lx": 4.0, "Ly": 4.0},
    "solver": {"seed": 0, "ring_samples": 50},
}


def write_cfg(tmp_path, data, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data, indent=2))
    return str(path)


def run(tmp_path, data, *args, out="out"):
    return cli.main([args[0], "--config", write_cfg(tmp_path, data),
                     "--out", str(tmp_path / out), *args[1:]])


def with_(base, **sections):
    d = json.loads(json.dumps(base))
    for key, val in sections.items():
        d[key] = val
    return d


class TestConfigErrors:
    def test_zero_cells(self, tmp_path, capsys):
        bad = with_(SUBLINEAR, mesh={"nx": 0, "ny": 8})
        assert run(tmp_path, bad, "check") == cli.EXIT_CONFIG
        err = capsys.readouterr().err
        assert "mesh.nx" in err and "line" in err

    def test_unknown_key(self, tmp_path, capsys):
        bad = with_(SUBLINEAR, solver={"seed": 1, "tolerance": 1e-6})
        assert run(tmp_path, bad, "check") == cli.EXIT_CONFIG
        assert "solver.tolerance" in capsys.readouterr().err

    def test_invalid_json_line(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{\n  "mesh": {"nx": 8,\n  }\n}')
        with pytest.raises(ConfigurationError) as exc:
            load_config(str(path))
        assert exc.value.line == 3
        assert cli.main(["check", "--config", str(path)]) == cli.EXIT_CONFIG

    def test_missing_file(self, tmp_path):
        assert cli.main(["check", "--config", str(tmp_path / "none.json")]) == cli.EXIT_CONFIG

    def test_bad_family_parameter(self, tmp_path):
        bad = with_(SUBLINEAR, nonlinearity={"family": "sublinear", "kappa": -1, "s": 0.75})
        assert run(tmp_path, bad, "check") == cli.EXIT_CONFIG

    def test_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            cli.main(["solve", "--config", write_cfg(tmp_path, SUBLINEAR)])
        assert exc.value.code == cli.EXIT_CONFIG

    def test_bad_seed_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("ORLICZ_SEED", "abc")
        assert run(tmp_path, SUBLINEAR, "check") == cli.EXIT_CONFIG


class TestCheck:
    def test_exponential_records_phi4(self, tmp_path):
        assert run(tmp_path, SUBLINEAR, "check") == cli.EXIT_OK
        rep = json.loads((tmp_path / "out" / "run_check.json").read_text())
        assert "phi4" in rep["violations"]
        assert "delta2" in rep["violations"]
        assert rep["delta2"]["holds"] is False

    def test_strict(self, tmp_path):
        assert run(tmp_path, SUBLINEAR, "check", "--strict") == cli.EXIT_STRICT
        assert run(tmp_path, with_(SUBLINEAR, strict=True), "check") == cli.EXIT_STRICT

    def test_power_delta2(self, tmp_path):
        data = with_(SUBLINEAR, nfunction={"kind": "power", "p": 3},
                     nonlinearity={"family": "power_of_phi", "q": 2.0})
        assert run(tmp_path, data, "check") == cli.EXIT_OK
        rep = json.loads((tmp_path / "out" / "run_check.json").read_text())
        assert rep["delta2"]["holds"] is True
        assert rep["delta2"]["sup_ratio"] == pytest.approx(8.0, abs=1e-9)


class TestSolve:
    def test_global_min(self, tmp_path):
        assert run(tmp_path, SUBLINEAR, "solve", "--mode", "global-min") == cli.EXIT_OK
        rep = json.loads((tmp_path / "out" / "run_global-min.json").read_text())
        assert rep["energy"] < 0 and rep["seed"] == 3
        assert rep["classification"] == "global-min"
        with open(tmp_path / "out" / "run_global-min.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["x", "y", "u"] and len(rows) == 1 + 13 * 13

    def test_mode_family_mismatch(self, tmp_path, capsys):
        assert run(tmp_path, SUBLINEAR, "solve", "--mode", "mountain-pass") == cli.EXIT_CONFIG
        assert "family" in capsys.readouterr().err

    def test_mountain_pass_without_geometry(self, tmp_path):
        data = with_(SUBLINEAR, nonlinearity={"family": "zero"})
        assert run(tmp_path, data, "solve", "--mode", "mountain-pass") == cli.EXIT_SOLVER

    def test_non_convergence(self, tmp_path):
        data = with_(SUBLINEAR, solver={"max_iter": 1, "tol_res": 1e-15})
        assert run(tmp_path, data, "solve", "--mode", "global-min") == cli.EXIT_SOLVER

    def test_concave_convex_pair(self, tmp_path):
        assert run(tmp_path, CONCAVE_CONVEX, "solve", "--mode", "concave-convex") == cli.EXIT_OK
        out = tmp_path / "out"
        for stem in ("run_concave-convex_min", "run_concave-convex_mp"):
            assert (out / f"{stem}.csv").exists()
        lo = json.loads((out / "run_concave-convex_min.json").read_text())
        hi = json.loads((out / "run_concave-convex_mp.json").read_text())
        assert lo["energy"] < 0 < hi["energy"]
        assert lo["lambda_used"] == hi["lambda_used"]


class TestSweep:
    def test_rows_and_degenerate_lambda(self, tmp_path):
        code = run(tmp_path, CONCAVE_CONVEX, "sweep", "--lambdas", "0.25", "0")
        assert code == cli.EXIT_OK
        with open(tmp_path / "out" / "run_sweep.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 2
        assert list(rows[0]) == ["lambda", "found_pair", "I_min", "I_mp", "residual_min",
                                 "residual_mp"]
        assert rows[0]["found_pair"] == "true"
        assert rows[1]["found_pair"] == "false"

    def test_only_zero(self, tmp_path):
        assert run(tmp_path, CONCAVE_CONVEX, "sweep", "--lambdas", "0") == cli.EXIT_SOLVER

    def test_empty_list(self, tmp_path):
        assert run(tmp_path, CONCAVE_CONVEX, "sweep", "--lambdas") == cli.EXIT_CONFIG

    def test_wrong_family(self, tmp_path):
        assert run(tmp_path, SUBLINEAR, "sweep", "--lambdas", "1") == cli.EXIT_CONFIG


class TestReproducibility:
    def test_byte_identical(self, tmp_path):
        for out in ("a", "b"):
            assert run(tmp_path, SUBLINEAR, "solve", "--mode", "global-min", out=out) == 0
        for name in ("run_global-min.json", "run_global-min.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_seed_override(self, tmp_path, monkeypatch):
        monkeypatch.setenv("ORLICZ_SEED", "42")
        assert run(tmp_path, SUBLINEAR, "solve", "--mode", "global-min") == cli.EXIT_OK
        rep = json.loads((tmp_path / "out" / "run_global-min.json").read_text())
        assert rep["seed"] == 42

    def test_shipped_configs_parse(self):
        import pathlib
        root = pathlib.Path(__file__).resolve().parents[1] / "configs"
        for path in sorted(root.glob("*.json")):
            load_config(str(path))
