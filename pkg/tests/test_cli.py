import csv
import io
import json
import math
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from primedev import checks, cli


@pytest.fixture
def run(tmp_path, capsys):
    """Run the CLI with a config dict; returns (exit code, stdout, stderr)."""

    def _run(command, config=None, *extra):
        args = [command]
        if config is not None:
            path = tmp_path / "config.json"
            path.write_text(config if isinstance(config, str) else json.dumps(config))
            args += ["--config", str(path)]
        code = cli.main(args + list(extra))
        out = capsys.readouterr()
        return code, out.out, out.err

    return _run


def rows_of(text):
    return list(csv.reader(io.StringIO(text)))


def test_rate_delta_measure(run):
    code, out, _ = run("rate", {"rho": {"kind": "atoms", "atoms": [[1, 1]]}, "x_grid": [0, 3, 0.5]})
    assert code == 0
    rows = rows_of(out)
    assert rows[0] == ["x", "I_closed_form", "I_numeric", "theta_star"]
    assert len(rows) == 8
    at_one = [r for r in rows[1:] if float(r[0]) == 1.0][0]
    assert float(at_one[2]) == 0.0 and float(at_one[1]) == 0.0


def test_rate_gaussian_columns_agree(run):
    code, out, _ = run("rate", {"rho": {"kind": "gaussian"}, "x_grid": [-4, 4, 0.125]})
    assert code == 0
    for r in rows_of(out)[1:]:
        assert abs(float(r[1]) - float(r[2])) <= 1e-8


def test_rate_without_closed_form_drops_column(run):
    code, out, _ = run("rate", {"rho": {"kind": "atoms", "atoms": [[1, 0.5], [3, 0.5]]}})
    assert code == 0 and rows_of(out)[0] == ["x", "I_numeric", "theta_star"]


def test_rate_empirical_measure(run):
    cfg = {"rho": {"kind": "empirical", "g": {"kind": "two_value_by_index", "lambda1": 1, "lambda2": 2}, "n": 1000},
           "x_grid": [1, 2, 0.25]}
    code, out, _ = run("rate", cfg)
    assert code == 0 and len(rows_of(out)) == 6


@pytest.mark.parametrize("config,field", [
    ('{"rho": {"kind": "poisson", "lambda": 1}', "line 1"),
    ({"rho": {"kind": "zeta"}}, "'rho'"),
    ({"rho": {"kind": "poisson", "lambda": -1}}, "'rho'"),
    ({"rho": {"kind": "gaussian"}, "x_grid": [0, 1, 0]}, "'x_grid'"),
    ({"rho": {"kind": "gaussian"}, "n": "many"}, "'n'"),
    ({"g": {"kind": "constant", "lambda": "x"}}, "'g'"),
    ({}, "'rho'"),
    ({"model": "w"}, "'model'"),
])
def test_config_errors_name_the_field(run, config, field):
    command = "simulate" if "model" in str(config) else "rate"
    code, _, err = run(command, config)
    assert code == 2
    assert field in err


def test_missing_config_file(run, tmp_path):
    code, _, err = run("rate", None, "--config", str(tmp_path / "nope.json"))
    assert code == 2 and "nope.json" in err


def test_capacity_error_names_parameter(run):
    code, _, err = run("simulate", {"model": "z", "n": 10**7 + 1, "exact": True,
                                    "g": {"kind": "two_value_by_index", "lambda1": 1, "lambda2": 2}})
    assert code == 2 and "CapacityError" in err and "10000001" in err


def test_thread_env_validated(run, monkeypatch):
    monkeypatch.setenv("LDP_ARITH_THREADS", "0")
    code, _, err = run("rate", {"rho": {"kind": "gaussian"}})
    assert code == 2 and "LDP_ARITH_THREADS" in err
    monkeypatch.setenv("LDP_ARITH_THREADS", "4")
    assert run("rate", {"rho": {"kind": "gaussian"}})[0] == 0


def test_simulate_exact_y(run):
    code, out, _ = run("simulate", {"model": "y", "Q": 10**4, "exact": True})
    rows = rows_of(out)
    assert code == 0 and rows[0] == ["value", "prob"]
    assert abs(math.fsum(float(r[1]) for r in rows[1:]) - 1) <= 1e-12


def test_simulate_samples_deterministic(run, tmp_path):
    cfg = {"model": "z", "n": 10**6, "samples": 10**5, "seed": 7}
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run("simulate", cfg, "--out", str(a))[0] == 0
    assert run("simulate", cfg, "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_text().splitlines()) == 10**5 + 1
    c = tmp_path / "c.csv"
    run("simulate", cfg, "--out", str(c), "--seed", "8")
    assert c.read_bytes() != a.read_bytes()


def test_svg_is_well_formed(run):
    code, out, _ = run("rate", {"rho": {"kind": "poisson", "lambda": 2}}, "--format", "svg")
    assert code == 0
    root = ET.fromstring(out)
    polylines = root.findall("{http://www.w3.org/2000/svg}polyline")
    assert len(polylines) == 2
    code, out, _ = run("simulate", {"model": "y", "Q": 1000, "exact": True}, "--format", "svg")
    assert len(ET.fromstring(out).findall("{http://www.w3.org/2000/svg}polyline")) == 1


def test_csv_floats_round_trip(run):
    code, out, _ = run("rate", {"rho": {"kind": "poisson", "lambda": 1.7}, "x_grid": [0.1, 5, 0.7]})
    from primedev.measures import Poisson
    from primedev.ratefn import legendre_rate
    for r in rows_of(out)[1:]:
        x = float(r[0])
        assert float(r[2]) == legendre_rate(Poisson(1.7), x).value
    assert "\r" not in out


def test_oracle_and_counterexample(run):
    code, out, _ = run("oracle", {"n": 10**5, "Q": 50, "C": 1, "r_max": 5})
    rows = rows_of(out)
    assert code == 0 and len(rows) == 7 and all(r[-1] == "true" for r in rows[1:])
    code, out, _ = run("counterexample", {"params": {"lambda1": 1, "lambda2": 2, "delta": 0.1, "theta": 1, "K": 6}})
    rows = rows_of(out)
    assert code == 0 and len(rows) == 7 and [r[3] for r in rows[1:]] == ["low", "high"] * 3
    code, _, err = run("counterexample", {"params": {"lambda1": 1, "lambda2": 1}})
    assert code == 2 and "InfeasibleError" in err


def test_verify_exit_codes(run, monkeypatch):
    code, out, _ = run("verify", None, "duality")
    assert code == 0
    assert "REPORT duality binomial2" in out
    assert out.count("PASS") == 7
    monkeypatch.setitem(checks.SUITES, "duality", lambda: [checks.Check("broken", 1.0, 0.0, checks.FAIL)])
    code, out, _ = run("verify", None, "duality")
    assert code == 1 and "FAIL   broken" in out


def test_module_entry_point(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"rho": {"kind": "atoms", "atoms": [[1, 1]]}}))
    proc = subprocess.run([sys.executable, "-m", "primedev", "rate", "--config", str(cfg)],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout.startswith("x,I_closed_form")
    proc = subprocess.run([sys.executable, "-m", "primedev", "rate", "--bogus"], capture_output=True, text=True)
    assert proc.returncode == 2
