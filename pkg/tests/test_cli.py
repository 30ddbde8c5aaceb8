import json

import pytest

from sbo.cli import EXIT_ERROR, EXIT_FAIL, EXIT_OK, EXIT_USAGE, fmt, main
from sbo.config import RunConfig, parse_config
from sbo.errors import ConfigError

GRID = {"L": 50.26548245743669, "n": 64, "dt": 0.01, "T": 0.05}


def write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def run(tmp_path, command, doc, *extra, tag="out_"):
    cfg = write(tmp_path, doc)
    return main([command, "--config", cfg, "--out", str(tmp_path / tag), *extra])


def test_fmt_round_trips_floats():
    x = 0.1 + 0.2
    assert float(fmt(x)) == x and fmt(3) == "3" and fmt(True) == "true"


def test_config_round_trip():
    cfg = parse_config(json.dumps({"command": "probe-gateaux", "case": "T12i_low", "s_prime": -1.0,
                                   "N_list": [8, 16, 32, 64, 128], "lambda": [2, 3], "seed": 9}))
    again = parse_config(cfg.to_json())
    assert again == cfg
    assert isinstance(cfg, RunConfig) and cfg.lambda_ == [2, 3]


@pytest.mark.parametrize("doc,needle", [
    ({"command": "solve", "grid": {**GRID, "m": 3}}, "grid.m"),
    ({"command": "solve", "bogus": 1, "grid": GRID}, "bogus"),
    ({"command": "solve", "grid": {"L": 1.0, "dt": 0.1, "T": 1.0}}, "grid.n"),
    ({"command": "solve", "grid": {**GRID, "n": 48}}, "grid.n"),
    ({"command": "solve", "grid": GRID, "initial": {"u": {"type": "gaussian", "sigma": 1}}}, "initial.u.sigma"),
    ({"command": "probe-gateaux", "case": "T13_a", "nu": 0.5}, "nu"),
    ({"command": "probe-gateaux", "case": "T12i_low", "N_list": [8, 16, 32, 64]}, "N_list"),
    ({"command": "probe-bilinear", "case": "T42iii", "nu": 0.5}, "nu"),
    ({"command": "oracle-calculus", "params": {"delta": 1}}, "params.delta"),
    ({"command": "oracle-calculus", "seed": -1}, "seed"),
])
def test_config_errors_are_path_qualified(doc, needle):
    with pytest.raises(ConfigError) as exc:
        parse_config(json.dumps(doc))
    assert str(exc.value).startswith(needle)


def test_case_forcing():
    assert parse_config(json.dumps({"command": "probe-gateaux", "case": "T13_b"})).nu == 1.0
    assert parse_config(json.dumps({"command": "probe-gateaux", "case": "T13_b", "nu": -1})).nu == -1.0
    t43 = parse_config(json.dumps({"command": "probe-bilinear", "case": "T43"}))
    assert (t43.nu, t43.s, t43.s_prime) == (1.0, 0.0, -0.5)
    assert parse_config(json.dumps({"command": "probe-bilinear", "case": "T42iii"})).nu == 0.0


def test_command_mismatch_and_malformed():
    with pytest.raises(ConfigError):
        parse_config(json.dumps({"command": "solve", "grid": GRID}), "picard")
    with pytest.raises(ConfigError):
        parse_config("{not json")


def test_conserve_zero_data(tmp_path):
    doc = {"command": "conserve", "grid": GRID, "initial": {"u": {"type": "zero"}, "v": {"type": "zero"}}}
    assert run(tmp_path, "conserve", doc) == EXIT_OK
    lines = (tmp_path / "out_conserve.csv").read_text().splitlines()
    assert lines[0] == "t,mass,momentum_like,energy,norm_u_Hs,norm_v_Hs_prime"
    assert all(row.split(",")[1:4] == ["0", "0", "0"] for row in lines[1:])
    assert (tmp_path / "out_summary.txt").read_text().strip().endswith("overall: PASS")


def test_conserve_coarse_dt_fails(tmp_path):
    doc = {"command": "conserve", "grid": {**GRID, "dt": 0.05, "T": 0.5}}
    assert run(tmp_path, "conserve", doc) == EXIT_FAIL
    assert "FAIL" in (tmp_path / "out_summary.txt").read_text()


def test_usage_errors(tmp_path):
    assert main(["conserve", "--config", str(tmp_path / "missing.json")]) == EXIT_USAGE
    assert run(tmp_path, "solve", {"command": "solve", "grid": {"L": 1.0}}) == EXIT_USAGE
    assert main(["frobnicate", "--config", "x"]) == EXIT_USAGE
    assert run(tmp_path, "solve", {"command": "solve", "grid": GRID}, "--seed", "-3") == EXIT_USAGE


def test_computation_error_exit(tmp_path):
    # N = 1 is below the admissibility floor of T12i_low
    doc = {"command": "probe-gateaux", "case": "T12i_low", "N_list": [1, 2, 4, 8, 16]}
    assert run(tmp_path, "probe-gateaux", doc) == EXIT_ERROR


def test_solve_and_picard(tmp_path):
    assert run(tmp_path, "solve", {"command": "solve", "grid": GRID, "s": 1.0}) == EXIT_OK
    doc = {"command": "picard", "grid": {"L": GRID["L"], "n": 64, "T": 0.1},
           "initial": {"u": {"type": "gaussian", "amplitude": 0.3}, "v": {"type": "gaussian", "amplitude": 0.3}},
           "iterations": 6, "quadrature_nodes": 17}
    assert run(tmp_path, "picard", doc) == EXIT_OK
    assert len((tmp_path / "out_picard.csv").read_text().splitlines()) == 7


def test_scaling_command(tmp_path):
    doc = {"command": "scaling", "grid": {"L": 6.283185307179586, "n": 64}, "s": -0.5, "s_prime": -1.0}
    assert run(tmp_path, "scaling", doc) == EXIT_OK


def test_probe_gateaux_csv(tmp_path):
    doc = {"command": "probe-gateaux", "case": "T13_a", "s_prime": -1.0}
    assert run(tmp_path, "probe-gateaux", doc) == EXIT_OK
    lines = (tmp_path / "out_probe-gateaux.csv").read_text().splitlines()
    assert lines[0] == "case,nu,s,s_prime,N,ratio,predicted_exponent,fitted_slope,verdict"
    assert len(lines) == 7


def test_probe_bilinear_writes_boxes(tmp_path):
    doc = {"command": "probe-bilinear", "case": "T42i", "s_prime": 0.5, "N_list": [8, 16, 32, 64, 128]}
    assert run(tmp_path, "probe-bilinear", doc) == EXIT_OK
    boxes = json.loads((tmp_path / "out_boxes.json").read_text())
    assert boxes["case"] == "T42i" and len(boxes["boxes"]) == 5


def test_boundedness_exploration_is_informational(tmp_path):
    doc = {"command": "probe-bilinear", "case": "boundedness", "s_prime": 0.6, "trials": 1,
           "N_list": [8, 16, 32, 64, 128]}
    assert run(tmp_path, "probe-bilinear", doc) == EXIT_OK
    assert "exploration mode" in (tmp_path / "out_summary.txt").read_text()


def test_oracle_calculus(tmp_path):
    doc = {"command": "oracle-calculus", "which": "iii", "params": {"p": 1.0}}
    assert run(tmp_path, "oracle-calculus", doc) == EXIT_OK


def test_determinism_byte_identical(tmp_path):
    doc = {"command": "probe-bilinear", "case": "boundedness", "s_prime": -0.5, "trials": 2,
           "N_list": [8, 16, 32, 64, 128], "seed": 123}
    assert run(tmp_path, "probe-bilinear", doc, tag="a_") == EXIT_OK
    assert run(tmp_path, "probe-bilinear", doc, tag="b_") == EXIT_OK
    for name in ("probe-bilinear.csv", "summary.txt", "boxes.json"):
        assert (tmp_path / f"a_{name}").read_bytes() == (tmp_path / f"b_{name}").read_bytes()
    # the seed flag changes the random trials
    assert run(tmp_path, "probe-bilinear", doc, "--seed", "7", tag="c_") == EXIT_OK
    assert (tmp_path / "c_probe-bilinear.csv").read_bytes() != (tmp_path / "a_probe-bilinear.csv").read_bytes()
