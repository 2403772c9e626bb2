import json
import subprocess
import sys

import pytest

from mpcquant.cli import build_parser, grid_values, main, parse_grid, UsageError


def run(args, capsys):
    code = main(args)
    out, err = capsys.readouterr()
    return code, out, err


def run_json(args, capsys):
    code, out, err = run(args + ["--format", "json", "--no-timing"], capsys)
    return code, (json.loads(out) if out.strip() else None), err


def test_check_quantized(capsys):
    code, rep, _ = run_json(["check", "--scenario", "harmonic", "--n", "2", "--energy", "2.0",
                             "--mode", "mpc", "--seeds", "2"], capsys)
    assert code == 0 and rep["quantized"] is True
    assert {"config", "orbits", "levels", "nonclosing", "version"} <= set(rep)
    orbit = rep["orbits"][0]
    assert {"seed", "period", "action", "parity_frame", "parity_reduced", "lambda",
            "trivial"} <= set(orbit)


def test_check_not_quantized(capsys):
    code, rep, _ = run_json(["check", "--scenario", "harmonic", "--n", "1", "--energy", "1.0",
                             "--mode", "mpc", "--seeds", "2"], capsys)
    assert code == 3 and rep["quantized"] is False


def test_check_ks(capsys):
    code, _, _ = run_json(["check", "--scenario", "harmonic", "--n", "1", "--energy", "1.0",
                           "--mode", "ks", "--seeds", "2"], capsys)
    assert code == 0


def test_scan_both_modes_shows_half_shift(capsys):
    code, rep, _ = run_json(["scan", "--scenario", "harmonic", "--n", "1", "--grid",
                             "0:4:0.25", "--mode", "both"], capsys)
    assert code == 0
    mpc, ks = rep["scans"]
    assert mpc["levels"] == pytest.approx([0.5, 1.5, 2.5, 3.5], abs=1e-9)
    assert ks["levels"] == pytest.approx([1, 2, 3, 4], abs=1e-9)
    assert rep["level_shift"] == pytest.approx(-0.5)


def test_scan_ks_n2(capsys):
    code, rep, _ = run_json(["scan", "--scenario", "harmonic", "--n", "2", "--grid",
                             "0:4:0.25", "--mode", "ks"], capsys)
    assert code == 0 and rep["levels"] == pytest.approx([1, 2, 3, 4], abs=1e-9)


@pytest.mark.parametrize("grid", ["0:0:0.5", "1:0:0.1", "0:1:0", "0:1"])
def test_empty_or_bad_grid_is_usage_error(grid, capsys):
    code, out, err = run(["scan", "--scenario", "harmonic", "--grid", grid], capsys)
    assert code == 1 and "usage error" in err


def test_invariance_product(capsys):
    code, rep, _ = run_json(["invariance", "--scenario", "product_hamiltonian", "--k", "2.0"],
                            capsys)
    assert code == 0 and rep["agree"] and rep["quantized"] == [True, True]
    code, rep, _ = run_json(["invariance", "--scenario", "product_hamiltonian", "--k", "2.5"],
                            capsys)
    assert code == 0 and rep["agree"] and rep["quantized"] == [False, False]


def test_invariance_composed(capsys):
    code, rep, _ = run_json(["invariance", "--scenario", "composed", "--f", "x^3+2x", "--n",
                             "1", "--energy", "0.5", "--seeds", "3"], capsys)
    assert code == 0 and rep["agree"]
    assert rep["energies"] == [0.5, 1.125]


def test_invariance_unsupported_scenario(capsys):
    code, _, err = run(["invariance", "--scenario", "harmonic"], capsys)
    assert code == 1


def test_monodromy_demo(capsys):
    code, rep, _ = run_json(["monodromy-demo", "--scenario", "product_hamiltonian"], capsys)
    assert code == 0 and rep["full_defect"] > 0.1 and rep["reduced_defect"] < 1e-6


def test_json_roundtrip_and_determinism(capsys):
    args = ["check", "--scenario", "harmonic", "--n", "3", "--energy", "1.5", "--seeds", "2",
            "--format", "json", "--no-timing"]
    main(args)
    first = capsys.readouterr().out
    main(args)
    second = capsys.readouterr().out
    assert first == second
    parsed = json.loads(first)
    assert json.dumps(parsed, indent=2) + "\n" == first


def test_table_numbers_appear_in_report(capsys):
    args = ["check", "--scenario", "harmonic", "--n", "1", "--energy", "0.5", "--seeds", "1"]
    main(args)
    table = capsys.readouterr().out
    main(args + ["--format", "json", "--no-timing"])
    text = capsys.readouterr().out
    rep = json.loads(text)
    o = rep["orbits"][0]
    for value in (o["period"], o["action"], o["lambda"]["re"], o["lambda"]["im"]):
        assert repr(value) in table


def test_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scenario": "harmonic", "n": 1, "energy": 1.0, "mode": "mpc",
                               "seeds": 1, "tolerances": {"trivial": 1e-6}}))
    code, rep, _ = run_json(["check", "--config", str(cfg)], capsys)
    assert code == 3
    code, rep, _ = run_json(["check", "--config", str(cfg), "--mode", "ks"], capsys)
    assert code == 0 and rep["config"]["mode"] == "ks"


def test_config_parse_error_reports_line(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text('{\n  "scenario": "harmonic",\n  "n": ,\n}')
    code, _, err = run(["check", "--config", str(cfg)], capsys)
    assert code == 1 and f"{cfg}:3:" in err


def test_config_field_error(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"n": "two"}))
    code, _, err = run(["check", "--config", str(cfg), "--energy", "1"], capsys)
    assert code == 1 and "'n'" in err


def test_out_file(tmp_path, capsys):
    out = tmp_path / "report.json"
    code, _, _ = run(["check", "--scenario", "harmonic", "--energy", "0.5", "--seeds", "1",
                      "--format", "json", "--out", str(out)], capsys)
    assert code == 0 and json.loads(out.read_text())["quantized"] is True


def test_custom_scenario(capsys):
    code, rep, _ = run_json(["check", "--scenario", "custom", "--n", "1", "--hamiltonian",
                             "(p1^2+q1^2)/2", "--energy", "1.5", "--seeds", "1"], capsys)
    assert code == 0


def test_unknown_flag_exits_1():
    with pytest.raises(SystemExit) as exc:
        build_parser().parse_args(["check", "--bogus"])
    assert exc.value.code == 1


def test_grid_semantics():
    assert list(grid_values(parse_grid("0:1:0.25"))) == [0.25, 0.5, 0.75, 1.0]
    with pytest.raises(UsageError):
        grid_values((0.0, 0.0, 0.1))


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "mpcquant", "--version"], capture_output=True,
                         text=True)
    assert out.returncode == 0 and out.stdout.strip()
