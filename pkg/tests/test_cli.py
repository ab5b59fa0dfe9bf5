import json
import os
import subprocess
import sys

import pytest

from quasitaub import cli
from quasitaub import fields as F


def run_cli(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_scaling_delta(tmp_path, capsys):
    p = tmp_path / "delta.json"
    p.write_text(json.dumps(F.to_dict(F.delta())))
    code, rep = run_cli(["scaling", "--field", str(p), "--kernel", "gaussian", "--site", "infinity"], capsys)
    assert code == 0
    assert rep["result"]["alpha_hat"] == pytest.approx(-1.0, abs=0.01)
    assert rep["schema_version"] == cli.SCHEMA_VERSION and rep["status"] == "ok"


def test_kernel_check_degenerate(capsys):
    code, rep = run_cli(["kernel", "check", "degenerate_demo"], capsys)
    assert code == 2
    assert rep["result"]["nondegenerate"] is False
    assert rep["result"]["worst_ray"][0] == 0.0


def test_kernel_check_gaussian(capsys):
    code, rep = run_cli(["kernel", "check", "gaussian"], capsys)
    r = rep["result"]
    assert code == 0 and r["nondegenerate"] and r["strongly_nondegenerate"] and r["witness_order"] == 0
    assert {"moments", "taylor_terms"} <= r.keys()


def test_littlewood_alt_harmonic(capsys):
    code, rep = run_cli(["littlewood", "--builtin", "alt-harmonic"], capsys)
    assert code == 0
    assert rep["result"]["verdict"].startswith("convergent")
    assert rep["result"]["abel_limit"][0] == pytest.approx(0.6931, abs=1e-3)


def test_littlewood_grandi_is_negative(capsys):
    code, rep = run_cli(["littlewood", "--builtin", "grandi"], capsys)
    assert code == 2 and not rep["result"]["tauberian_ok"]


def test_scaling_polynomial_negative(capsys, tmp_path):
    p = tmp_path / "poly.json"
    p.write_text(json.dumps(F.to_dict(F.polynomial([0, 1.0]))))
    code, rep = run_cli(["scaling", "--field", str(p), "--alpha", "0", "--L", "One"], capsys)
    assert code == 2 and rep["result"]["k_hat"] is None


def test_scaling_refuses_degenerate(capsys):
    code, rep = run_cli(["scaling", "--field", "delta", "--dim", "2", "--kernel", "degenerate_demo"], capsys)
    assert code == 1 and rep["error"]["error"] == "DegenerateKernel"


def test_heat(capsys):
    code, rep = run_cli(["heat", "--init", "delta"], capsys)
    assert code == 0 and rep["result"]["d_curves"]["stabilizes"]
    assert rep["result"]["time"]["ell"][0][0] == pytest.approx(0.28209479, abs=1e-8)


@pytest.mark.parametrize("argv", [
    ["scaling", "--field", "nonsense"],
    ["scaling", "--field", "delta", "--n-lambda", "4"],
    ["scaling", "--field", "delta", "--bogus"],
    ["littlewood", "--builtin", "fibonacci"],
    ["transform", "--field", "abs:1"],
])
def test_invalid_config_exits_1(argv, capsys):
    code, rep = run_cli(argv, capsys)
    assert code == 1 and rep["status"] == "error"


def test_slow_decay_is_an_error(capsys):
    code, rep = run_cli(["littlewood", "--builtin", "basel", "--N", "100000"], capsys)
    assert code == 1 and rep["error"]["error"] == "SlowDecay"


def test_bad_thread_variable(monkeypatch, capsys):
    monkeypatch.setenv("QUASITAUB_THREADS", "zero")
    code, rep = run_cli(["kernel", "check", "gaussian"], capsys)
    assert code == 1


def test_transform_csv(tmp_path, capsys):
    csv_path = tmp_path / "sheet.csv"
    code, rep = run_cli(["transform", "--field", "heaviside", "--n-lambda", "16", "--ratio", "2",
                         "--csv", str(csv_path)], capsys)
    assert code == 0
    rows = csv_path.read_text().splitlines()
    assert len(rows) == 17 * 16
    assert len(rows[0].split(",")) == 6


def test_report_round_trip(capsys):
    code, rep = run_cli(["kernel", "check", "paper_lizorkin"], capsys)
    assert json.loads(cli.dumps(rep)) == rep


@pytest.mark.parametrize("argv", [
    ["scaling", "--field", "abs:0.5", "--site", "origin"],
    ["kernel", "check", "paper_mixed"],
    ["littlewood", "--builtin", "basel"],
])
def test_replay_is_byte_identical(tmp_path, argv):
    first = tmp_path / "first.json"
    again = tmp_path / "again.json"
    assert cli.main(argv + ["--json", str(first)]) in (0, 2)
    cli.main(["replay", str(first), "--json", str(again)])
    assert first.read_bytes() == again.read_bytes()


def test_thread_count_does_not_matter(tmp_path):
    outs = []
    for threads in ("1", "4"):
        path = tmp_path / f"rep{threads}.json"
        env = dict(os.environ, QUASITAUB_THREADS=threads)
        subprocess.run([sys.executable, "-m", "quasitaub.cli", "scaling", "--field", "heaviside",
                        "--json", str(path)], env=env, check=True)
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
