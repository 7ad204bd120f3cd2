import json
import subprocess
import sys

import pytest

from rfl.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gamma_json_schema(capsys):
    code, out, _ = run(capsys, "gamma", "--k", "3", "--p", "0.5", "--variant", "linear", "--tol", "1e-5", "--format", "json")
    assert code == 0
    rec = json.loads(out)
    assert list(rec) == ["regime", "k", "p", "variant", "gamma", "method", "error", "p_r", "rho", "seed"]
    assert rec["gamma"] == pytest.approx(0.12398, abs=1e-4)


def test_gamma_lambda_schema(capsys):
    code, out, _ = run(capsys, "gamma", "--lambda", "2.5", "--p", "0.5")
    rec = json.loads(out)
    assert code == 0 and "lambda" in rec and "k" not in rec and rec["regime"] == "general"


def test_reduce_example(capsys):
    code, out, _ = run(capsys, "reduce", "--k", "4", "--word", "RLRLLLRLL")
    rec = json.loads(out)
    assert code == 0 and rec["reduced"] == "R" and rec["sign"] in (1, -1)


def test_measure_partition(capsys):
    code, out, _ = run(capsys, "measure", "--k", "4", "--rho", "0.7", "--depth", "2", "--format", "csv")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "path,lo,hi,mass" and len(lines) == 10
    assert sum(float(line.split(",")[3]) for line in lines[1:]) == pytest.approx(1.0)


def test_measure_general(capsys):
    code, out, _ = run(capsys, "measure", "--lambda", "2", "--p", "0.3", "--depth", "3")
    lines = out.strip().splitlines()
    assert code == 0 and len(lines) == 9 and lines[1].split(",")[0] in ("LLL", "RRR", "LLR", "RLL")


def test_scan_csv(capsys):
    code, out, _ = run(capsys, "scan", "--k", "3,4", "--p-grid", "0.5,1", "--tol", "1e-4")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "regime,param,p,variant,gamma,error"
    assert len(lines) == 1 + 8


def test_exit_codes(capsys):
    assert run(capsys, "gamma", "--k", "4", "--p", "0.2", "--variant", "nonlinear")[0] == 3
    assert run(capsys, "gamma", "--lambda", "1.5", "--p", "0.5")[0] == 3
    assert run(capsys, "gamma", "--k", "4")[0] == 2
    assert run(capsys, "gamma", "--p", "0.5")[0] == 2
    assert run(capsys, "gamma", "--k", "4", "--p", "1.5")[0] == 2
    code, _, err = run(capsys, "measure", "--k", "4", "--depth", "2")
    assert code == 2 and "--rho" in err
    with pytest.raises(SystemExit) as info:
        main(["gamma", "--k", "3", "--lambda", "2", "--p", "0.5"])
    assert info.value.code == 2


def test_regime_message_names_restriction(capsys):
    _, _, err = run(capsys, "gamma", "--k", "4", "--p", "0.2", "--variant", "nonlinear")
    assert "p > 1/k" in err


def test_mc_is_byte_deterministic(capsys):
    argv = ("mc", "--k", "4", "--p", "0.5", "--steps", "20000", "--trials", "3", "--seed", "5")
    first = run(capsys, *argv)[1]
    assert run(capsys, *argv)[1] == first
    assert json.loads(first)["method"] == "montecarlo"


def test_simulate_exact_zero_flag(capsys):
    code, out, _ = run(capsys, "simulate", "--k", "4", "--exact", "--f0", "l", "--f1", "1", "--steps", "6")
    rows = [line.split(",") for line in out.strip().splitlines()]
    assert code == 0 and rows[0] == ["n", "value", "radius", "zero"]
    assert rows[3][0] == "2" and float(rows[3][1]) == 0.0 and rows[3][3] == "1"


def test_simulate_nonlinear_subcritical(capsys):
    code, out, _ = run(capsys, "simulate", "--k", "3", "--p", "0.2", "--variant", "nonlinear", "--steps", "50")
    rows = out.strip().splitlines()
    assert code == 0 and rows[0] == "n,log_abs,l_append" and len(rows) == 51


def test_signflip_and_pstar_and_excursions(capsys):
    rec = json.loads(run(capsys, "signflip", "--k", "3", "--p", "0.5", "--steps", "100000")[1])
    assert rec["mismatches"] == 0 and abs(rec["frequency"] - rec["sigma"]) < 0.01
    rec = json.loads(run(capsys, "pstar", "--k", "3")[1])
    assert rec["pstar"] == 0.0 and rec["boundary"] is True
    rec = json.loads(run(capsys, "excursions", "--k", "3", "--max-len", "12")[1])
    assert rec["counts_by_length"] == {"3": 1, "6": 3, "9": 12, "12": 55}


def test_out_file(tmp_path, capsys):
    path = tmp_path / "r.json"
    assert main(["reduce", "--k", "3", "--word", "RLL", "--out", str(path)]) == 0
    assert json.loads(path.read_text())["reduced"] == ""
    assert capsys.readouterr().out == ""


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "rfl.cli", "reduce", "--k", "4", "--word", "RLLL"],
                         capture_output=True, text=True, check=True)
    assert json.loads(res.stdout)["reduced"] == ""
