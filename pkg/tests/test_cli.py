import json
import shutil
import subprocess
import sys

import pytest

from partialmetric.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestDemo:
    def test_exit_and_certificate(self, capsys):
        code, out, _ = run(capsys, "demo", "--eps", "1e-9")
        assert code == 0
        d = json.loads(out)
        assert d["certificate"]["valid"] and abs(d["certificate"]["x_star"]) <= 1e-9
        assert d["proper_to_zero"]["verdict"] == "CertifiedAtResolution"
        assert d["pairwise_identity"]["verdict"] == "CertifiedAtResolution"
        assert len(d["table"]) == 100

    def test_csv(self, capsys):
        code, out, _ = run(capsys, "demo", "--format", "csv")
        lines = out.splitlines()
        assert code == 0 and lines[0].startswith("n,x_n") and len(lines) == 101

    def test_budget_too_small(self, capsys):
        assert run(capsys, "demo", "--max-iter", "5")[0] == 1


class TestAudit:
    def test_max(self, capsys):
        code, out, _ = run(capsys, "audit", "--space", "max", "--trials", "10000", "--seed", "7")
        assert code == 0 and json.loads(out)["violations"] == []

    def test_table_ok(self, capsys, tmp_path):
        path = tmp_path / "ok.txt"
        path.write_text("2\n0 1\n1 0\n")
        assert run(capsys, "audit", "--space", f"table:{path}", "--trials", "100")[0] == 0

    def test_bad_table(self, capsys, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("2\n1 0.5\n0.5 0\n")
        code, out, err = run(capsys, "audit", "--space", f"table:{path}")
        assert code == 2 and out == ""
        assert "pm2" in err and "(0, 1)" in err

    def test_missing_file(self, capsys, tmp_path):
        assert run(capsys, "audit", "--space", f"table:{tmp_path / 'nope'}")[0] == 2

    def test_unknown_space(self, capsys):
        code, _, err = run(capsys, "audit", "--space", "hilbert")
        assert code == 2 and "unknown space" in err

    def test_csv_not_offered(self, capsys):
        assert run(capsys, "audit", "--trials", "10", "--format", "csv")[0] == 2


class TestConverge:
    def test_inverse_to_zero(self, capsys):
        code, out, _ = run(capsys, "converge", "--anchor", "0")
        assert code == 0
        assert set(json.loads(out)["reports"]) == {"cauchy", "tau", "proper", "pairwise_identity"}

    def test_spurious_anchor(self, capsys):
        code, out, _ = run(capsys, "converge", "--anchor", "0.5")
        d = json.loads(out)["reports"]
        assert code == 1
        assert d["tau"]["verdict"] == "CertifiedAtResolution"
        assert d["proper"]["verdict"] == "NotCertified"

    def test_csv_trace(self, capsys):
        code, out, _ = run(capsys, "converge", "--anchor", "0", "--horizon", "5", "--window", "2",
                           "--format", "csv")
        # five terms cannot certify at 1e-3, but the trace is still written
        assert code == 1
        assert out.splitlines()[3] == "3,0.3333333333333333,0.3333333333333333,0.3333333333333333"

    def test_outside_carrier(self, capsys):
        assert run(capsys, "converge", "--space", "punctured", "--anchor", "0")[0] == 2


class TestSolve:
    def test_half(self, capsys):
        assert run(capsys, "solve")[0] == 0

    def test_table_map(self, capsys, tmp_path):
        path = tmp_path / "t.txt"
        path.write_text("3\n0 1 2\n1 0 1\n2 1 0\n")
        code, out, _ = run(capsys, "solve", "--space", f"table:{path}", "--map", "table:0,0,1",
                           "--x0", "2")
        assert code == 0 and json.loads(out)["certificate"]["x_star"] == 0

    def test_leaving_carrier(self, capsys):
        code, _, err = run(capsys, "solve", "--space", "punctured", "--map", "scale:2", "--x0", "0.75")
        assert code == 2 and "iterate 1" in err

    def test_budget_exhausted(self, capsys):
        assert run(capsys, "solve", "--map", "scale:0.99", "--max-iter", "3")[0] == 1

    def test_bad_map(self, capsys):
        assert run(capsys, "solve", "--map", "table:0,1")[0] == 2


class TestWitness:
    def test_full_suite(self, capsys):
        code, out, _ = run(capsys, "witness", "--samples", "10000", "--seed", "7")
        assert code == 0 and all(json.loads(out)["checks"].values())


@pytest.mark.parametrize("argv", [[], ["bogus"], ["audit", "--trials", "0"], ["demo", "--eps", "-1"]])
def test_usage_errors(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_help_shows_defaults(capsys):
    with pytest.raises(SystemExit):
        main(["solve", "--help"])
    assert "default: 1e-09" in capsys.readouterr().out


@pytest.mark.parametrize("argv", [
    ["demo"],
    ["audit", "--trials", "300", "--seed", "3"],
    ["witness", "--samples", "200", "--seed", "4"],
    ["converge", "--anchor", "0", "--horizon", "500"],
])
def test_byte_identical_artifacts(tmp_path, argv):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(argv + ["--out", str(a)]) == main(argv + ["--out", str(b)])
    assert a.read_bytes() == b.read_bytes() and a.stat().st_size > 0


def test_console_script():
    exe = shutil.which("partialmetric")
    cmd = [exe] if exe else [sys.executable, "-m", "partialmetric.cli"]
    proc = subprocess.run(cmd + ["demo"], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["certificate"]["valid"]
