import io
import subprocess
import sys

import pytest

from smallbias.cli import main
from smallbias.derandomizer import ParameterSet
from smallbias.setfile import read_set, write_set

from conftest import SQRT_02, fixture_path


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


@pytest.fixture
def p11():
    return str(fixture_path(11))


class TestFindSet:
    def test_n11(self, tmp_path):
        dest = tmp_path / "s11.txt"
        code, out = run("find-set", "--n", "11", "--epsilon", "0.2", "--d", "45", "--out", str(dest))
        assert code == 0
        pset = read_set(dest)
        assert pset.d == 45 and len(pset.ks) == 45
        max_bias = float(out.split("max_bias=")[1].split()[0])
        assert max_bias <= 0.4473
        for key in ("n=11", "d=45", "phi_0=", "phi_d=", "wall_time_s="):
            assert key in out

    def test_z2_infeasible(self, capsys):
        code, _ = run("find-set", "--n", "2", "--gamma", "0.5")
        assert code == 1
        assert "infeasible" in capsys.readouterr().err

    def test_default_d(self):
        _, chosen = run("choose-d", "--n", "11", "--epsilon", "0.2")
        code, out = run("find-set", "--n", "11", "--epsilon", "0.2")
        assert code == 0
        assert chosen.splitlines()[0] == "d=40"
        assert "d=40" in out.splitlines()

    def test_explicit_infeasible_d(self):
        assert run("find-set", "--n", "11", "--gamma", "0.4472", "--d", "5")[0] == 1

    def test_usage_errors(self):
        assert run("find-set", "--n", "11")[0] == 2
        assert run("find-set", "--n", "1", "--gamma", "0.5")[0] == 2
        assert run("find-set", "--n", "11", "--gamma", "1.5")[0] == 2
        with pytest.raises(SystemExit) as info:
            main(["find-set", "--n", "11", "--gamma", "0.5", "--epsilon", "0.2"])
        assert info.value.code == 2

    def test_io_error(self, tmp_path):
        code, _ = run("find-set", "--n", "11", "--epsilon", "0.2", "--out", str(tmp_path / "no" / "x.txt"))
        assert code == 3


class TestVerifySet:
    def test_p11(self, p11, tmp_path):
        curve = tmp_path / "curve.csv"
        code, out = run("verify-set", "--in", p11, "--curve", str(curve))
        assert code == 0
        assert "max_bias=0.1 " in out
        lines = curve.read_text().splitlines()
        assert lines[0] == "j,bias,accept_prob"
        assert len(lines) == 11
        for line in lines[1:]:
            _, bias, prob = line.split(",")
            assert abs(float(bias) + 0.1) < 1e-9
            assert abs(float(prob) - 0.01) < 1e-9
        assert b"\r" not in curve.read_bytes()

    def test_all_ones_fails(self, tmp_path):
        path = tmp_path / "ones.txt"
        write_set(ParameterSet(11, 45, SQRT_02, [1] * 45), path)
        assert run("verify-set", "--in", str(path))[0] == 1

    def test_gamma_override(self, p11):
        assert run("verify-set", "--in", p11, "--gamma", "0.05")[0] == 1

    def test_malformed(self, tmp_path, capsys):
        path = tmp_path / "bad.txt"
        path.write_text("# smallbias-set v1\nn=11\nd=2\ngamma=0.4\nk=1 0\n")
        assert run("verify-set", "--in", str(path))[0] == 3
        assert ":5:" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert run("verify-set", "--in", str(tmp_path / "nope.txt"))[0] == 3

    def test_curve_stable(self, p11, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run("verify-set", "--in", p11, "--curve", str(a))
        run("verify-set", "--in", p11, "--curve", str(b))
        assert a.read_bytes() == b.read_bytes()


class TestVerifyAppendix:
    def test_all_rows(self):
        code, out = run("verify-appendix")
        assert code == 0
        assert out.count("PASS") == 15
        assert "15/15" in out
        p11 = next(line for line in out.splitlines() if line.startswith("p= 11"))
        assert "max_bias=0.100000000000" in p11

    def test_tampered(self, tmp_path):
        for p in (11, 17, 23, 29, 31, 37, 41, 47, 53, 59, 61, 67, 71, 83, 97):
            text = fixture_path(p).read_text()
            if p == 11:
                text = text.replace("k=1 4 2", "k=0 4 2")
            (tmp_path / f"table1_p{p:03d}.txt").write_text(text)
        assert run("verify-appendix", "--fixtures", str(tmp_path))[0] == 3

    def test_missing(self, tmp_path):
        assert run("verify-appendix", "--fixtures", str(tmp_path))[0] == 3

    def test_failing_row(self, tmp_path):
        for p in (11, 17, 23, 29, 31, 37, 41, 47, 53, 59, 61, 67, 71, 83, 97):
            ks = "1 " * 44 + "1" if p == 11 else None
            text = fixture_path(p).read_text()
            if ks:
                text = text.split("k=")[0] + "k=" + ks + "\n"
            (tmp_path / f"table1_p{p:03d}.txt").write_text(text)
        code, out = run("verify-appendix", "--fixtures", str(tmp_path))
        assert code == 1
        assert "14/15" in out


class TestSimulateMod:
    def test_j_divisible(self, p11):
        code, out = run("simulate-mod", "--set", p11, "--j", "11")
        assert code == 0
        row = out.splitlines()[1].split(",")
        assert row[0] == "11" and float(row[1]) == 1.0 and abs(float(row[2]) - 1) < 1e-10

    def test_range(self, p11, tmp_path):
        dest = tmp_path / "mod.csv"
        code, out = run("simulate-mod", "--set", p11, "--j-range", "1..10", "--csv", str(dest))
        assert code == 0
        rows = [line.split(",") for line in dest.read_text().splitlines()]
        assert rows[0] == ["j", "closed", "simulated", "diff"]
        assert len(rows) == 11
        for j, closed, sim, diff in rows[1:]:
            assert float(closed) == pytest.approx(0.01, abs=1e-12)
            assert float(sim) == pytest.approx(0.01, abs=1e-10)
            assert float(diff) < 1e-10

    def test_composite(self, tmp_path):
        path = tmp_path / "c.txt"
        write_set(ParameterSet(12, 2, 0.5, [1, 5]), path)
        assert run("simulate-mod", "--set", str(path), "--j", "3")[0] == 2

    def test_bad_range(self, p11):
        assert run("simulate-mod", "--set", p11, "--j-range", "5-1")[0] == 2


class TestSimulatePalindrome:
    def test_exact(self):
        code, out = run("simulate-palindrome", "--s", "4", "--epsilon", "0.2", "--word", "1001#1111#0110", "--exact")
        assert code == 0
        assert out.splitlines()[-1] == "1001#1111#0110,1"

    def test_s8_bound(self):
        code, out = run(
            "simulate-palindrome", "--s", "8", "--epsilon", "0.2",
            "--word", "11110111#00011000#00011101", "--exact",
        )
        assert code == 0
        prob = float(out.splitlines()[-1].split(",")[1])
        assert prob <= 0.2

    def test_shots_deterministic(self):
        argv = ("simulate-palindrome", "--s", "8", "--epsilon", "0.2",
                "--word", "11110111#00011000#10000001", "--shots", "1000", "--seed", "7")
        first, second = run(*argv), run(*argv)
        assert first == second
        acc, rej = map(int, first[1].splitlines()[-1].split(",")[1:])
        assert acc + rej == 1000

    def test_batch_with_violation(self, tmp_path):
        words = tmp_path / "words.txt"
        words.write_text("1001#1111\n10x1\n0110\n")
        code, out = run("simulate-palindrome", "--s", "4", "--epsilon", "0.2", "--words", str(words), "--exact")
        lines = out.splitlines()[2:]
        assert code == 3
        assert lines[0] == "1001#1111,1"
        assert lines[1].startswith("10x1,error: promise violation at offset 2")
        assert lines[2] == "0110,1"

    def test_with_set_file(self, tmp_path):
        dest = tmp_path / "s4.txt"
        assert run("find-set", "--n", "4", "--epsilon", "0.2", "--out", str(dest))[0] == 0
        code, out = run("simulate-palindrome", "--s", "4", "--set", str(dest), "--word", "1000", "--exact")
        assert code == 0
        assert float(out.splitlines()[-1].split(",")[1]) <= 0.2

    def test_errors(self, p11):
        assert run("simulate-palindrome", "--s", "5", "--epsilon", "0.2", "--word", "1", "--exact")[0] == 2
        assert run("simulate-palindrome", "--s", "4", "--set", p11, "--word", "1001", "--exact")[0] == 2
        assert run("simulate-palindrome", "--s", "4", "--word", "1001", "--exact")[0] == 2
        assert run("simulate-palindrome", "--s", "4", "--epsilon", "0.2", "--word", "1001")[0] == 2


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "smallbias", "verify-set", "--in", str(fixture_path(11))],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "PASS" in proc.stdout
