import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from rieszkit.cli import UsageError, main, parse_int_set, parse_p_set, split_tolerance_flags
from rieszkit.corpus import radial_bump
from rieszkit.grid import GridField, read_field, write_field
from rieszkit.kernel import kernel_constant
from rieszkit.transforms import mt_apply_fourier

LOWER = -0.17898


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestParsing:
    def test_int_sets(self):
        assert parse_int_set("1..4") == (1, 2, 3, 4)
        assert parse_int_set("2,5") == (2, 5)
        assert parse_int_set("3") == (3,)

    def test_p_sets(self):
        assert parse_p_set("2,4,inf") == (2.0, 4.0, math.inf)

    @pytest.mark.parametrize("text", ["", "a", "4..1", "1..x"])
    def test_bad_int_sets(self, text):
        with pytest.raises(UsageError):
            parse_int_set(text)

    @pytest.mark.parametrize("text", ["0.5", "two"])
    def test_bad_p_sets(self, text):
        with pytest.raises(UsageError):
            parse_p_set(text)

    def test_tol_flags(self):
        rest, tol = split_tolerance_flags(["verify", "--tol.l1", "1e-3", "--tol.bounds=2e-8", "--d", "2"])
        assert rest == ["verify", "--d", "2"] and tol == {"l1": 1e-3, "bounds": 2e-8}

    def test_tol_flag_missing_value(self, capsys):
        code, _, _ = run(capsys, "verify", "--tol.l1")
        assert code == 2

    def test_unknown_tolerance(self, capsys):
        code, _, err = run(capsys, "verify", "--claims", "a_d", "--tol.nonsense", "1")
        assert code == 2 and "nonsense" in err

    def test_tol_only_for_verify(self, capsys):
        assert run(capsys, "m-eval", "--d", "2", "--tol.l1", "1")[0] == 2


class TestMEval:
    def test_rows(self, capsys):
        code, out, _ = run(capsys, "m-eval", "--d", "2", "--x-min", "0", "--x-max", "10", "--n", "100")
        rows = json.loads(out)["rows"]
        assert code == 0 and len(rows) == 100 and rows[0]["m"] == 1.0
        assert all(LOWER - 1e-6 <= r["m"] <= 1 + 1e-12 for r in rows)

    def test_csv_matches_json(self, capsys):
        args = ["m-eval", "--d", "3", "--x-min", "0", "--x-max", "30", "--n", "61"]
        _, js, _ = run(capsys, *args)
        _, cs, _ = run(capsys, *args, "--format", "csv")
        jrows = json.loads(js)["rows"]
        crows = list(csv.DictReader(io.StringIO(cs)))
        assert [float(r["m"]) for r in crows] == [r["m"] for r in jrows]
        assert [float(r["err_est"]) for r in crows] == [r["err_est"] for r in jrows]
        assert [r["route"] for r in crows] == [r["route"] for r in jrows]

    @pytest.mark.parametrize("argv", [["--d", "0"], ["--d", "2", "--n", "0"], ["--d", "2", "--x-min", "5", "--x-max", "1"], ["--d", "x"]])
    def test_usage(self, capsys, argv):
        assert run(capsys, "m-eval", *argv)[0] == 2


class TestKernelEval:
    def test_positive_and_band(self, capsys):
        code, out, _ = run(capsys, "kernel-eval", "--d", "2", "--t", "1", "--x-min", "0.05", "--x-max", "3", "--n", "300")
        data = json.loads(out)
        lo, hi = data["exclusion_band"]
        assert code == 0 and lo < 1 < hi
        assert all(r["phi_t"] > 0 for r in data["rows"])
        assert not any(lo < r["r"] < hi for r in data["rows"])

    @pytest.mark.parametrize("d", [1, 2, 3, 5])
    def test_tail_law(self, capsys, d):
        _, out, _ = run(capsys, "kernel-eval", "--d", str(d), "--t", "1", "--x-min", "20", "--x-max", "100", "--n", "9")
        for row in json.loads(out)["rows"]:
            assert row["r"] ** (d + 1) * row["phi_t"] == pytest.approx(kernel_constant(d), rel=1e-2)

    def test_t_scaling(self, capsys):
        _, a, _ = run(capsys, "kernel-eval", "--d", "3", "--t", "1", "--x-min", "0.1", "--x-max", "5", "--n", "50")
        _, b, _ = run(capsys, "kernel-eval", "--d", "3", "--t", "2", "--x-min", "0.2", "--x-max", "10", "--n", "50")
        ra, rb = json.loads(a)["rows"], json.loads(b)["rows"]
        assert len(ra) == len(rb)
        for u, v in zip(ra, rb):
            assert v["phi_t"] == pytest.approx(u["phi_t"] / 8.0, rel=1e-10)

    def test_csv_header_reports_band(self, capsys):
        _, out, _ = run(capsys, "kernel-eval", "--d", "2", "--format", "csv")
        assert out.startswith("# d=2") and "exclusion_band" in out.splitlines()[0]

    def test_bad_band(self, capsys):
        assert run(capsys, "kernel-eval", "--d", "2", "--band", "0")[0] == 2


class TestVerify:
    def test_l1(self, capsys):
        code, out, err = run(capsys, "verify", "--claims", "thm1.2-l1", "--d", "1..8")
        data = json.loads(out)
        assert code == 0 and data["schema"] == "rieszkit-report/1" and data["status"] == "pass"
        rows = data["rows"]
        assert [r["params"]["d"] for r in rows] == list(range(1, 9))
        assert all(abs(c - 1) <= 1e-6 for r in rows for c in r["computed"])
        assert "thm1.2-l1: pass" in err

    def test_g_constant(self, capsys):
        code, out, _ = run(capsys, "verify", "--claims", "g-constant", "--d", "2")
        rows = json.loads(out)["rows"]
        assert code == 0 and len(rows) == 1 and rows[0]["computed"][0] == pytest.approx(0.5, abs=1e-12)

    def test_maximal(self, capsys):
        code, out, _ = run(capsys, "verify", "--claims", "thm1.5-maximal", "--d", "2", "--p", "2")
        rows = json.loads(out)["rows"]
        assert code == 0 and rows
        assert all(r["reference"][0] == pytest.approx(2.7071067812, abs=1e-10) for r in rows)

    def test_rows_traceable_and_sorted(self, capsys):
        _, out, _ = run(capsys, "verify", "--claims", "g-constant,a_d", "--d", "2,3")
        rows = json.loads(out)["rows"]
        assert [r["claim_id"] for r in rows] == sorted(r["claim_id"] for r in rows)
        assert all({"route", "tolerance", "status"} <= set(r) for r in rows)

    def test_failure_exits_1(self, capsys):
        code, out, _ = run(capsys, "verify", "--claims", "thm1.2-l1", "--d", "2", "--tol.l1", "0")
        data = json.loads(out)
        # a zero tolerance on a quadrature value cannot hold, and the rows are still emitted
        assert code == 1 and data["status"] == "fail" and data["rows"]

    def test_csv_report(self, capsys, tmp_path):
        path = tmp_path / "r.csv"
        code, _, _ = run(capsys, "verify", "--claims", "a_d", "--d", "2", "--format", "csv", "--out", str(path))
        rows = list(csv.DictReader(path.open()))
        assert code == 0 and rows and rows[0]["claim_id"] == "a_d"

    def test_unknown_claim(self, capsys):
        assert run(capsys, "verify", "--claims", "thm9")[0] == 2

    def test_scale_env(self, capsys, monkeypatch):
        monkeypatch.setenv("RIESZKIT_TOL_SCALE", "2")
        _, out, _ = run(capsys, "verify", "--claims", "thm1.2-l1", "--d", "1")
        assert json.loads(out)["tolerances"]["l1"] == pytest.approx(2e-6)
        monkeypatch.setenv("RIESZKIT_TOL_SCALE", "-1")
        assert run(capsys, "verify", "--claims", "a_d")[0] == 2


@pytest.fixture
def cosine_file(tmp_path):
    n, box = 256, 20.0
    x = (np.arange(n) - n // 2) * box / n
    path = tmp_path / "cos.bin"
    write_field(path, GridField(np.cos(2 * math.pi * x / box), box))
    return path, np.sin(2 * math.pi * x / box)


@pytest.fixture
def bump_file(tmp_path):
    path = tmp_path / "bump.bin"
    write_field(path, radial_bump(2, 256, 20.0, np.array([0.7, -0.3]), 3.0))
    return path


class TestTransform:
    def test_riesz_cosine(self, capsys, cosine_file, tmp_path):
        path, ref = cosine_file
        out = tmp_path / "o.bin"
        assert run(capsys, "transform", str(path), "--op", "riesz", "--out", str(out))[0] == 0
        assert np.max(np.abs(read_field(out).values - ref)) < 1e-8
        meta = json.loads((tmp_path / "o.bin.json").read_text())
        assert meta["schema"] == "rieszkit-report/1" and meta["route"] == "fourier"

    def test_riesz_trunc_sidecar(self, capsys, bump_file, tmp_path):
        out = tmp_path / "o.bin"
        code, _, _ = run(capsys, "transform", str(bump_file), "--op", "riesz_trunc", "--j", "2", "--t", "0.5", "--out", str(out))
        check = json.loads((tmp_path / "o.bin.json").read_text())["check"]
        assert code == 0 and check["within_budget"] and check["relative_l2_gap"] <= check["budget"]

    def test_maximal_single_t(self, capsys, bump_file, tmp_path):
        a, b = tmp_path / "a.bin", tmp_path / "b.bin"
        run(capsys, "transform", str(bump_file), "--op", "maximal", "--t", "1.5", "--out", str(a))
        run(capsys, "transform", str(bump_file), "--op", "mt", "--t", "1.5", "--out", str(b))
        assert np.allclose(read_field(a).values, np.abs(read_field(b).values), atol=1e-15)

    def test_mt_conv_reports_gap(self, capsys, bump_file, tmp_path):
        out = tmp_path / "o.bin"
        run(capsys, "transform", str(bump_file), "--op", "mt", "--t", "1", "--route", "conv", "--out", str(out))
        assert json.loads((tmp_path / "o.bin.json").read_text())["fourier_gap"] < 3e-3
        ref = mt_apply_fourier(read_field(bump_file), 1.0)
        assert np.max(np.abs(read_field(out).values - ref.values)) < 1e-3

    def test_deterministic(self, capsys, bump_file, tmp_path):
        a, b = tmp_path / "a.bin", tmp_path / "b.bin"
        for dst in (a, b):
            run(capsys, "transform", str(bump_file), "--op", "riesz_trunc", "--t", "1", "--out", str(dst))
        assert a.read_bytes() == b.read_bytes()

    def test_bad_file(self, capsys, tmp_path):
        bad = tmp_path / "bad.bin"
        bad.write_bytes(b'{"dim": 1}\n')
        assert run(capsys, "transform", str(bad), "--op", "riesz", "--out", str(tmp_path / "o"))[0] == 2
        assert run(capsys, "transform", str(tmp_path / "none"), "--op", "riesz", "--out", str(tmp_path / "o"))[0] == 2

    @pytest.mark.parametrize("op, t", [("riesz_trunc", "0.01"), ("mt", "-1"), ("riesz_trunc", None)])
    def test_bad_t(self, capsys, bump_file, tmp_path, op, t):
        argv = ["transform", str(bump_file), "--op", op, "--out", str(tmp_path / "o")]
        if t is not None:
            argv += ["--t", t]
        assert run(capsys, *argv)[0] == 2

    def test_bad_axis(self, capsys, bump_file, tmp_path):
        assert run(capsys, "transform", str(bump_file), "--op", "riesz", "--j", "3", "--out", str(tmp_path / "o"))[0] == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "rieszkit", "verify", "--claims", "a_d", "--d", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["status"] == "pass"
