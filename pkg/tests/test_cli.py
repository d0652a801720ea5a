import json
import subprocess
import sys

import pytest

from cr_rigid.cli import EXIT_USAGE, main


def write(tmp_path, name, spec):
    p = tmp_path / name
    p.write_text(json.dumps(spec))
    return str(p)


@pytest.fixture
def specs(tmp_path):
    return {
        "heisenberg": write(tmp_path, "h.json", {"kind": "heisenberg"}),
        "sin_quadric": write(tmp_path, "sq.json", {"kind": "sin_quadric"}),
        "quartic": write(tmp_path, "q.json", {"kind": "polynomial", "coeffs": [[1, 1, 1, 0], [2, 2, 1, 0]],
                                              "domain": {"radius": 0.6}}),
        "degenerate": write(tmp_path, "d.json", {"kind": "polynomial", "coeffs": [[2, 2, 1, 0]]}),
        "bad": write(tmp_path, "bad.json", {"kind": "heisenberg", "colour": "red"}),
        "es": write(tmp_path, "es.json", {"kind": "es", "es": {"rho": -0.25}}),
    }


class TestCheck:
    @pytest.mark.parametrize("name, code", [("heisenberg", 0), ("sin_quadric", 0), ("quartic", 1),
                                            ("degenerate", 2), ("bad", 64)])
    def test_exit_codes(self, specs, tmp_path, name, code):
        assert main(["check", "--spec", specs[name], "--out", str(tmp_path / "o.json")]) == code

    def test_report_content(self, specs, tmp_path):
        out = tmp_path / "r.json"
        main(["check", "--spec", specs["quartic"], "--out", str(out)])
        rep = json.loads(out.read_text())
        assert rep["verdict"] == "non-spherical" and len(rep["points"]) == 81

    def test_deterministic(self, specs, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for p in (a, b):
            main(["check", "--spec", specs["sin_quadric"], "--random-grid", "--seed", "3", "--out", str(p)])
        assert a.read_bytes() == b.read_bytes()
        c = tmp_path / "c.json"
        main(["check", "--spec", specs["sin_quadric"], "--random-grid", "--seed", "4", "--out", str(c)])
        assert c.read_bytes() != a.read_bytes()

    def test_csv(self, specs, capsys):
        assert main(["check", "--spec", specs["heisenberg"], "--format", "csv"]) == 0
        assert capsys.readouterr().out.startswith("re_z,im_z,levi,r1_rel,r2_rel")

    @pytest.mark.parametrize("extra", [["--order", "5"], ["--order", "11"], ["--grid", "4"],
                                       ["--spherical-tol", "1", "--nonspherical-tol", "0.1"],
                                       ["--radius", "-1"], ["--format", "xml"]])
    def test_validation(self, specs, extra):
        assert main(["check", "--spec", specs["heisenberg"], *extra]) == EXIT_USAGE

    def test_missing_spec_file(self, tmp_path):
        assert main(["check", "--spec", str(tmp_path / "none.json")]) == EXIT_USAGE


class TestExtract:
    def test_sin_quadric(self, specs, capsys):
        assert main(["extract", "--spec", specs["sin_quadric"]]) == 0
        out = json.loads(capsys.readouterr().out)
        for row in out["points"]:
            assert row["A"][0] == pytest.approx(row["z"][0], abs=1e-10)
            assert row["A"][1] == pytest.approx(row["z"][1], abs=1e-10)
        assert out["fit"]["holomorphic"]

    def test_heisenberg_zero(self, specs, capsys):
        assert main(["extract", "--spec", specs["heisenberg"]]) == 0
        out = json.loads(capsys.readouterr().out)
        assert all(v == [0.0, 0.0] for row in out["points"] for v in (row["A"], row["D"]))

    def test_quartic_flagged(self, specs, capsys):
        assert main(["extract", "--spec", specs["quartic"], "--radius", "0.3"]) == 1
        assert not json.loads(capsys.readouterr().out)["fit"]["holomorphic"]


class TestES:
    def test_sin_quadric_case(self, capsys):
        assert main(["es", "--rho", "-0.25"]) == 0
        rec = json.loads(capsys.readouterr().out)["records"][0]
        assert rec["regime"] == "r_real" and rec["verification"]["verdict"] == "spherical"

    def test_heisenberg_note(self, capsys):
        assert main(["es"]) == 0
        rec = json.loads(capsys.readouterr().out)["records"][0]
        assert "heisenberg" in rec["note"]

    def test_three_roots(self, capsys):
        assert main(["es", "--rho", "1", "--no-verify"]) == 0
        recs = json.loads(capsys.readouterr().out)["records"]
        assert [r["phi"] for r in recs] == pytest.approx([-0.5, 0.0, 0.5])
        assert "verification" not in recs[0]

    def test_root_index(self, specs, capsys):
        assert main(["es", "--spec", specs["es"], "--root-index", "0"]) == 0
        assert len(json.loads(capsys.readouterr().out)["records"]) == 1
        assert main(["es", "--rho", "1", "--root-index", "7", "--no-verify"]) == EXIT_USAGE

    def test_wrong_kind(self, specs):
        assert main(["es", "--spec", specs["heisenberg"]]) == EXIT_USAGE


class TestElliptic:
    def test_heisenberg_exact(self, specs, capsys, tmp_path):
        log = tmp_path / "log.jsonl"
        fields = tmp_path / "f.csv"
        assert main(["elliptic", "--spec", specs["heisenberg"], "--grid", "9", "--log", str(log),
                     "--fields", str(fields)]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["observed_orders"] == "exact"
        assert json.loads(log.read_text().splitlines()[0])["iteration"] == 0
        assert fields.read_text().startswith("x,y,r,s")

    def test_too_coarse(self, specs):
        assert main(["elliptic", "--spec", specs["heisenberg"], "--grid", "4"]) == EXIT_USAGE

    def test_quartic_not_applicable(self, specs):
        assert main(["elliptic", "--spec", specs["quartic"], "--grid", "9", "--radius", "0.1"]) == 3


def test_entry_point_module():
    out = subprocess.run([sys.executable, "-m", "cr_rigid.cli", "check", "--spec", "/nonexistent"],
                         capture_output=True, text=True)
    assert out.returncode == EXIT_USAGE
    assert "invalid input" in out.stderr


def test_unknown_subcommand():
    assert main(["frobnicate"]) == EXIT_USAGE
    assert main(["--help"]) == 0
