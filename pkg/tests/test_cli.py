"""End-to-end checks of the command-line front end.

Every test drives cli.main with an argv list and inspects captured
stdout or the files it wrote; exit codes follow the documented
contract (0 ok, 1 verify failures, 2 config errors, 3 internal
inconsistencies, 4 io errors).
"""

import json
import xml.dom.minidom

import numpy as np
import pytest

from nlsadm.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


class TestClassify:
    def test_family_d_example(self, capsys):
        r = run_json(
            capsys, "classify", "--alpha", "1", "--omega", "1",
            "--c", "1.41421356237,0", "--resolution", "128,128",
        )
        assert r["schema"] == 1
        assert r["classification"]["verdict"] == "FamilyD"
        assert r["config"]["triple"]["alpha"] == 1.0
        assert len(r["config_hash"]) == 64

    def test_fourth_order_zero_reason(self, capsys):
        r = run_json(
            capsys, "classify", "--alpha", "1", "--omega", "0",
            "--c", "0.5,0", "--resolution", "128,128",
        )
        assert r["classification"]["verdict"] == "Inadmissible"
        recs = [x for x in r["classification"]["reasons"] if x["rule"] == "fourth-order-zero condition"]
        assert len(recs) == 1 and recs[0]["passed"] is False

    def test_malformed_complex_exits_2(self, capsys):
        code, _, err = run(capsys, "classify", "--alpha", "1", "--omega", "0", "--c", "1")
        assert code == 2
        assert "re,im" in err

    def test_exit_zero_for_any_verdict(self, capsys):
        code, out, _ = run(
            capsys, "classify", "--alpha", "1.3", "--omega", "2.7",
            "--c", "0.4,-1.1", "--resolution", "128,128",
        )
        assert code == 0
        assert json.loads(out)["classification"]["verdict"] == "Inadmissible"

    def test_report_sections_present(self, capsys):
        r = run_json(
            capsys, "classify", "--alpha", "2", "--omega", "-12",
            "--c", "0,4", "--resolution", "128,128",
        )
        assert r["classification"]["verdict"] == "FamilyA"
        assert r["roots"]["pattern"] == [3, 1]
        # Re c = 0 collapses the vertical cut, leaving the quartic cuts:
        # a segment joining the odd parts and a zero-length marker for
        # the even part at the triple root
        kinds = [c["kind"] for c in r["cuts"]["cuts"]]
        assert kinds == ["segment", "degenerate"]
        assert "degenerate" in r["intersections"]["vertical_cut_vs_D1"]["skipped"]
        assert r["intersections"]["K2_window"]["in_window"] is False
        assert r["connectivity"]["d1_component_count"] >= 1
        assert {c["id"] for c in r["checks"]} >= {
            "exclusion-rules-consistent", "root-reconstruction",
            "branch-square", "shift-identity", "normalizer-det",
        }
        for c in r["checks"]:
            assert c["passed"] is True

    def test_focusing_lambda(self, capsys):
        r = run_json(
            capsys, "classify", "--alpha", "1", "--omega", "2",
            "--c", "1,0", "--lambda", "-1", "--resolution", "128,128",
        )
        assert r["classification"]["verdict"] == "FocusingA"
        assert r["config"]["lambda"] == -1

    def test_missing_triple_exits_2(self, capsys):
        code, _, err = run(capsys, "classify")
        assert code == 2 and "alpha" in err

    def test_verdict_in_intersections(self, capsys):
        # the vertical cut misses closure(D1) for family B members
        r = run_json(
            capsys, "classify", "--alpha", "4", "--omega", "-8",
            "--c", "12.12435565298214,1", "--resolution", "128,128",
        )
        assert r["classification"]["verdict"] == "FamilyB"
        assert r["intersections"]["vertical_cut_vs_D1"]["intersects"] is False


class TestRootsCurvesRegions:
    def test_roots_anchor(self, capsys):
        r = run_json(capsys, "roots", "--alpha", "2", "--omega", "-12", "--c", "0,4")
        assert r["pattern"] == [3, 1]
        locs = sorted((x["position"]["re"], x["multiplicity"]) for x in r["roots"])
        assert locs[0] == pytest.approx((-3.0, 1)) and locs[1] == pytest.approx((1.0, 3))

    def test_curves_csv(self, capsys):
        code, out, _ = run(
            capsys, "curves", "--alpha", "1", "--omega", "-3", "--c", "0.5,-1",
            "--window=-2,2,-2,2", "--resolution", "128,128",
        )
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "k1,k2,tag"
        assert any(line.endswith("gamma-0") for line in lines[1:])

    def test_curves_json(self, capsys):
        r = run_json(
            capsys, "curves", "--alpha", "1", "--omega", "4", "--c", "2.2360679774997896,0",
            "--window=-3,3,-3,3", "--resolution", "128,128", "--format", "json",
        )
        assert r["real_intersections"] == [0.0]
        assert r["residual"] < 0.05

    def test_regions_loop_disconnects(self, capsys):
        base = ["--alpha", "1", "--omega", "4", "--c", "2.2360679774997896,0",
                "--window=-3,3,-3,3", "--resolution", "200,200"]
        straight = run_json(capsys, "regions", *base)
        assert straight["d1_minus_cuts_connected"] is True
        looped = run_json(capsys, "regions", *base, "--loop", "1,0.4")
        assert looped["d1_component_count"] == 2
        assert looped["cell_counts"]["D1"] > 0

    def test_low_resolution_rejected(self, capsys):
        code, _, err = run(
            capsys, "regions", "--alpha", "1", "--omega", "0", "--c", "1,1",
            "--resolution", "32,32",
        )
        assert code == 2 and "64" in err


class TestFigure:
    def test_family_a_markers(self, tmp_path, capsys):
        base = str(tmp_path / "famA")
        code, _, _ = run(
            capsys, "figure", "--alpha", "2", "--omega", "-12", "--c", "0,4",
            "--resolution", "128,128", "--out", base,
        )
        assert code == 0
        svg = (tmp_path / "famA.svg").read_text()
        xml.dom.minidom.parseString(svg)
        assert svg.count('class="root"') == 2
        mults = sorted(
            seg.split(">", 1)[1].split("<", 1)[0]
            for seg in svg.split('class="mult"')[1:]
        )
        assert mults == ["1", "3"]
        assert (tmp_path / "famA.csv").read_text().startswith("k1,k2,tag")
        header = json.loads((tmp_path / "famA.grid.json").read_text())
        assert header["resolution"] == [128, 128]
        assert len((tmp_path / "famA.grid").read_bytes()) == 128 * 128

    def test_family_d_omega_zero_markers(self, tmp_path, capsys):
        base = str(tmp_path / "famD0")
        code, _, _ = run(
            capsys, "figure", "--alpha", "1", "--omega", "0", "--c", "1,0",
            "--resolution", "128,128", "--out", base,
        )
        assert code == 0
        svg = (tmp_path / "famD0.svg").read_text()
        # three marked branch points: the quadruple zero at 0 and the
        # two c-points at +-i/2
        assert svg.count('class="root"') == 1
        assert svg.count('class="cpoint"') == 2

    def test_empty_window(self, tmp_path, capsys):
        base = str(tmp_path / "empty")
        code, _, _ = run(
            capsys, "figure", "--alpha", "1", "--omega", "0", "--c", "1,0",
            "--window", "10,12,0.1,0.2", "--resolution", "128,128", "--out", base,
        )
        assert code == 0
        svg = (tmp_path / "empty.svg").read_text()
        xml.dom.minidom.parseString(svg)
        assert svg.count("<polyline") == 0 and svg.count("<line") == 0
        assert "nan" not in svg and "NaN" not in svg

    def test_io_error_exits_4(self, capsys):
        code, _, err = run(
            capsys, "figure", "--alpha", "1", "--omega", "0", "--c", "1,0",
            "--resolution", "128,128", "--out", "/proc/nonexistent/fig",
        )
        assert code == 4 and "io error" in err


class TestVerify:
    def test_quick_pass(self, capsys):
        code, out, _ = run(capsys, "verify", "--samples", "10")
        assert code == 0
        assert "[FAIL]" not in out
        assert "all 21 invariants passed" in out

    def test_fault_injection_fails_shift_identity(self, capsys):
        code, out, _ = run(capsys, "verify", "--samples", "10", "--fault", "flip-constant")
        assert code == 1
        assert "FAILED" in out and "shift-identity" in out
        line = next(l for l in out.splitlines() if " shift-identity " in l)
        assert line.startswith("[FAIL]")

    def test_only_filter(self, capsys):
        code, out, _ = run(capsys, "verify", "--samples", "10", "--only", "normalizer-det")
        assert code == 0
        assert out.count("[PASS]") == 1 and "normalizer-det" in out

    def test_unknown_invariant_exits_2(self, capsys):
        code, _, err = run(capsys, "verify", "--samples", "10", "--only", "bogus")
        assert code == 2 and "bogus" in err

    def test_json_report(self, tmp_path, capsys):
        path = str(tmp_path / "verify.json")
        code, _, _ = run(capsys, "verify", "--samples", "10", "--out", path)
        assert code == 0
        data = json.loads((tmp_path / "verify.json").read_text())
        assert data["passed"] is True
        assert len(data["results"]) == 21


class TestScan:
    def test_family_e_sweep(self, capsys):
        code, out, _ = run(
            capsys, "scan", "--family", "E",
            "--range", "K=1", "--range", "omega=-3.9:-3.2:3", "--range", "c2=-0.04:-0.01:2",
        )
        assert code == 0
        rows = [line.split(",") for line in out.strip().splitlines()]
        header, body = rows[0], rows[1:]
        vcol = header.index("verdict")
        verdicts = {r[vcol] for r in body}
        assert verdicts == {"FamilyE"}
        assert len(body) == 6

    def test_family_b_edge_flag(self, capsys):
        # c2 = -(4K^2+omega)/2 = 2 exactly at K=1, omega=-8
        code, out, _ = run(
            capsys, "scan", "--family", "B",
            "--range", "K=1", "--range", "omega=-8", "--range", "c2=1:2:2",
        )
        assert code == 0
        rows = [line.split(",") for line in out.strip().splitlines()]
        header, body = rows[0], rows[1:]
        vcol, fcol = header.index("verdict"), header.index("boundary_flags")
        assert [r[vcol] for r in body] == ["FamilyB", "FamilyB"]
        assert body[0][fcol] == ""
        assert "c2-max" in body[1][fcol]

    def test_family_d_sweep_c_real(self, capsys):
        code, out, _ = run(
            capsys, "scan", "--family", "D",
            "--range", "alpha=1", "--range", "omega=-1:4:6",
        )
        assert code == 0
        rows = [line.split(",") for line in out.strip().splitlines()]
        header, body = rows[0], rows[1:]
        ccol, vcol = header.index("triple_c_im"), header.index("verdict")
        generated = [r for r in body if r[vcol] != "OutOfWindow"]
        assert generated
        assert all(float(r[ccol]) == 0.0 for r in generated)

    def test_out_of_window_recorded(self, capsys):
        code, out, _ = run(
            capsys, "scan", "--family", "A",
            "--range", "alpha=0.5", "--range", "omega=-2:-0.5:3",
        )
        assert code == 0
        rows = [line.split(",") for line in out.strip().splitlines()]
        header, body = rows[0], rows[1:]
        vcol = header.index("verdict")
        verdicts = [r[vcol] for r in body]
        assert "OutOfWindow" in verdicts and "FamilyA" in verdicts

    def test_missing_ranges_exit_2(self, capsys):
        code, _, err = run(capsys, "scan", "--family", "B", "--range", "K=1")
        assert code == 2 and "omega" in err and "c2" in err


class TestJump:
    def test_antipodal_pairing_route(self, capsys):
        r = run_json(
            capsys, "jump", "--alpha", "1", "--omega", "0", "--c", "0,0",
            "--resolution", "200,200", "--samples", "8",
            "--cut-strategy", "explicit", "--pairing", "0-3,1-2",
        )
        assert len(r["probes"]) == 2
        for p in r["probes"]:
            assert p["valid_cut"] and p["jump_nonzero"]
            assert p["worst_closed_form_error"] <= 1e-9
            assert len(p["samples"]) == 8
        v = r["verdict"]
        assert v["d1_minus_cuts_connected"] is True
        assert v["jump_obstruction"] is True
        assert v["consistent_with_classify"] is True
        assert v["classify_verdict"] == "Inadmissible"

    def test_degenerate_cuts_probe_silently(self, capsys):
        r = run_json(
            capsys, "jump", "--alpha", "1", "--omega", "1",
            "--c", "1.4142135623730951,0", "--resolution", "128,128",
        )
        assert all(p["valid_cut"] is False for p in r["probes"])
        assert r["verdict"]["jump_obstruction"] is None
        assert r["verdict"]["consistent_with_classify"] is True


class TestPlumbing:
    def test_determinism_classify(self, tmp_path, capsys):
        args = ["classify", "--alpha", "1", "--omega", "4", "--c", "2.2360679774997896,0",
                "--resolution", "128,128"]
        a, b = str(tmp_path / "a.json"), str(tmp_path / "b.json")
        assert main(args + ["--out", a]) == 0
        assert main(args + ["--out", b]) == 0
        capsys.readouterr()
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_determinism_figure(self, tmp_path, capsys):
        args = ["figure", "--alpha", "2", "--omega", "-12", "--c", "0,4",
                "--resolution", "128,128"]
        assert main(args + ["--out", str(tmp_path / "f1")]) == 0
        assert main(args + ["--out", str(tmp_path / "f2")]) == 0
        capsys.readouterr()
        for ext in (".svg", ".csv", ".grid", ".grid.json"):
            assert (tmp_path / ("f1" + ext)).read_bytes() == (tmp_path / ("f2" + ext)).read_bytes()

    def test_config_file_and_override(self, tmp_path, capsys):
        ini = tmp_path / "run.ini"
        ini.write_text(
            "[triple]\nalpha = 1\nomega = 1\nc = 1.4142135623730951,0\n"
            "[grid]\nresolution = 128,128\n"
        )
        r = run_json(capsys, "classify", "--config", str(ini))
        assert r["classification"]["verdict"] == "FamilyD"
        r = run_json(capsys, "classify", "--config", str(ini), "--omega", "0", "--c", "1,0")
        assert r["config"]["triple"]["omega"] == 0.0
        assert r["classification"]["verdict"] == "FamilyD"

    def test_bad_config_key_exits_2(self, tmp_path, capsys):
        ini = tmp_path / "bad.ini"
        ini.write_text("[triple]\nalfa = 1\n")
        code, _, err = run(capsys, "classify", "--config", str(ini))
        assert code == 2 and "alfa" in err

    def test_threads_env(self, capsys, monkeypatch):
        monkeypatch.setenv("NLSADM_THREADS", "2")
        r = run_json(capsys, "roots", "--alpha", "1", "--omega", "0", "--c", "1,0")
        assert r["config"]["threads"] == 2
        monkeypatch.setenv("NLSADM_THREADS", "zero")
        code, _, err = run(capsys, "roots", "--alpha", "1", "--omega", "0", "--c", "1,0")
        assert code == 2 and "NLSADM_THREADS" in err

    def test_help_and_version_exit_0(self, capsys):
        assert main(["--help"]) == 0
        assert main(["--version"]) == 0
        capsys.readouterr()

    def test_unknown_command_exits_2(self, capsys):
        assert main(["frobnicate"]) == 2
        capsys.readouterr()

    def test_bad_window_exits_2(self, capsys):
        code, _, err = run(
            capsys, "curves", "--alpha", "1", "--omega", "0", "--c", "1,0",
            "--window", "2,1,0,1",
        )
        assert code == 2 and "degenerate" in err

    def test_csv_format_rejected_for_classify(self, capsys):
        code, _, err = run(
            capsys, "classify", "--alpha", "1", "--omega", "1",
            "--c", "1.4142135623730951,0", "--format", "csv",
        )
        assert code == 2 and "format" in err
