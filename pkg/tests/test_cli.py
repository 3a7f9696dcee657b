import csv
import json
import math
from pathlib import Path

import pytest

from bellsim.cli import (
    CONFIG_KEYS,
    ConfigurationError,
    SWEEP_COLUMNS,
    check_run_config,
    main,
    parse_config_file,
    resolve_config,
    sweep_points,
    write_config_file,
)

VOLATILE_JSON_KEYS = {"timestamp", "row_runtimes_ms"}


def canonical_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    drop = header.index("runtime_ms") if "runtime_ms" in header else None
    out = []
    for row in rows:
        out.append([v for i, v in enumerate(row) if i != drop])
    return out


def canonical_json(path):
    data = json.loads(Path(path).read_text())
    for key in VOLATILE_JSON_KEYS:
        data.pop(key, None)
    return data


class TestConfig:
    def test_defaults_resolve(self):
        config = resolve_config(None, {})
        assert config["path"] == "analytic-ideal"
        assert config["eta"] == 1.0

    def test_round_trip(self, tmp_path):
        config = resolve_config(None, {"r": 2.5, "path": "analytic-tmss",
                                       "resource": "two-mode-squeezed-vacuum"})
        f = tmp_path / "run.cfg"
        write_config_file(config, f)
        reparsed = resolve_config(parse_config_file(f), {})
        assert reparsed == config
        assert check_run_config(reparsed) == check_run_config(config)

    def test_unknown_key_rejected(self, tmp_path):
        f = tmp_path / "bad.cfg"
        f.write_text("r = 1.0\nmystery_knob = 3\n")
        with pytest.raises(ConfigurationError, match="mystery_knob"):
            parse_config_file(f)

    def test_comments_and_blank_lines(self, tmp_path):
        f = tmp_path / "ok.cfg"
        f.write_text("# a comment\n\nr = 1.5  # trailing\npath = analytic-ideal\n")
        values = parse_config_file(f)
        assert values == {"r": 1.5, "path": "analytic-ideal"}

    def test_path_resource_consistency(self):
        config = resolve_config(None, {"path": "analytic-thermal"})
        problems = check_run_config(config)
        assert any("split-squeezed-thermal" in p for p in problems)

    def test_thermal_path_rejects_efficiency(self):
        config = resolve_config(None, {
            "path": "analytic-thermal", "resource": "split-squeezed-thermal", "eta": 0.9})
        assert any("eta" in p for p in check_run_config(config))

    def test_sweep_points_row_major(self):
        config = resolve_config(None, {"r_min": 0.0, "r_max": 1.0, "r_steps": 2,
                                       "v_min": 1.0, "v_max": 2.0, "v_steps": 2,
                                       "resource": "split-squeezed-thermal",
                                       "path": "analytic-thermal"})
        assert sweep_points(config) == [(0.0, 1.0), (0.0, 2.0), (1.0, 1.0), (1.0, 2.0)]


class TestSweep:
    def test_sweep_writes_csv_and_manifest(self, tmp_path):
        out = tmp_path / "sweep.csv"
        code = main(["sweep", "--path", "analytic-ideal", "--r-min", "0.5", "--r-max", "1.5",
                     "--r-steps", "3", "--out", str(out)])
        assert code == 0
        rows = list(csv.DictReader(out.open()))
        assert [r["r"] for r in rows] == ["0.5", "1.0", "1.5"]
        assert all(float(r["b_max"]) != 0 for r in rows)
        assert list(rows[0].keys()) == SWEEP_COLUMNS
        manifest = json.loads((tmp_path / "sweep.csv.manifest.json").read_text())
        assert manifest["command"] == "sweep"
        assert manifest["outputs"] == ["sweep.csv"]
        assert len(manifest["row_runtimes_ms"]) == 3

    def test_sweep_deterministic_modulo_volatile_fields(self, tmp_path):
        args = ["sweep", "--path", "analytic-ideal", "--r-min", "1.0", "--r-max", "2.0",
                "--r-steps", "3"]
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(args + ["--out", str(out1)]) == 0
        assert main(args + ["--out", str(out2)]) == 0
        assert canonical_csv(out1) == canonical_csv(out2)

    def test_invalid_config_nonzero_exit(self, tmp_path):
        code = main(["sweep", "--path", "analytic-ideal", "--eta", "1.5",
                     "--out", str(tmp_path / "x.csv")])
        assert code == 2

    def test_tmss_sweep_runs(self, tmp_path):
        out = tmp_path / "tmss.csv"
        code = main(["sweep", "--path", "analytic-tmss", "--resource", "two-mode-squeezed-vacuum",
                     "--r-min", "1.3", "--r-max", "1.5", "--r-steps", "2", "--out", str(out)])
        assert code == 0
        rows = list(csv.DictReader(out.open()))
        assert abs(float(rows[0]["b_max"])) > 2.0  # the tmss threshold sits below r = 1.3

    def test_threaded_sweep_matches_serial(self, tmp_path):
        base = ["sweep", "--path", "analytic-ideal", "--r-min", "0.5", "--r-max", "2.5",
                "--r-steps", "5"]
        serial, threaded = tmp_path / "s.csv", tmp_path / "t.csv"
        assert main(base + ["--out", str(serial)]) == 0
        assert main(base + ["--threads", "4", "--out", str(threaded)]) == 0
        assert canonical_csv(serial) == canonical_csv(threaded)


class TestOptimize:
    def test_single_point_json(self, tmp_path):
        out = tmp_path / "opt.json"
        code = main(["optimize", "--path", "analytic-ideal", "--r", "4.0", "--out", str(out)])
        assert code == 0
        payload = json.loads(out.read_text())
        assert abs(payload["b_max"]) == pytest.approx(2.18539, abs=2e-3)
        assert payload["converged"] is True


class TestPdfDump:
    def test_dump_normalized(self, tmp_path):
        out = tmp_path / "pdf.csv"
        code = main(["pdf", "--path", "physical-corrected", "--r", "1.0",
                     "--theta-a", "0.1", "--theta-b", "-0.05",
                     "--grid", "101", "--out", str(out)])
        assert code == 0
        rows = list(csv.DictReader(out.open()))
        xs = sorted({float(r["x"]) for r in rows})
        h = xs[1] - xs[0]
        total = sum(float(r["density"]) for r in rows) * h * h
        assert total == pytest.approx(1.0, abs=1e-2)  # plain Riemann sum of the dump
        manifest = json.loads((tmp_path / "pdf.csv.manifest.json").read_text())
        assert "normalization_constant" in manifest and "clipped_mass" in manifest

    def test_analytic_path_has_no_pdf(self, tmp_path):
        code = main(["pdf", "--path", "analytic-ideal", "--r", "1.0",
                     "--out", str(tmp_path / "x.csv")])
        assert code == 2


class TestValidate:
    def test_fock_identities_pass(self, tmp_path):
        out = tmp_path / "fock.json"
        code = main(["validate", "--suite", "fock-identities", "--out", str(out)])
        report = json.loads(out.read_text())
        assert code == 0
        assert report["passed"] is True
        names = {c["name"] for c in report["checks"]}
        assert "Kerr cat fidelity" in names

    def test_unknown_suite_rejected(self, tmp_path):
        with pytest.raises(SystemExit):  # argparse rejects the choice
            main(["validate", "--suite", "nope", "--out", str(tmp_path / "r2.json")])

    def test_validate_deterministic(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert main(["validate", "--suite", "efficiency", "--grid", "301", "--out", str(a)]) == 0
        assert main(["validate", "--suite", "efficiency", "--grid", "301", "--out", str(b)]) == 0
        assert canonical_json(a) == canonical_json(b)
