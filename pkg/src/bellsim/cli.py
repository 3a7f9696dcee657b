"""Batch front door: parameter sweeps, validation suites, and density dumps.

Artifacts are plot-ready CSV/JSON files; every artifact is written together
with a manifest JSON carrying the fully resolved configuration, tool
version, timestamp, and per-row runtimes, so any output can be reproduced
from its manifest alone. Apart from timestamps and runtimes, reruns with
identical configuration produce byte-identical payloads.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .model import (
    FeasibilityError,
    ResourceKind,
    ResourceSpec,
    RotationKind,
    RotationSpec,
    validate_config,
)
from . import analytic
from . import oracle_coherent
from . import oracle_fock
from . import physical
from .optimize import (
    ANALYTIC_BRACKET,
    NoFeasiblePointError,
    SearchConfig,
    maximize_chsh,
    physical_bracket,
)
from .physical import PdfVariant
from .quadrature import (
    GridPdf,
    QuadratureError,
    grid_pdf_from_function,
    sign_correlation,
    smooth_inefficiency,
)

SCHEMA_VERSION = "1"

SWEEP_COLUMNS = [
    "resource", "path", "r", "v", "eta", "d", "b_max",
    "theta_a", "theta_b", "theta_a2", "theta_b2",
    "converged", "evals", "runtime_ms", "error",
]

PATHS = (
    "analytic-ideal", "analytic-thermal", "analytic-tmss",
    "physical-asprinted", "physical-corrected", "physical-exact",
    "oracle-coherent", "oracle-fock",
)

PDF_PATHS = ("oracle-coherent", "physical-asprinted", "physical-corrected",
             "physical-exact", "oracle-fock")

SUITES = ("eq6", "eq8", "thermal", "fock-identities", "efficiency")

_PATH_RESOURCE = {
    "analytic-ideal": ResourceKind.SPLIT_SQUEEZED_VACUUM,
    "analytic-thermal": ResourceKind.SPLIT_SQUEEZED_THERMAL,
    "analytic-tmss": ResourceKind.TWO_MODE_SQUEEZED_VACUUM,
    "physical-asprinted": ResourceKind.SPLIT_SQUEEZED_VACUUM,
    "physical-corrected": ResourceKind.SPLIT_SQUEEZED_VACUUM,
    "physical-exact": ResourceKind.SPLIT_SQUEEZED_VACUUM,
    "oracle-coherent": ResourceKind.SPLIT_SQUEEZED_VACUUM,
    "oracle-fock": ResourceKind.SPLIT_SQUEEZED_VACUUM,
}

# Flat config keys: name -> (python type, default). The config file uses
# one "key = value" per line; unknown keys are rejected, not ignored.
CONFIG_KEYS: dict[str, tuple[type, Any]] = {
    "resource": (str, ResourceKind.SPLIT_SQUEEZED_VACUUM.value),
    "path": (str, "analytic-ideal"),
    "r": (float, 1.0),
    "r_min": (float, 0.0),
    "r_max": (float, 6.0),
    "r_steps": (int, 121),
    "v": (float, 1.0),
    "v_min": (float, 1.0),
    "v_max": (float, 1.0),
    "v_steps": (int, 1),
    "center": (float, 0.0),
    "eta": (float, 1.0),
    "d": (float, 1.0),
    "variant": (str, "asprinted"),
    "grid": (int, 801),
    "tol": (float, 1e-6),
    "threads": (int, 1),
    "theta_a": (float, 0.0),
    "theta_b": (float, 0.0),
    "suite": (str, "eq6"),
    "cutoff": (int, 0),            # 0 means automatic
    "coarse_points": (int, 13),
    "seeds": (int, 5),
}


class ConfigurationError(ValueError):
    pass


def parse_config_file(path: str | Path) -> dict[str, Any]:
    """Parse a flat "key = value" config file; '#' starts a comment."""
    values: dict[str, Any] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in CONFIG_KEYS:
            raise ConfigurationError(f"{path}:{lineno}: unknown config key {key!r}")
        typ, _ = CONFIG_KEYS[key]
        try:
            values[key] = typ(value)
        except ValueError as exc:
            raise ConfigurationError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return values


def write_config_file(config: dict[str, Any], path: str | Path) -> None:
    lines = [f"{key} = {config[key]}" for key in CONFIG_KEYS if key in config]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def resolve_config(file_values: dict[str, Any] | None, overrides: dict[str, Any]) -> dict[str, Any]:
    """defaults <- config file <- explicit command-line overrides."""
    config = {key: default for key, (_, default) in CONFIG_KEYS.items()}
    if file_values:
        config.update(file_values)
    config.update({k: v for k, v in overrides.items() if v is not None})
    for key in config:
        if key not in CONFIG_KEYS:
            raise ConfigurationError(f"unknown config key {key!r}")
    return config


def _resource_spec(config: dict[str, Any]) -> ResourceSpec:
    kind = ResourceKind(config["resource"])
    if kind is ResourceKind.SPLIT_SQUEEZED_THERMAL:
        return ResourceSpec(kind=kind, r=config["r"], v=config["v"], center=config["center"])
    return ResourceSpec(kind=kind, r=config["r"])


def _rotation_spec(config: dict[str, Any]) -> RotationSpec:
    if config["path"].startswith("physical") or config["path"] == "oracle-fock":
        return RotationSpec(kind=RotationKind.PHYSICAL, d=config["d"])
    return RotationSpec(kind=RotationKind.IDEAL)


def check_run_config(config: dict[str, Any]) -> list[str]:
    """Full validation of a resolved run config; returns human messages."""
    problems: list[str] = []
    if config["path"] not in PATHS:
        problems.append(f"unknown path {config['path']!r}")
        return problems
    expected = _PATH_RESOURCE[config["path"]]
    if config["resource"] != expected.value:
        problems.append(
            f"path {config['path']!r} requires resource {expected.value!r}, got {config['resource']!r}")
    if config["path"] == "analytic-thermal" and config["eta"] != 1.0:
        problems.append("the thermal closed form carries no detection-efficiency substitution; use eta = 1")
    if config["variant"] not in ("asprinted", "corrected"):
        problems.append(f"unknown variant {config['variant']!r}")
    for err in validate_config(_resource_spec(config), _rotation_spec(config), config["eta"]):
        problems.append(f"{err.code}: {err.message}")
    return problems


def make_evaluator(config: dict[str, Any], r: float, v: float) -> tuple[Callable[[float, float], float], SearchConfig]:
    """Correlation evaluator plus matching search configuration for one sweep point."""
    path = config["path"]
    eta = config["eta"]
    d = config["d"]
    grid = config["grid"]
    base = dict(coarse_points=config["coarse_points"], seeds=config["seeds"], tol_b=config["tol"])

    if path == "analytic-ideal":
        corr = lambda a, b: analytic.corr_ideal(a, b, r, eta)
        return corr, SearchConfig(bracket=ANALYTIC_BRACKET, periodic=True, **base)
    if path == "analytic-thermal":
        corr = lambda a, b: analytic.corr_thermal(a, b, r, v)
        return corr, SearchConfig(bracket=ANALYTIC_BRACKET, periodic=True, **base)
    if path == "analytic-tmss":
        corr = lambda a, b: analytic.corr_tmss(a, b, r, eta)
        return corr, SearchConfig(bracket=ANALYTIC_BRACKET, periodic=True, **base)
    if path in ("physical-asprinted", "physical-corrected"):
        variant = PdfVariant.AS_PRINTED if path.endswith("asprinted") else PdfVariant.ENVELOPE_CORRECTED
        corr = physical.make_corr_evaluator(r, d, eta, variant, grid)
        bracket = physical_bracket(r, d, physical.envelope_sigma(r, variant))
        return corr, SearchConfig(bracket=bracket, periodic=False, **base)
    if path == "physical-exact":
        corr = physical.make_exact_evaluator(r, d, eta, grid)
        bracket = physical_bracket(r, d, physical.envelope_sigma(r, PdfVariant.ENVELOPE_CORRECTED))
        return corr, SearchConfig(bracket=bracket, periodic=False, **base)
    if path == "oracle-coherent":
        corr = lambda a, b: oracle_coherent.corr_ideal_oracle(a, b, r, eta, grid)
        return corr, SearchConfig(bracket=ANALYTIC_BRACKET, periodic=True, **base)
    if path == "oracle-fock":
        cutoff = config["cutoff"] or None
        corr = lambda a, b: oracle_fock.corr_physical_oracle(a, b, r, d, eta, cutoff, grid)
        bracket = physical_bracket(r, d, physical.envelope_sigma(r, PdfVariant.ENVELOPE_CORRECTED))
        return corr, SearchConfig(bracket=bracket, periodic=False, **base)
    raise ConfigurationError(f"unknown path {path!r}")


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat()


def _write_manifest(out_path: Path, command: str, config: dict[str, Any],
                    row_runtimes_ms: list[float], extra: dict[str, Any] | None = None) -> Path:
    manifest = {
        "tool": "bellsim",
        "version": __version__,
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": config,
        "timestamp": _timestamp(),
        "outputs": [out_path.name],
        "row_runtimes_ms": row_runtimes_ms,
    }
    if extra:
        manifest.update(extra)
    manifest_path = out_path.with_name(out_path.name + ".manifest.json")
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return manifest_path


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def sweep_points(config: dict[str, Any]) -> list[tuple[float, float]]:
    rs = np.linspace(config["r_min"], config["r_max"], config["r_steps"])
    if config["v_steps"] > 1:
        vs = np.linspace(config["v_min"], config["v_max"], config["v_steps"])
    else:
        vs = np.array([config["v"]])
    return [(float(r), float(v)) for r in rs for v in vs]


def _sweep_row(config: dict[str, Any], r: float, v: float) -> tuple[dict[str, Any], float]:
    start = time.perf_counter()
    row: dict[str, Any] = {
        "resource": config["resource"], "path": config["path"],
        "r": r, "v": v, "eta": config["eta"], "d": config["d"],
        "b_max": "", "theta_a": "", "theta_b": "", "theta_a2": "", "theta_b2": "",
        "converged": "", "evals": "", "error": "",
    }
    try:
        corr, search = make_evaluator(config, r, v)
        result = maximize_chsh(corr, search)
        row.update({
            "b_max": result.b_max,
            "theta_a": result.angles.theta_a, "theta_b": result.angles.theta_b,
            "theta_a2": result.angles.theta_a2, "theta_b2": result.angles.theta_b2,
            "converged": result.converged, "evals": result.evaluations,
        })
    except (NoFeasiblePointError, FeasibilityError, oracle_fock.CutoffError,
            QuadratureError, ValueError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    runtime_ms = (time.perf_counter() - start) * 1000.0
    return row, runtime_ms


def run_sweep(config: dict[str, Any], out: str | Path) -> int:
    """CHSH maximization over a sweep of (r, V) points; one CSV row each."""
    problems = check_run_config(config)
    if problems:
        for message in problems:
            print(f"error: {message}", file=sys.stderr)
        return 2
    points = sweep_points(config)
    out_path = Path(out)
    out_path.parent.mkdir(parents=True, exist_ok=True)

    if config["threads"] > 1:
        with ThreadPoolExecutor(max_workers=config["threads"]) as pool:
            results = list(pool.map(lambda p: _sweep_row(config, *p), points))
    else:
        results = [_sweep_row(config, r, v) for r, v in points]

    runtimes = [rt for _, rt in results]
    with out_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_COLUMNS)
        for (row, runtime_ms) in results:
            row["runtime_ms"] = round(runtime_ms, 3)
            writer.writerow([_fmt(row[col]) for col in SWEEP_COLUMNS])
    _write_manifest(out_path, "sweep", config, runtimes)
    failed = sum(1 for row, _ in results if row["error"])
    print(f"sweep: {len(points)} points -> {out_path} ({failed} failed rows)")
    return 0


def run_optimize(config: dict[str, Any], out: str | Path) -> int:
    """Single-point CHSH maximization; JSON result."""
    problems = check_run_config(config)
    if problems:
        for message in problems:
            print(f"error: {message}", file=sys.stderr)
        return 2
    out_path = Path(out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    try:
        corr, search = make_evaluator(config, config["r"], config["v"])
        result = maximize_chsh(corr, search)
        payload: dict[str, Any] = {
            "b_max": result.b_max,
            "angles": {
                "theta_a": result.angles.theta_a, "theta_b": result.angles.theta_b,
                "theta_a2": result.angles.theta_a2, "theta_b2": result.angles.theta_b2,
            },
            "correlations": result.correlations,
            "evaluations": result.evaluations,
            "converged": result.converged,
        }
        code = 0
    except (NoFeasiblePointError, FeasibilityError, oracle_fock.CutoffError,
            QuadratureError, ValueError) as exc:
        payload = {"error": f"{type(exc).__name__}: {exc}"}
        code = 1
    runtime_ms = (time.perf_counter() - start) * 1000.0
    out_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _write_manifest(out_path, "optimize", config, [runtime_ms])
    print(f"optimize: -> {out_path}")
    return code


def _pdf_grid(config: dict[str, Any]) -> GridPdf:
    path = config["path"]
    r, d = config["r"], config["d"]
    ta, tb = config["theta_a"], config["theta_b"]
    grid = config["grid"]
    if path == "oracle-coherent":
        pdf = oracle_coherent.joint_pdf_ideal_grid(ta, tb, r, grid)
    elif path in ("physical-asprinted", "physical-corrected"):
        variant = PdfVariant.AS_PRINTED if path.endswith("asprinted") else PdfVariant.ENVELOPE_CORRECTED
        pdf = physical.joint_pdf_grid(ta, tb, r, d, variant, grid)
    elif path == "physical-exact":
        pdf = physical.joint_pdf_exact_grid(ta, tb, r, d, grid)
    elif path == "oracle-fock":
        pdf = oracle_fock.prepared_pdf_grid(ta, tb, r, d, config["cutoff"] or None, grid)
    else:
        raise ConfigurationError(f"path {path!r} has no joint density to dump")
    if config["eta"] < 1.0:
        pdf = smooth_inefficiency(pdf, config["eta"])
    return pdf


def run_pdf_dump(config: dict[str, Any], out: str | Path) -> int:
    """Dump one normalized joint density as (x, y, density) rows."""
    if config["path"] not in PDF_PATHS:
        print(f"error: path {config['path']!r} has no joint density to dump", file=sys.stderr)
        return 2
    problems = check_run_config(config)
    if problems:
        for message in problems:
            print(f"error: {message}", file=sys.stderr)
        return 2
    out_path = Path(out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    pdf = _pdf_grid(config)
    runtime_ms = (time.perf_counter() - start) * 1000.0
    with out_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "density"])
        for i, x in enumerate(pdf.x):
            for j, y in enumerate(pdf.y):
                writer.writerow([repr(float(x)), repr(float(y)), repr(float(pdf.density[i, j]))])
    _write_manifest(out_path, "pdf", config, [runtime_ms], extra={
        "normalization_constant": pdf.total_mass,
        "clipped_mass": pdf.clipped_mass,
    })
    print(f"pdf: {pdf.x.size}x{pdf.y.size} grid -> {out_path}")
    return 0


# ---------------------------------------------------------------------------
# Validation suites
# ---------------------------------------------------------------------------

def _check(name: str, inputs: dict[str, Any], value: float, reference: float,
           tolerance: float | None, mandatory: bool, note: str = "") -> dict[str, Any]:
    abs_dev = abs(value - reference)
    rel_dev = abs_dev / abs(reference) if reference != 0 else math.inf
    passed = True if tolerance is None else bool(abs_dev <= tolerance)
    return {
        "name": name, "inputs": inputs, "value": value, "reference": reference,
        "abs_deviation": abs_dev, "rel_deviation": rel_dev,
        "tolerance": tolerance, "mandatory": mandatory, "passed": passed, "note": note,
    }


def suite_eq6(config: dict[str, Any]) -> dict[str, Any]:
    """Closed-form ideal-rotation correlation against the coherent-basis oracle.

    The zero-angle column is mandatory (forced by the Gaussian orthant
    identity). General angles adjudicate the two candidate denominator
    readings: the (sin4a + sin4b)/cosh r form in :func:`analytic.corr_ideal`
    versus the superseded (sin4a + sin4b) sinh r reading.
    """
    grid = min(config["grid"], 501)
    checks = []
    dev_adopted: list[float] = []
    dev_printed: list[float] = []
    for r in (0.5, 1.0, 2.0, 3.0):
        for ta in (-0.2, -0.1, 0.0, 0.1, 0.2):
            for tb in (-0.2, -0.1, 0.0, 0.1, 0.2):
                inputs = {"theta_a": ta, "theta_b": tb, "r": r}
                oracle = oracle_coherent.corr_ideal_oracle(ta, tb, r, grid_points=grid)
                closed = analytic.corr_ideal(ta, tb, r)
                mandatory = ta == 0.0 and tb == 0.0
                checks.append(_check(
                    "adopted closed form vs oracle", inputs, closed, oracle,
                    tolerance=1e-3 if mandatory else None,
                    mandatory=mandatory,
                    note="" if mandatory else "report-only"))
                dev_adopted.append(abs(closed - oracle))
                try:
                    printed = analytic.corr_ideal_printed(ta, tb, r)
                    checks.append(_check(
                        "superseded sinh-denominator form vs oracle", inputs, printed, oracle,
                        tolerance=None, mandatory=False, note="report-only"))
                    dev_printed.append(abs(printed - oracle))
                except FeasibilityError:
                    pass
    adjudication = {
        "max_abs_deviation_adopted": max(dev_adopted),
        "max_abs_deviation_superseded": max(dev_printed),
        "adopted_form": "third denominator term (sin4a + sin4b)/cosh r",
    }
    return {"suite": "eq6", "checks": checks, "adjudication": adjudication}


def suite_eq8(config: dict[str, Any]) -> dict[str, Any]:
    """Adjudicate the closed-form physical-path density against the
    truncated-basis simulation at small squeezing.

    The simulated density is nonnegative and normalized by construction
    (mandatory checks); the L1 distance to each closed-form variant is
    recorded and the closer variant named.
    """
    r, d, ta, tb = 1.0, 1.0, 0.1, -0.05
    cutoff = config["cutoff"] or 60
    grid = min(config["grid"], 501)
    extent = 8.0 * math.sqrt((math.exp(2.0 * r) + 1.0) / 4.0 + 0.5)
    oracle_pdf = oracle_fock.prepared_pdf_grid(ta, tb, r, d, cutoff, grid, extent)
    checks = [
        _check("oracle density nonnegative", {"r": r, "theta_a": ta, "theta_b": tb},
               float(np.min(oracle_pdf.density)), 0.0, tolerance=1e-15, mandatory=True,
               note="min over the grid; |amplitude|^2 cannot be negative"),
        _check("oracle density normalized", {"r": r, "cutoff": cutoff},
               oracle_pdf.total_mass, 1.0, tolerance=1e-6, mandatory=True),
    ]
    wx = oracle_pdf.dx * oracle_pdf.dy
    surfaces = {
        PdfVariant.AS_PRINTED.value: physical.joint_pdf_grid(ta, tb, r, d, PdfVariant.AS_PRINTED, grid, extent),
        PdfVariant.ENVELOPE_CORRECTED.value: physical.joint_pdf_grid(ta, tb, r, d, PdfVariant.ENVELOPE_CORRECTED, grid, extent),
        "exact": physical.joint_pdf_exact_grid(ta, tb, r, d, grid, extent),
    }
    l1 = {}
    for name, closed in surfaces.items():
        dist = float(np.sum(np.abs(closed.density - oracle_pdf.density)) * wx)
        l1[name] = dist
        checks.append(_check(
            f"L1 distance to {name}", {"r": r, "theta_a": ta, "theta_b": tb, "d": d},
            dist, 0.0, tolerance=None, mandatory=False, note="report-only"))
    winner = min((PdfVariant.AS_PRINTED.value, PdfVariant.ENVELOPE_CORRECTED.value), key=lambda k: l1[k])
    return {"suite": "eq8", "checks": checks, "l1_distances": l1,
            "closer_variant": winner,
            "note": "the exact-amplitude surface matches the simulated density to "
                    "grid precision; both two-term closed-form variants are "
                    "structurally different from it at this squeezing"}


def _first_crossing(rs: np.ndarray, bs: np.ndarray, level: float = 2.0) -> float | None:
    for i in range(1, rs.size):
        if bs[i - 1] < level <= bs[i]:
            frac = (level - bs[i - 1]) / (bs[i] - bs[i - 1])
            return float(rs[i - 1] + frac * (rs[i] - rs[i - 1]))
    return None


def suite_thermal(config: dict[str, Any]) -> dict[str, Any]:
    """Thermal-resource consistency report.

    Records (a) the discrepancy between the printed thermal correlation at
    V = 1 and the pure-resource closed form at general angles, (b) the
    brute-force mixture oracle against the printed form inside its domain
    V e^(-2r) > 1, and (c) the mandatory qualitative claim that increasing
    squeezing restores the violation at fixed V > 1.
    """
    checks = []
    for r in (0.5, 1.0, 2.0):
        for (ta, tb) in ((0.1, 0.05), (0.15, -0.1), (0.2, 0.2)):
            inputs = {"theta_a": ta, "theta_b": tb, "r": r, "v": 1.0}
            try:
                c_th = analytic.corr_thermal(ta, tb, r, 1.0)
            except FeasibilityError:
                continue
            checks.append(_check(
                "thermal form at V=1 vs adopted pure form", inputs, c_th,
                analytic.corr_ideal(ta, tb, r),
                tolerance=None, mandatory=False,
                note="report-only: exact agreement supports the adopted denominator"))
            try:
                checks.append(_check(
                    "thermal form at V=1 vs superseded sinh-denominator form", inputs, c_th,
                    analytic.corr_ideal_printed(ta, tb, r),
                    tolerance=None, mandatory=False,
                    note="report-only: the superseded reading disagrees at general angles"))
            except FeasibilityError:
                pass

    for (r, v) in ((0.1, 1.5), (0.1, 2.5), (0.3, 2.5)):
        for (ta, tb) in ((0.0, 0.0), (0.1, -0.1)):
            inputs = {"theta_a": ta, "theta_b": tb, "r": r, "v": v}
            oracle = oracle_coherent.corr_thermal_oracle(ta, tb, r, v, grid_points=min(config["grid"], 401))
            try:
                printed = analytic.corr_thermal(ta, tb, r, v)
            except FeasibilityError:
                continue
            checks.append(_check(
                "mixture oracle vs printed thermal form", inputs, oracle, printed,
                tolerance=None, mandatory=False, note="report-only"))

    rs = np.linspace(0.0, 4.0, 41)
    crossings: dict[str, float | None] = {}
    for v in (1.0, 1.5, 2.0):
        bs = []
        for r in rs:
            try:
                result = maximize_chsh(
                    lambda a, b: analytic.corr_thermal(a, b, float(r), v),
                    SearchConfig(tol_b=config["tol"]))
                bs.append(abs(result.b_max))
            except NoFeasiblePointError:
                bs.append(math.nan)
        crossings[str(v)] = _first_crossing(rs, np.array(bs))
    ordered = [crossings[k] for k in ("1.0", "1.5", "2.0")]
    restored = all(c is not None for c in ordered) and all(
        ordered[i] <= ordered[i + 1] for i in range(len(ordered) - 1))
    checks.append({
        "name": "higher squeezing restores the violation at fixed V",
        "inputs": {"v_values": [1.0, 1.5, 2.0], "r_grid": [0.0, 4.0, 41]},
        "value": crossings, "reference": "crossing exists for each V and grows with V",
        "abs_deviation": None, "rel_deviation": None, "tolerance": None,
        "mandatory": True, "passed": bool(restored), "note": "",
    })
    return {"suite": "thermal", "checks": checks, "crossings": crossings}


def suite_fock_identities(config: dict[str, Any]) -> dict[str, Any]:
    """Operator identities of the truncated-basis simulator."""
    del config
    checks = []

    # One Kerr pass turns a coherent state into a balanced two-component cat.
    beta, cutoff = 2.0, 40
    coh = oracle_fock.coherent_state(beta, cutoff)
    kerr = oracle_fock.apply_kerr(coh, "a", oracle_fock.KERR_PHASE)
    cat = oracle_fock.FockVector(
        (np.exp(-1j * math.pi / 4.0) * coh.amps
         + np.exp(1j * math.pi / 4.0) * oracle_fock.coherent_state(-beta, cutoff).amps)
        / math.sqrt(2.0))
    checks.append(_check(
        "Kerr cat fidelity", {"beta": beta, "cutoff": cutoff},
        oracle_fock.fidelity(kerr, cat), 1.0, tolerance=1e-8, mandatory=True))

    # Two single photons interfere to (|2,0> - |0,2>)/sqrt(2).
    st = oracle_fock.two_mode(oracle_fock.fock_state(1, 4), oracle_fock.fock_state(1, 4))
    hom = oracle_fock.apply_beam_splitter(st, math.pi / 2.0)
    target = np.zeros((5, 5), dtype=complex)
    target[2, 0] = 1.0 / math.sqrt(2.0)
    target[0, 2] = -1.0 / math.sqrt(2.0)
    checks.append(_check(
        "two-photon interference amplitudes", {"mixing": "pi/2"},
        float(np.max(np.abs(hom.amps - target))), 0.0, tolerance=1e-8, mandatory=True))

    # Splitting a squeezed mode equals local squeezers on a two-mode
    # squeezed vacuum (all with the x-squeezing generator sign). The cutoff
    # must satisfy the 1e-8 norm invariant; at cutoff 40 the input resource
    # itself is short 2e-6 of norm and the fidelity shortfall is exactly
    # that deficit, so that configuration is tabulated report-only.
    r = 1.0

    def identity_fidelity(cutoff: int, tol: float) -> float:
        lhs = oracle_fock.apply_beam_splitter(
            oracle_fock.two_mode(
                oracle_fock.squeezed_vacuum_fock(-r, cutoff, truncation_tol=tol),
                oracle_fock.vacuum(cutoff)),
            math.pi / 2.0)
        tm = oracle_fock.two_mode_squeezed_fock(r / 2.0, cutoff)
        local = oracle_fock.squeeze_matrix(-r / 2.0, cutoff)
        rhs = oracle_fock.apply_single_mode(oracle_fock.apply_single_mode(tm, "a", local), "b", local)
        return oracle_fock.fidelity(lhs, rhs)

    valid_cutoff = oracle_fock.required_cutoff(r)
    checks.append(_check(
        "split squeezed mode equals locally squeezed two-mode squeezed vacuum",
        {"r": r, "cutoff": valid_cutoff},
        identity_fidelity(valid_cutoff, oracle_fock.TRUNCATION_TOL), 1.0,
        tolerance=1e-6, mandatory=True))
    checks.append(_check(
        "same identity at the norm-invariant-violating cutoff 40",
        {"r": r, "cutoff": 40},
        identity_fidelity(40, 1e-5), 1.0, tolerance=None, mandatory=False,
        note="report-only: shortfall equals the resource's truncation deficit"))

    # Beam-splitter composition.
    probe = oracle_fock.apply_beam_splitter(
        oracle_fock.two_mode(oracle_fock.fock_state(2, 20), oracle_fock.fock_state(1, 20)), 0.3)
    probe = oracle_fock.apply_beam_splitter(probe, 0.5)
    direct = oracle_fock.apply_beam_splitter(
        oracle_fock.two_mode(oracle_fock.fock_state(2, 20), oracle_fock.fock_state(1, 20)), 0.8)
    checks.append(_check(
        "beam-splitter composition", {"mixings": [0.3, 0.5], "cutoff": 20},
        float(np.max(np.abs(probe.amps - direct.amps))), 0.0, tolerance=1e-8, mandatory=True))

    # Displacement round trip.
    state = oracle_fock.two_mode(oracle_fock.coherent_state(0.5, 40), oracle_fock.vacuum(40))
    fwd = oracle_fock.apply_displacement(state, "a", 1.0 + 0.5j)
    back = oracle_fock.apply_displacement(fwd, "a", -1.0 - 0.5j)
    checks.append(_check(
        "displacement round trip", {"amp": "1+0.5j", "cutoff": 40},
        float(np.max(np.abs(back.amps - state.amps))), 0.0, tolerance=1e-8, mandatory=True))

    # Squeezed vacuum mean photon number (cutoff per the norm invariant).
    sv_cutoff = oracle_fock.required_cutoff(1.0)
    sv = oracle_fock.squeezed_vacuum_fock(1.0, sv_cutoff)
    n_mean = float(np.sum(np.arange(sv_cutoff + 1) * np.abs(sv.amps) ** 2))
    checks.append(_check(
        "squeezed vacuum mean photon number", {"r": 1.0, "cutoff": sv_cutoff},
        n_mean, math.sinh(1.0) ** 2, tolerance=1e-6 * math.sinh(1.0) ** 2, mandatory=True))

    return {"suite": "fock-identities", "checks": checks}


def suite_efficiency(config: dict[str, Any]) -> dict[str, Any]:
    """Detection-efficiency model cross-checks."""
    checks = []
    worst_r, worst = 0.0, 0.0
    for r in np.linspace(0.1, 6.0, 60):
        dev = abs(analytic.efficiency_factor(float(r), 1.0) - math.atan(math.sinh(float(r))))
        if dev > worst:
            worst_r, worst = float(r), dev
    checks.append(_check(
        "eta = 1 reduces to the lossless arctan factor", {"r_grid": [0.1, 6.0, 60], "worst_r": worst_r},
        worst, 0.0, tolerance=1e-12, mandatory=True))

    r, eta = 1.0, 0.5
    pdf = oracle_coherent.joint_pdf_ideal_grid(0.0, 0.0, r, min(config["grid"], 601))
    smoothed = smooth_inefficiency(pdf, eta)
    checks.append(_check(
        "smoothed oracle density reproduces the efficiency substitution",
        {"theta_a": 0.0, "theta_b": 0.0, "r": r, "eta": eta},
        sign_correlation(smoothed), analytic.corr_ideal(0.0, 0.0, r, eta),
        tolerance=1e-3, mandatory=True))

    sigma2 = 1.3
    gauss = grid_pdf_from_function(
        lambda x, y: np.exp(-(x * x + y * y) / (2.0 * sigma2)), x_extent=10.0, n=601)
    sm = smooth_inefficiency(gauss, 0.6)
    wx = sm.dx
    var = float(np.sum((sm.x ** 2)[:, None] * sm.density) * wx * sm.dy)
    checks.append(_check(
        "smoothing maps Gaussian variance to eta sigma^2 + (1-eta)/2",
        {"sigma2": sigma2, "eta": 0.6},
        var, 0.6 * sigma2 + 0.4 * 0.5, tolerance=1e-6, mandatory=True))

    values = [analytic.corr_ideal(0.0, 0.0, 1.0, e) for e in (0.3, 0.5, 0.8, 1.0)]
    checks.append({
        "name": "zero-angle correlation increases with eta",
        "inputs": {"etas": [0.3, 0.5, 0.8, 1.0], "r": 1.0},
        "value": values, "reference": "strictly increasing",
        "abs_deviation": None, "rel_deviation": None, "tolerance": None,
        "mandatory": False,
        "passed": bool(all(values[i] < values[i + 1] for i in range(3))),
        "note": "report-only",
    })
    return {"suite": "efficiency", "checks": checks}


_SUITE_RUNNERS = {
    "eq6": suite_eq6,
    "eq8": suite_eq8,
    "thermal": suite_thermal,
    "fock-identities": suite_fock_identities,
    "efficiency": suite_efficiency,
}


def run_validate(config: dict[str, Any], out: str | Path) -> int:
    """Run one validation suite and write its JSON report.

    Exit code 0 iff every mandatory check passes; report-only rows never
    fail the run.
    """
    suite = config["suite"]
    if suite not in _SUITE_RUNNERS:
        print(f"error: unknown suite {suite!r} (choose from {', '.join(SUITES)})", file=sys.stderr)
        return 2
    out_path = Path(out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    report = _SUITE_RUNNERS[suite](config)
    runtime_ms = (time.perf_counter() - start) * 1000.0
    mandatory_failed = [c["name"] for c in report["checks"] if c["mandatory"] and not c["passed"]]
    report["passed"] = not mandatory_failed
    out_path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _write_manifest(out_path, "validate", config, [runtime_ms])
    status = "PASS" if report["passed"] else f"FAIL ({', '.join(mandatory_failed)})"
    print(f"validate {suite}: {status} -> {out_path}")
    return 0 if report["passed"] else 1


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--out", required=True, help="output artifact path")
    parser.add_argument("--resource", choices=[k.value for k in ResourceKind])
    parser.add_argument("--path", choices=PATHS)
    parser.add_argument("--eta", type=float)
    parser.add_argument("--v", type=float)
    parser.add_argument("--d", type=float)
    parser.add_argument("--variant", choices=["asprinted", "corrected"])
    parser.add_argument("--grid", type=int)
    parser.add_argument("--tol", type=float)
    parser.add_argument("--threads", type=int)
    parser.add_argument("--cutoff", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bellsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="CHSH maximization over a parameter sweep")
    _add_common(p_sweep)
    p_sweep.add_argument("--r-min", dest="r_min", type=float)
    p_sweep.add_argument("--r-max", dest="r_max", type=float)
    p_sweep.add_argument("--r-steps", dest="r_steps", type=int)
    p_sweep.add_argument("--v-min", dest="v_min", type=float)
    p_sweep.add_argument("--v-max", dest="v_max", type=float)
    p_sweep.add_argument("--v-steps", dest="v_steps", type=int)

    p_opt = sub.add_parser("optimize", help="CHSH maximization at one parameter point")
    _add_common(p_opt)
    p_opt.add_argument("--r", type=float)

    p_val = sub.add_parser("validate", help="run a cross-validation suite")
    _add_common(p_val)
    p_val.add_argument("--suite", choices=SUITES)

    p_pdf = sub.add_parser("pdf", help="dump one joint density grid as CSV")
    _add_common(p_pdf)
    p_pdf.add_argument("--r", type=float)
    p_pdf.add_argument("--theta-a", dest="theta_a", type=float)
    p_pdf.add_argument("--theta-b", dest="theta_b", type=float)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {k: v for k, v in vars(args).items()
                 if k in CONFIG_KEYS and v is not None}
    try:
        file_values = parse_config_file(args.config) if args.config else None
        config = resolve_config(file_values, overrides)
    except (ConfigurationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.command == "sweep":
        return run_sweep(config, args.out)
    if args.command == "optimize":
        return run_optimize(config, args.out)
    if args.command == "validate":
        return run_validate(config, args.out)
    if args.command == "pdf":
        return run_pdf_dump(config, args.out)
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
