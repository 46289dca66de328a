"""Command-line front end.

Usage::

    python -m frobpade <command> --config run.yaml [--precision BITS] [--out DIR]
                                 [--workers N] [--suite NAME]

Commands: ``approximate``, ``curve``, ``domains``, ``trajectory``, ``zeros``
and ``verify``.  Each run writes a directory ``<out>/<command>-<hash>``
holding the resolved configuration, a manifest and the result files; the
hash covers the command and every result-determining field, so identical
inputs give identical directories byte for byte.

Exit codes: 0 success, 1 configuration error or an I/O failure while
writing results, 2 numerical failure or a failed verification.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import shutil
import sys
import tempfile
import warnings
from pathlib import Path

import numpy as np
from mpmath import mp
from scipy.integrate import IntegrationWarning

from . import __version__
from .approximant import FrobeniusIndex, PoleTarget, solve_frobenius, zeros_of_Q
from .config import SCHEMA_VERSION, SUITES, RunConfig
from .equilibrium import classify_point, equilibrium
from .errors import ConfigError, DomainError, FrobPadeError, NumericalError
from .harness import (RaySpec, convergence_rate_experiment, region_dichotomy, solve_ray,
                      szego_stabilization_experiment, zero_distribution_experiment)
from .spectral_curve import solve_curve, trace_divergence_boundary

COMMANDS = ("approximate", "curve", "domains", "trajectory", "zeros", "verify")
CSV_DIGITS = 20
ZERO_TOL = 0.06
ZERO_MAX_OUTSIDE = 1

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    """Argument parser that exits with the configuration-error code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, metavar="PATH", help="YAML run configuration")
    common.add_argument("--precision", type=int, metavar="BITS", help="override precision_bits")
    common.add_argument("--out", metavar="DIR", help="override output_dir")
    common.add_argument("--workers", type=int, metavar="N", help="worker processes for ray solves")
    common.add_argument("--suite", choices=SUITES, help="verification suite (verify only)")
    parser = _Parser(prog="frobpade", description="Frobenius-Pade approximants of Markov functions")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {"approximate": "solve one Frobenius-Pade system",
             "curve": "solve the spectral curve",
             "domains": "raster of the domain classifier",
             "trajectory": "trace the divergence-domain boundary",
             "zeros": "zeros of the denominator",
             "verify": "run harness experiments along a ray"}
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


# ---------------------------------------------------------------- formatting

def fmt_number(v) -> str:
    """Decimal text with ``CSV_DIGITS`` significant digits."""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, mp.mpf):
        return mp.nstr(v, CSV_DIGITS, strip_zeros=False, min_fixed=1, max_fixed=0)
    if isinstance(v, mp.mpc):
        v = complex(v)
    if isinstance(v, complex):
        return f"{v.real:.{CSV_DIGITS - 1}e}{v.imag:+.{CSV_DIGITS - 1}e}j"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return f"{v:.{CSV_DIGITS - 1}e}" if math.isfinite(v) else str(v).lower()
    return str(v)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt_number(v) for v in r])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, (complex, mp.mpc)):
        return fmt_number(complex(obj))
    if isinstance(obj, mp.mpf):
        return fmt_number(obj)
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def json_text(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


# ---------------------------------------------------------------- run directory

def write_run(out_dir: Path, command: str, cfg: RunConfig, files: dict) -> Path:
    """Write ``files`` plus config and manifest atomically into the run directory."""
    out_dir.mkdir(parents=True, exist_ok=True)
    final = out_dir / f"{command}-{cfg.digest(command)}"
    files = dict(files)
    files["config.yaml"] = cfg.dumps()
    manifest = {"schema_version": SCHEMA_VERSION, "command": command, "package_version": __version__,
                "precision_bits": cfg.precision_bits, "config_hash": cfg.digest(command),
                "files": {name: hashlib.sha256(text.encode()).hexdigest()
                          for name, text in sorted(files.items())}}
    files["manifest.json"] = json_text(manifest)
    tmp = Path(tempfile.mkdtemp(prefix=f".{final.name}.", dir=out_dir))
    try:
        for name, text in files.items():
            (tmp / name).write_text(text)
        if final.exists():
            shutil.rmtree(final)
        os.rename(tmp, final)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    return final


# ---------------------------------------------------------------- commands

def _target(cfg: RunConfig):
    return PoleTarget(cfg.target.pole) if cfg.target.kind == "pole" else cfg.sigma


def _need(value, name):
    if value is None:
        raise ConfigError(f"{name}: required by this command")
    return value


def _intervals(cfg):
    return (cfg.mu.a, cfg.mu.b), (cfg.sigma.a, cfg.sigma.b)


def cmd_approximate(cfg: RunConfig) -> dict:
    m, n = _need(cfg.index, "index")
    appr = solve_frobenius(cfg.mu, _target(cfg), FrobeniusIndex(m, n), cfg.precision_bits)
    return {"approximant.json": json_text(appr.to_json())}


def cmd_curve(cfg: RunConfig) -> dict:
    dm, ds = _intervals(cfg)
    curve = solve_curve(dm, ds, _need(cfg.c, "c"), cfg.precision_bits)
    return {"curve.json": json_text(curve.to_json())}


def cmd_domains(cfg: RunConfig) -> dict:
    dm, ds = _intervals(cfg)
    eq = equilibrium(dm, ds, _need(cfg.c, "c"), cfg.precision_bits)
    (rlo, rhi, rn), (ilo, ihi, inn) = cfg.grid.re, cfg.grid.im
    rows = []
    with warnings.catch_warnings():
        # potentials at raster points on a support hit the log singularity
        warnings.simplefilter("ignore", IntegrationWarning)
        for y in np.linspace(float(ilo), float(ihi), inn):
            for x in np.linspace(float(rlo), float(rhi), rn):
                cl = classify_point(eq, complex(x, y))
                rows.append((x, y, cl.value, cl.region.value))
    return {"domains.csv": csv_text(("re", "im", "classifier", "region"), rows)}


def cmd_trajectory(cfg: RunConfig) -> dict:
    dm, ds = _intervals(cfg)
    curve = solve_curve(dm, ds, _need(cfg.c, "c"), cfg.precision_bits)
    pair = trace_divergence_boundary(curve, float(cfg.trajectory.step), cfg.trajectory.max_points)
    rows = []
    for name, tr in (("upper", pair.upper), ("lower", pair.lower)):
        for k, (z, s, r) in enumerate(zip(tr.points, tr.arclength, tr.residual)):
            rows.append((name, k, z.real, z.imag, s, r))
    summary = {"b_sigma_c": curve.b_sigma_c, "case": curve.case.value, "step": pair.step,
               "upper": {"points": len(pair.upper.points), "reason": pair.upper.reason},
               "lower": {"points": len(pair.lower.points), "reason": pair.lower.reason}}
    return {"trajectory.csv": csv_text(("branch", "k", "re", "im", "arclength", "residual"), rows),
            "trajectory.json": json_text(summary)}


def cmd_zeros(cfg: RunConfig) -> dict:
    m, n = _need(cfg.index, "index")
    appr = solve_frobenius(cfg.mu, _target(cfg), FrobeniusIndex(m, n), cfg.precision_bits)
    qz = zeros_of_Q(appr, cfg.mu)
    zs = sorted((complex(z) for z in qz.zeros), key=lambda z: (z.real, z.imag))
    rows = [(k, z.real, z.imag) for k, z in enumerate(zs)]
    return {"zeros.csv": csv_text(("k", "re", "im"), rows)}


def _table_csv(rows: list) -> str:
    if not rows:
        return ""
    header = list(rows[0])
    return csv_text(header, [[r[h] for h in header] for r in rows])


def cmd_verify(cfg: RunConfig, suite: str) -> tuple:
    ray_cfg = _need(cfg.ray, "ray")
    c = _need(cfg.c, "c")
    ray = RaySpec.from_ns(c, ray_cfg.ns, ray_cfg.test_points, ray_cfg.expected)
    target = _target(cfg)
    dm, ds = _intervals(cfg)
    eq = None if isinstance(target, PoleTarget) else equilibrium(dm, ds, c, cfg.precision_bits)
    apprs = solve_ray(ray, cfg.mu, target, cfg.precision_bits, cfg.workers)
    files, verdicts = {}, {}
    suites = ("rate", "zeros", "szego") if suite == "all" else (suite,)
    if "rate" in suites:
        if not ray.test_points:
            raise ConfigError("ray.test_points: the rate suite needs at least one point")
        tab = convergence_rate_experiment(ray, cfg.mu, target, cfg.precision_bits, eq=eq,
                                          approximants=apprs)
        s = tab.summary()
        if eq is not None:
            s["dual_labeled"] = [str(p) for p in region_dichotomy(tab, eq)]
            s["pass"] = s["pass"] and not s["dual_labeled"]
        verdicts["rate"] = s
        files["rate.csv"] = _table_csv(tab.rows())
    if "zeros" in suites:
        tab = zero_distribution_experiment(ray, cfg.mu, target, cfg.precision_bits, eq=eq,
                                           approximants=apprs)
        verdicts["zeros"] = tab.summary(ZERO_TOL, ZERO_MAX_OUTSIDE)
        files["zeros.csv"] = _table_csv(tab.rows())
    if "szego" in suites:
        if not ray.test_points:
            raise ConfigError("ray.test_points: the szego suite needs at least one point")
        tab = szego_stabilization_experiment(ray, cfg.mu, target, ray.test_points,
                                             cfg.precision_bits, eq=eq, approximants=apprs)
        verdicts["szego"] = tab.summary()
        files["szego.csv"] = _table_csv(tab.rows())
    ok = all(v["pass"] for v in verdicts.values())
    summary = {"suite": suite, "pass": ok, "experiments": verdicts}
    files["summary.json"] = json_text(summary)
    return files, summary


# ---------------------------------------------------------------- entry point

def _error_json(exc: FrobPadeError) -> str:
    obj = {"error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, NumericalError):
        obj["residual"] = exc.residual
    return json_text(obj)


def run(argv=None) -> int:
    """Parse ``argv``, execute the command and return the exit code."""
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = RunConfig.load(args.config)
        changes = {}
        if args.precision is not None:
            changes["precision_bits"] = args.precision
        if args.out is not None:
            changes["output_dir"] = args.out
        if args.workers is not None:
            changes["workers"] = args.workers
        if args.suite is not None:
            changes["suite"] = args.suite
        if changes:
            cfg = cfg.replace(**changes)
        summary = None
        with mp.workprec(cfg.precision_bits):
            if args.command == "verify":
                files, summary = cmd_verify(cfg, cfg.suite)
            else:
                files = globals()[f"cmd_{args.command}"](cfg)
        path = write_run(Path(cfg.output_dir), args.command, cfg, files)
    except (ConfigError, DomainError) as exc:
        sys.stderr.write(_error_json(exc))
        return EXIT_CONFIG
    except NumericalError as exc:
        sys.stderr.write(_error_json(exc))
        return EXIT_NUMERICAL
    except OSError as exc:
        # unwritable output location: a configuration problem from the caller's side
        sys.stderr.write(json_text({"error": type(exc).__name__, "message": str(exc)}))
        return EXIT_CONFIG
    print(path)
    if summary is not None:
        print(json_text({"pass": summary["pass"], "suite": summary["suite"]}), end="")
        return EXIT_OK if summary["pass"] else EXIT_NUMERICAL
    return EXIT_OK


def main():
    sys.exit(run())
