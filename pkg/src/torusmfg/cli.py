"""Command line interface: ``solve``, ``check`` and ``convergence``.

Exit codes: 0 success, 1 invalid configuration, 2 solver did not converge
(best-effort outputs are still written).  Set ``TORUSMFG_LOG`` (e.g. ``DEBUG``)
to change log verbosity.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .checks import broken_div, run_all
from .config import ConfigError, RunConfig, emit_config, load_config
from .grid import GridSpec, StatePair, check_scalar, x_norm
from .hamiltonian import make_model
from .io import atomic_write, dump_json, format_field, sha256_file
from .solver import SolverError, energy_trace, solve_mfg, verify_minty

log = logging.getLogger("torusmfg")

EXIT_OK, EXIT_CONFIG, EXIT_NOT_CONVERGED = 0, 1, 2


def _setup_logging() -> None:
    level = os.environ.get("TORUSMFG_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


def _load(path: str, seed: int | None) -> RunConfig:
    cfg = load_config(path)
    if seed is not None:
        cfg.solver = dataclasses.replace(cfg.solver, seed=seed)
    return cfg


def build_report(cfg: RunConfig, z: StatePair, report, prob) -> dict:
    energy = energy_trace(report)
    g = prob.grid
    last = report.stages[-1]
    return {
        "status": report.status,
        "grid": {"dim": g.dim, "n": g.n},
        "model": cfg.model,
        "solver": dataclasses.asdict(cfg.solver),
        "summary": {
            "hj_residual": last.hj_residual,
            "fp_residual": last.fp_residual,
            "x_norm": x_norm(z, g),
            "mass": last.mass,
            "min_density": last.min_density,
            "stages": len(report.stages),
            "energy_ratio": energy.max_ratio,
            "minty_min": verify_minty(z, prob, n_samples=50, seed=cfg.solver.seed),
        },
        "stages": [dataclasses.asdict(s) for s in report.stages],
    }


def run_solve(config_path: str, out_dir: str, seed: int | None = None) -> int:
    try:
        cfg = _load(config_path, seed)
        prob = cfg.problem()
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    started = time.strftime("%Y-%m-%dT%H:%M:%S%z")
    try:
        z, report = solve_mfg(prob, cfg.solver)
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    g = prob.grid
    outputs = {
        "m.csv": format_field(z.m, g),
        "u.csv": format_field(z.u, g),
        "report.json": dump_json(build_report(cfg, z, report, prob)),
    }
    for name, text in outputs.items():
        atomic_write(out / name, text)
    manifest = {
        "tool": "torusmfg",
        "version": __version__,
        "seed": cfg.solver.seed,
        "started": started,
        "finished": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "config": emit_config(cfg),
        "files": [{"name": name, "sha256": sha256_file(out / name)} for name in outputs],
    }
    atomic_write(out / "manifest.json", dump_json(manifest))
    last = report.stages[-1]
    print(
        f"{report.status}: {len(report.stages)} stages, "
        f"hj={last.hj_residual:.3e} fp={last.fp_residual:.3e} -> {out}"
    )
    return EXIT_OK if report.success else EXIT_NOT_CONVERGED


def run_check(config_path: str, inject: str | None = None) -> int:
    try:
        cfg = load_config(config_path)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    divergence = broken_div if inject == "broken-divergence" else None
    kw = {"divergence": divergence} if divergence is not None else {}
    reports = run_all(make_model(cfg.model), cfg.dim, seed=cfg.solver.seed, **kw)
    for r in reports:
        print(r.line())
    ok = all(r.passed for r in reports)
    print("all checks passed" if ok else "some checks FAILED")
    return EXIT_OK if ok else EXIT_CONFIG


def refine(f: np.ndarray) -> np.ndarray:
    """Periodic linear interpolation from n to 2n nodes per axis."""
    for axis in range(f.ndim):
        shape = list(f.shape)
        shape[axis] *= 2
        out = np.empty(shape)
        even = [slice(None)] * f.ndim
        odd = [slice(None)] * f.ndim
        even[axis] = slice(0, None, 2)
        odd[axis] = slice(1, None, 2)
        out[tuple(even)] = f
        out[tuple(odd)] = 0.5 * (f + np.roll(f, -1, axis=axis))
        f = out
    return f


def convergence_table(cfg: RunConfig, levels: int) -> list[dict]:
    """Solve at ``n, 2n, 4n, ...`` and measure X-norm gaps between successive levels."""
    rows = []
    prev = None
    for j in range(levels):
        n = cfg.n * 2**j
        prob = cfg.problem(n)
        z, report = solve_mfg(prob, cfg.solver)
        row = {"n": n, "status": report.status, "diff": None, "ratio": None}
        if prev is not None:
            g = prob.grid
            coarse = StatePair(refine(prev.m), refine(prev.u))
            row["diff"] = x_norm(z - coarse, g)
            if rows[-1]["diff"] is not None and rows[-1]["diff"] > 0:
                row["ratio"] = row["diff"] / rows[-1]["diff"]
        rows.append(row)
        prev = z
    return rows


def run_convergence(config_path: str, levels: int) -> int:
    try:
        cfg = load_config(config_path)
        cfg.problem()
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if levels < 1:
        print("error: --levels must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    rows = convergence_table(cfg, levels)
    print(f"{'n':>6s}  {'status':<14s}  {'|z_n - I z_n/2|_X':>18s}  {'ratio':>8s}")
    for r in rows:
        diff = "-" if r["diff"] is None else f"{r['diff']:.6e}"
        ratio = "-" if r["ratio"] is None else f"{r['ratio']:.4f}"
        print(f"{r['n']:>6d}  {r['status']:<14s}  {diff:>18s}  {ratio:>8s}")
    return EXIT_OK if all(r["status"] == "converged" for r in rows) else EXIT_NOT_CONVERGED


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = argparse.ArgumentParser(prog="torusmfg", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve the MFG system and write fields and a report")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("check", help="run assumption samplers and discrete identity checks")
    p.add_argument("--config", required=True)
    p.add_argument("--inject", choices=["broken-divergence"], default=None, help=argparse.SUPPRESS)

    p = sub.add_parser("convergence", help="grid refinement study")
    p.add_argument("--config", required=True)
    p.add_argument("--levels", type=int, default=3)

    args = parser.parse_args(argv)
    if args.command == "solve":
        return run_solve(args.config, args.out, args.seed)
    if args.command == "check":
        return run_check(args.config, args.inject)
    return run_convergence(args.config, args.levels)


if __name__ == "__main__":
    sys.exit(main())
