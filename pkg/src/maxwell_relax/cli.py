"""Command-line experiment runner: simulate, compare, sweep and check.

Configuration files are ``key = value`` lines; ``#`` starts a comment.
Exit codes: 0 success, 1 usage or configuration error, 2 state violation,
3 convergence rate outside the band, 4 structure check failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import diagnostics as dg
from .core import (NS_COMPONENTS, RELAX_COMPONENTS, Grid, NSField, PhysParams,
                   RelaxField, as_cells)
from .ns_solver import NSConfig, ce_closure, ns_run
from .relax_solver import (RECONSTRUCTIONS, SolverConfig, run, snapshot_schedule,
                           write_entropy_csv, write_snapshot_binary,
                           write_snapshot_csv)
from .structure import check_structure, random_states

log = logging.getLogger("maxwell_relax")

EXIT_OK, EXIT_USAGE, EXIT_STATE, EXIT_RATE, EXIT_STRUCTURE = 0, 1, 2, 3, 4
THREADS_ENV = "MAXWELL_RELAX_THREADS"


class ConfigError(ValueError):
    pass


def _floats(text):
    return tuple(float(s) for s in text.replace(",", " ").split())


def _ints(text):
    return tuple(int(s) for s in text.replace(",", " ").split())


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    # grid
    dim: int = 1
    cells: tuple = (512,)
    # physics
    nu: float = 1.0
    kappa: float = 1.0
    eos_A: float = 1.0
    eos_gamma: float = 2.0
    eps_list: tuple = (0.1, 0.05, 0.025, 0.0125)
    # initial data: rho0 + amp_rho sin(2 pi k s), v_i = amp_v sin(2 pi k s + phase_i)
    ic: str = "sine"
    rho0: float = 1.0
    amp_rho: float = 0.1
    amp_v: float = 0.0
    wavenumber: int = 1
    phase: tuple = (0.0, 0.0, 0.0)
    # integration
    t_end: float = 0.2
    n_snapshots: int = 20
    cfl: float = 0.45
    cfl_advective: float = 0.45
    viscous_factor: float = 1.5
    reconstruction: str = "muscl-linear"
    density_floor: float = 1e-8
    # analysis
    norm_order: int = 0
    rate_lo: float = 1.7
    rate_hi: float = 2.3
    structure_samples: int = 100
    structure_tol: float = 1e-9
    seed: int = 0
    snapshot_format: str = "binary"
    # negative-control hooks
    test_reference: str = "ns"
    test_schedule_mismatch: bool = False
    test_disable_source: bool = False
    test_corrupt_coupling: float = 0.0

    @property
    def grid(self):
        return Grid(as_cells(self.cells, self.dim))

    def params(self, eps=None):
        eps = self.eps_list[0] if eps is None else eps
        return PhysParams(nu=self.nu, kappa=self.kappa, eps1=eps, eps2=eps,
                          eos_A=self.eos_A, eos_gamma=self.eos_gamma)

    def solver_config(self):
        return SolverConfig(t_end=self.t_end, cfl=self.cfl, reconstruction=self.reconstruction,
                            n_snapshots=self.n_snapshots, density_floor=self.density_floor,
                            relaxation=not self.test_disable_source)

    def ns_config(self):
        snaps = snapshot_schedule(self.t_end, self.n_snapshots)
        if self.test_schedule_mismatch:
            snaps = snaps[:-1] if len(snaps) > 1 else (0.5 * snaps[0],)
        return NSConfig(t_end=self.t_end, cfl_advective=self.cfl_advective,
                        viscous_factor=self.viscous_factor, reconstruction=self.reconstruction,
                        snapshots=snaps, density_floor=self.density_floor)


# key -> (parser, help)
KEYS = {
    "dim": (int, "spatial dimension, 1-3"),
    "cells": (_ints, "cells per axis; one value is used for every axis"),
    "nu": (float, "shear viscosity"),
    "kappa": (float, "bulk viscosity"),
    "eos_A": (float, "pressure law p = A rho^gamma"),
    "eos_gamma": (float, "adiabatic exponent, > 1"),
    "eps_list": (_floats, "relaxation scales, strictly decreasing (eps1 = eps2)"),
    "ic": (str, "initial-condition family: sine"),
    "rho0": (float, "mean density"),
    "amp_rho": (float, "density amplitude"),
    "amp_v": (float, "velocity amplitude"),
    "wavenumber": (int, "integer wavenumber k"),
    "phase": (_floats, "velocity phases for x, y, z"),
    "t_end": (float, "final time"),
    "n_snapshots": (int, "uniform snapshots in (0, t_end]"),
    "cfl": (float, "relaxation solver CFL number"),
    "cfl_advective": (float, "Navier-Stokes advective CFL number"),
    "viscous_factor": (float, "Navier-Stokes viscous step factor, <= 2"),
    "reconstruction": (str, "first-order | muscl-minmod | muscl-linear"),
    "density_floor": (float, "runs abort when rho drops below this"),
    "norm_order": (int, "discrete norm order for errors, 0-2"),
    "rate_lo": (float, "lower end of the accepted rate band"),
    "rate_hi": (float, "upper end of the accepted rate band"),
    "structure_samples": (int, "random states for the structure check"),
    "structure_tol": (float, "tolerance of the structure check"),
    "seed": (int, "random seed for the structure check"),
    "snapshot_format": (str, "binary | csv | both (csv needs dim = 1)"),
    "test_reference": (str, "ns | relax (relax compares the solver with itself)"),
    "test_schedule_mismatch": (_bool, "drop the last reference snapshot"),
    "test_disable_source": (_bool, "drop the stress relaxation source"),
    "test_corrupt_coupling": (float, "perturb every coupling matrix by this amount"),
}


def validate(cfg: ExperimentConfig):
    """Raise ConfigError naming the first offending key."""
    def bad(key, why):
        raise ConfigError(f"{key}: {why} (got {getattr(cfg, key)!r})")

    if cfg.dim not in (1, 2, 3):
        bad("dim", "must be 1, 2 or 3")
    try:
        as_cells(cfg.cells, cfg.dim)
        Grid(as_cells(cfg.cells, cfg.dim))
    except ValueError as exc:
        bad("cells", str(exc))
    for key in ("nu", "kappa", "eos_A"):
        if not getattr(cfg, key) > 0:
            bad(key, "must be positive")
    if not cfg.eos_gamma > 1:
        bad("eos_gamma", "must exceed 1")
    eps = cfg.eps_list
    if not eps or any(not e > 0 for e in eps):
        bad("eps_list", "values must be positive")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        bad("eps_list", "must be strictly decreasing")
    if cfg.ic != "sine":
        bad("ic", "only 'sine' is available")
    if not cfg.rho0 > 0:
        bad("rho0", "must be positive")
    if cfg.wavenumber < 1:
        bad("wavenumber", "must be >= 1")
    if len(cfg.phase) != 3:
        bad("phase", "needs three values")
    if not cfg.t_end >= 0:
        bad("t_end", "must be non-negative")
    if cfg.n_snapshots < 1:
        bad("n_snapshots", "must be >= 1")
    if not 0 < cfg.cfl < 1:
        bad("cfl", "must lie in (0, 1)")
    if not 0 < cfg.cfl_advective < 1:
        bad("cfl_advective", "must lie in (0, 1)")
    if not 0 < cfg.viscous_factor <= 2:
        bad("viscous_factor", "must lie in (0, 2]")
    if cfg.reconstruction not in RECONSTRUCTIONS:
        bad("reconstruction", f"must be one of {', '.join(RECONSTRUCTIONS)}")
    if not cfg.density_floor >= 0:
        bad("density_floor", "must be non-negative")
    if cfg.norm_order not in (0, 1, 2):
        bad("norm_order", "must be 0, 1 or 2")
    if not cfg.rate_lo < cfg.rate_hi:
        bad("rate_hi", "must exceed rate_lo")
    if cfg.structure_samples < 1:
        bad("structure_samples", "must be >= 1")
    if not cfg.structure_tol >= 0:
        bad("structure_tol", "must be non-negative")
    if cfg.snapshot_format not in ("binary", "csv", "both"):
        bad("snapshot_format", "must be binary, csv or both")
    if cfg.snapshot_format != "binary" and cfg.dim != 1:
        bad("snapshot_format", "csv snapshots need dim = 1")
    if cfg.test_reference not in ("ns", "relax"):
        bad("test_reference", "must be ns or relax")
    return cfg


def parse_config(text: str) -> ExperimentConfig:
    """Parse ``key = value`` text into a validated ExperimentConfig."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = KEYS[key][0](val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
    return validate(ExperimentConfig(**values))


def initial_field(cfg: ExperimentConfig, eps=None):
    """Sine-family data with stresses on the Chapman-Enskog manifold."""
    g = cfg.grid
    s = sum(g.centers())
    arg = 2.0 * np.pi * cfg.wavenumber * s
    rho = cfg.rho0 + cfg.amp_rho * np.sin(arg)
    v = np.stack([cfg.amp_v * np.sin(arg + ph) for ph in cfg.phase])
    tau1, tau2 = ce_closure(v, g, cfg.params(eps))
    return RelaxField.from_primitive(g, rho, v, tau1, tau2)


def initial_ns_field(cfg: ExperimentConfig):
    f = initial_field(cfg)
    return NSField(f.grid, f.U[:4].copy())


# ---- output helpers ------------------------------------------------------

def _write_snapshots(out, prefix, grid, times, arrays, params, components, fmt):
    for k, (t, U) in enumerate(zip(times, arrays)):
        stem = out / f"{prefix}_{k:04d}"
        if fmt in ("binary", "both"):
            write_snapshot_binary(stem.with_suffix(".bin"), U, grid, t, params, components)
        if fmt in ("csv", "both"):
            write_snapshot_csv(stem.with_suffix(".csv"), U, grid, components)


def _fail(out, message):
    (out / "FAILED").write_text(message + "\n")
    print(f"FAILED: {message}", file=sys.stderr)
    return EXIT_STATE


def _relax_run(cfg, eps):
    return run(initial_field(cfg, eps), cfg.solver_config(), cfg.params(eps))


def _reference(cfg, eps):
    """Reference trajectory for the error measurement at ``eps``."""
    if cfg.test_reference == "relax":
        ref = _relax_run(cfg, eps)
        if cfg.test_schedule_mismatch:
            ref.times = ref.times[:-1]
            ref.states = ref.states[:-1]
        return ref
    return ns_run(initial_ns_field(cfg), cfg.ns_config(), cfg.params(eps))


# ---- commands ------------------------------------------------------------

def cmd_simulate(cfg, out):
    eps = cfg.eps_list[0]
    p = cfg.params(eps)
    traj = _relax_run(cfg, eps)
    _write_snapshots(out, "snap", traj.grid, traj.times, traj.states, p,
                     RELAX_COMPONENTS, cfg.snapshot_format)
    write_entropy_csv(out / "entropy.csv", traj)
    if traj.failed:
        return _fail(out, traj.failure)
    print(f"simulate: eps={eps:g} steps={traj.nsteps} snapshots={len(traj.times)}")
    return EXIT_OK


def cmd_compare(cfg, out):
    eps = cfg.eps_list[0]
    traj = _relax_run(cfg, eps)
    if traj.failed:
        return _fail(out, f"relaxation run: {traj.failure}")
    ref = _reference(cfg, eps)
    if ref.failed:
        return _fail(out, f"reference run: {ref.failure}")
    if cfg.test_reference == "ns":
        ce_cols = ("tau1_ce_xx", "tau1_ce_yy", "tau1_ce_xy", "tau1_ce_xz", "tau1_ce_yz", "tau2_ce")
        arrays = [ref.field_at(k).as_relax().U for k in range(len(ref.times))]
        _write_snapshots(out, "ns_snap", ref.grid, ref.times, arrays, ref.params,
                         NS_COMPONENTS + ce_cols, cfg.snapshot_format)
    try:
        series = dg.error_vs_reference(traj, ref, cfg.norm_order)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    dg.write_error_csv(out / "errors.csv", series)
    print(f"compare: eps={eps:g} sup_error={series.sup_error:.6e} rows={len(series.rows)}")
    return EXIT_OK


def cmd_sweep(cfg, out):
    if len(cfg.eps_list) < 3:
        print(f"error: sweep needs at least 3 eps values, got {len(cfg.eps_list)}",
              file=sys.stderr)
        return EXIT_USAGE
    ns_traj = None
    if cfg.test_reference == "ns":
        ns_traj = ns_run(initial_ns_field(cfg), cfg.ns_config(), cfg.params())
        if ns_traj.failed:
            return _fail(out, f"reference run: {ns_traj.failure}")
    all_series = []
    for eps in cfg.eps_list:
        traj = _relax_run(cfg, eps)
        if traj.failed:
            return _fail(out, f"relaxation run eps={eps:g}: {traj.failure}")
        ref = ns_traj.with_params(cfg.params(eps)) if ns_traj is not None else _reference(cfg, eps)
        try:
            series = dg.error_vs_reference(traj, ref, cfg.norm_order)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        all_series.append(series)
        print(f"sweep: eps={eps:g} steps={traj.nsteps} sup_error={series.sup_error:.6e}")
    dg.write_error_csv(out / "errors.csv", all_series)
    try:
        fit = dg.fit_rate([(s.epsilon, s.sup_error) for s in all_series])
    except ValueError as exc:
        verdict = f"FAIL rate fit impossible: {exc}"
        (out / "verdict.txt").write_text(verdict + "\n")
        print(verdict)
        return EXIT_RATE
    dg.write_rate_csv(out / "rate.csv", fit)
    ok = fit.in_band(cfg.rate_lo, cfg.rate_hi)
    verdict = (f"{'PASS' if ok else 'FAIL'} slope={fit.slope:.4f} "
               f"band=[{cfg.rate_lo:g}, {cfg.rate_hi:g}] K={fit.constant:.4e}")
    (out / "verdict.txt").write_text(verdict + "\n")
    print(verdict)
    return EXIT_OK if ok else EXIT_RATE


def cmd_check(cfg, out):
    rng = np.random.default_rng(cfg.seed)
    samples = random_states(cfg.structure_samples, rng)
    pert = None
    if cfg.test_corrupt_coupling:
        pert = np.full((4, 6), cfg.test_corrupt_coupling)
    report = check_structure(samples, cfg.params(), tol=cfg.structure_tol,
                             coupling_perturbation=pert)
    report.to_csv(out / "structure.csv")
    print(report.summary())
    return EXIT_OK if report.passed else EXIT_STRUCTURE


COMMANDS = {"simulate": cmd_simulate, "compare": cmd_compare,
            "sweep": cmd_sweep, "check": cmd_check}


def _help_epilog():
    default = ExperimentConfig()
    lines = ["config keys (default):"]
    for key, (_, text) in KEYS.items():
        val = getattr(default, key)
        if isinstance(val, tuple):
            val = ",".join(str(v) for v in val)
        lines.append(f"  {key:<24}{text} ({val})")
    lines.append(f"\nthread count: --threads, else ${THREADS_ENV}, else numba's default")
    lines.append("exit codes: 0 ok, 1 usage/config, 2 state violation, 3 rate failure, "
                 "4 structure failure")
    return "\n".join(lines)


def build_parser():
    ap = argparse.ArgumentParser(
        prog="maxwell-relax", description=__doc__.splitlines()[0],
        epilog=_help_epilog(), formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", type=Path, help="key = value configuration file")
    ap.add_argument("--out", type=Path, default=Path("out"), help="output directory (out)")
    ap.add_argument("--threads", type=int, help="worker threads for the compiled kernels")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def _set_threads(n):
    if n is None:
        env = os.environ.get(THREADS_ENV)
        if not env:
            return
        n = int(env)
    if n < 1:
        raise ConfigError(f"thread count must be >= 1, got {n}")
    import warnings

    import numba
    with warnings.catch_warnings():
        # numba reports which threading backends it skipped; not actionable here
        warnings.simplefilter("ignore", numba.NumbaWarning)
        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        _set_threads(args.threads)
        text = args.config.read_text() if args.config else ""
        cfg = parse_config(text)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    args.out.mkdir(parents=True, exist_ok=True)
    stale = args.out / "FAILED"
    if stale.exists():
        stale.unlink()
    return COMMANDS[args.command](cfg, args.out)


if __name__ == "__main__":
    sys.exit(main())
