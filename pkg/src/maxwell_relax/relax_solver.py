"""Finite-volume solver for the Maxwell relaxation system on a periodic grid.

One step is Strang-split: exact exponential decay of the stresses over
dt/2, a two-stage SSP Runge-Kutta transport step with local Lax-Friedrichs
interface fluxes, and another exact half step of decay.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .core import (RELAX_COMPONENTS, RHO, TAU1, TAU2, RelaxField,
                   StateViolation, check_field)
from .eos import total_dissipation, total_entropy
from . import kernels
from .structure import SAFETY, relax_flux, wavespeed_bound

log = logging.getLogger(__name__)

RECONSTRUCTIONS = ("first-order", "muscl-minmod", "muscl-linear")


def minmod(a, b):
    return np.where(a * b > 0.0, np.where(np.abs(a) < np.abs(b), a, b), 0.0)


def interface_states(U, axis, reconstruction):
    """Left/right states at the interfaces i+1/2 along array ``axis``."""
    right = np.roll(U, -1, axis=axis)
    if reconstruction == "first-order":
        return U, right
    left = np.roll(U, 1, axis=axis)
    dm = U - left
    dp = right - U
    if reconstruction == "muscl-minmod":
        half = 0.5 * minmod(dm, dp)
    elif reconstruction == "muscl-linear":
        half = 0.25 * (dm + dp)
    else:
        raise ValueError(f"unknown reconstruction {reconstruction!r}")
    return U + half, np.roll(U - half, -1, axis=axis)


def llf_divergence(U, dx, flux, speed, reconstruction):
    """Conservative flux-difference tendency ``-sum_j dF_j/dx_j``.

    ``flux(V, j)`` and ``speed(V, j)`` evaluate the physical flux and a bound
    on the characteristic speeds along grid axis j.  Periodic in every axis.
    """
    out = np.zeros_like(U)
    for j in range(U.ndim - 1):
        ax = j + 1
        UL, UR = interface_states(U, ax, reconstruction)
        a = np.maximum(speed(UL, j), speed(UR, j))
        Fh = 0.5 * (flux(UL, j) + flux(UR, j)) - 0.5 * a * (UR - UL)
        out -= (Fh - np.roll(Fh, 1, axis=ax)) / dx[j]
    return out


@dataclass
class SolverConfig:
    t_end: float = 0.2
    cfl: float = 0.45
    reconstruction: str = "muscl-minmod"
    snapshots: tuple = None
    n_snapshots: int = 20
    density_floor: float = 1e-8
    relaxation: bool = True     # test hook: False drops the stiff source
    coupled: bool = True        # test hook: False zeroes the 1/eps flux coupling
    max_steps: int = 10_000_000

    def __post_init__(self):
        if not 0.0 < self.cfl < 1.0:
            raise ValueError(f"cfl must lie in (0, 1), got {self.cfl}")
        if self.reconstruction not in RECONSTRUCTIONS:
            raise ValueError(f"reconstruction must be one of {RECONSTRUCTIONS}")
        if self.t_end < 0:
            raise ValueError("t_end must be non-negative")
        if self.snapshots is None:
            self.snapshots = snapshot_schedule(self.t_end, self.n_snapshots)
        snaps = tuple(float(t) for t in self.snapshots)
        if any(b < a for a, b in zip(snaps, snaps[1:])):
            raise ValueError("snapshot times must be sorted")
        if snaps and (snaps[0] < 0 or snaps[-1] > self.t_end * (1 + 1e-12)):
            raise ValueError("snapshot times must lie in [0, t_end]")
        self.snapshots = snaps


def snapshot_schedule(t_end, n=20):
    """``n`` uniform output times ending at ``t_end``; just ``(0,)`` if t_end == 0."""
    if t_end == 0:
        return (0.0,)
    return tuple(t_end * (k + 1) / n for k in range(n))


@dataclass
class Trajectory:
    grid: object
    params: object
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    step_times: list = field(default_factory=list)   # t_n, n = 0..N
    entropy: list = field(default_factory=list)      # H(t_n)
    dissipation: list = field(default_factory=list)  # D(t_n)
    dts: list = field(default_factory=list)          # t_{n+1} - t_n
    snapshot_steps: list = field(default_factory=list)
    failed: bool = False
    failure: str = ""

    @property
    def nsteps(self):
        return len(self.dts)

    def final(self):
        return RelaxField(self.grid, self.states[-1])


def kernel_params(p):
    return np.array([p.eps1, p.eps2, p.eos_A, p.eos_gamma, SAFETY])


def compiled_divergence(U, g, p, reconstruction, model):
    """Same tendency as :func:`llf_divergence`, from the compiled kernels."""
    U3 = kernels.as3d(np.ascontiguousarray(U))
    out = np.zeros_like(U3)
    prm = kernel_params(p)
    recon = kernels.RECON_CODES[reconstruction]
    for j in range(g.dim):
        kernels.llf_tendency(U3, g.dx[j], j, recon, model, prm, out)
    return out.reshape(U.shape)


def hyperbolic_rhs(f, g, p, reconstruction="muscl-minmod", floor=1e-8, coupled=True,
                   engine="compiled"):
    """Transport tendency of the relaxation system (no source).

    Accepts a :class:`RelaxField` or a bare component-first array.
    ``engine="numpy"`` selects the vectorized reference implementation.
    """
    U = f.U if isinstance(f, RelaxField) else f
    bad = check_field(U, floor)
    if bad is not None:
        raise StateViolation(bad.field, bad.value, floor, bad.cell)
    if engine == "numpy":
        return llf_divergence(
            U, g.dx,
            lambda V, j: relax_flux(V, j, p, coupled=coupled),
            lambda V, j: wavespeed_bound(V, j, p, coupled=coupled),
            reconstruction)
    model = kernels.RELAX if coupled else kernels.RELAX_UNCOUPLED
    return compiled_divergence(U, g, p, reconstruction, model)


def relax_source_exact(tau1, tau2, dt, p):
    """Exact solution of d(tau)/dt = -tau / (visc * eps^2) over ``dt``."""
    if dt < 0:
        raise ValueError("dt must be non-negative")
    return (tau1 * np.exp(-dt / (p.nu * p.eps1 ** 2)),
            tau2 * np.exp(-dt / (p.kappa * p.eps2 ** 2)))


def _apply_source(U, dt, p):
    out = U.copy()
    out[TAU1], out[TAU2] = relax_source_exact(U[TAU1], U[TAU2], dt, p)
    return out


def stable_dt(f, g, p, cfl=0.45, coupled=True):
    """``cfl * dx / max wave speed``, taking the most restrictive axis."""
    U = f.U if isinstance(f, RelaxField) else f
    bad = check_field(U, 0.0)
    if bad is not None:
        raise StateViolation(bad.field, bad.value, 0.0, bad.cell)
    U3 = kernels.as3d(np.ascontiguousarray(U))
    model = kernels.RELAX if coupled else kernels.RELAX_UNCOUPLED
    prm = kernel_params(p)
    rate = max(kernels.max_rate(U3, j, model, prm) / g.dx[j] for j in range(g.dim))
    return cfl / rate


def step_strang(f, dt, g, p, cfg=None):
    """Advance one Strang step: source(dt/2), SSP-RK2 transport(dt), source(dt/2)."""
    cfg = cfg or SolverConfig()
    U = f.U if isinstance(f, RelaxField) else f
    rhs = lambda V: hyperbolic_rhs(V, g, p, cfg.reconstruction, cfg.density_floor, cfg.coupled)
    if cfg.relaxation:
        U = _apply_source(U, 0.5 * dt, p)
    U1 = U + dt * rhs(U)
    U = 0.5 * (U + U1 + dt * rhs(U1))
    if cfg.relaxation:
        U = _apply_source(U, 0.5 * dt, p)
    bad = check_field(U, cfg.density_floor)
    if bad is not None:
        raise StateViolation(bad.field, bad.value, cfg.density_floor, bad.cell)
    return RelaxField(g, U) if isinstance(f, RelaxField) else U


def run(init, cfg, p):
    """Integrate from ``init`` to ``cfg.t_end``, recording snapshots.

    Steps are clipped so that every snapshot time is hit exactly.  A state
    violation stops the run; the partial trajectory is returned with
    ``failed`` set.
    """
    g = init.grid
    U = init.U.copy()
    vol = g.cell_volume
    traj = Trajectory(grid=g, params=p)
    bad = check_field(U, cfg.density_floor)
    if bad is not None:
        traj.failed = True
        traj.failure = str(StateViolation(bad.field, bad.value, cfg.density_floor, bad.cell, 0.0))
        return traj
    t = 0.0
    traj.step_times.append(t)
    traj.entropy.append(total_entropy(U, p, vol))
    traj.dissipation.append(total_dissipation(U, p, vol))
    pending = list(cfg.snapshots)
    while pending and pending[0] <= t:
        traj.times.append(pending.pop(0))
        traj.states.append(U.copy())
        traj.snapshot_steps.append(0)
    while pending:
        if traj.nsteps >= cfg.max_steps:
            traj.failed = True
            traj.failure = f"step limit {cfg.max_steps} reached at t={t:.6g}"
            break
        try:
            dt = stable_dt(U, g, p, cfg.cfl, cfg.coupled)
            target = pending[0]
            if t + dt >= target * (1 - 1e-14) or t + dt > target:
                dt = target - t
                t_new = target
            else:
                t_new = t + dt
            U = step_strang(U, dt, g, p, cfg)
        except StateViolation as exc:
            exc.time = t
            traj.failed = True
            traj.failure = str(StateViolation(exc.field, exc.value, exc.floor, exc.cell, t))
            log.warning("relaxation run aborted: %s", traj.failure)
            break
        t = t_new
        traj.dts.append(dt)
        traj.step_times.append(t)
        traj.entropy.append(total_entropy(U, p, vol))
        traj.dissipation.append(total_dissipation(U, p, vol))
        while pending and pending[0] <= t:
            traj.times.append(pending.pop(0))
            traj.states.append(U.copy())
            traj.snapshot_steps.append(traj.nsteps)
    return traj


# ---- snapshot output -----------------------------------------------------

def write_snapshot_binary(path, U, grid, time, params, components=RELAX_COMPONENTS, extra=None):
    """Raw little-endian float64 array preceded by a ``key = value`` text header."""
    header = {
        "format": "maxwell-relax-snapshot-v1",
        "dims": " ".join(str(n) for n in grid.shape),
        "dx": " ".join(repr(h) for h in grid.dx),
        "time": repr(float(time)),
        "components": " ".join(components),
        "nu": repr(params.nu), "kappa": repr(params.kappa),
        "eps1": repr(params.eps1), "eps2": repr(params.eps2),
        "eos_A": repr(params.eos_A), "eos_gamma": repr(params.eos_gamma),
    }
    if extra:
        header.update({k: str(v) for k, v in extra.items()})
    text = "".join(f"{k} = {v}\n" for k, v in header.items()) + "end_header\n"
    data = np.ascontiguousarray(U, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(text.encode("ascii"))
        fh.write(data.tobytes())


def read_snapshot_binary(path):
    """Inverse of :func:`write_snapshot_binary`; returns (header dict, array)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    marker = b"end_header\n"
    cut = raw.index(marker) + len(marker)
    header = {}
    for line in raw[:cut - len(marker)].decode("ascii").splitlines():
        k, v = line.split(" = ", 1)
        header[k] = v
    dims = tuple(int(n) for n in header["dims"].split())
    ncomp = len(header["components"].split())
    arr = np.frombuffer(raw[cut:], dtype="<f8").reshape((ncomp,) + dims)
    return header, arr.copy()


def write_snapshot_csv(path, U, grid, columns=RELAX_COMPONENTS):
    """1D snapshot as CSV with an ``x`` column followed by ``columns``."""
    if grid.dim != 1:
        raise ValueError("CSV snapshots are only defined for 1D grids")
    x = grid.centers()[0]
    table = np.column_stack([x] + [U[k] for k in range(U.shape[0])])
    np.savetxt(path, table, delimiter=",", header=",".join(("x",) + tuple(columns)),
               comments="", fmt="%.17g")


def write_entropy_csv(path, traj):
    n = len(traj.step_times)
    dts = list(traj.dts) + [float("nan")]
    table = np.column_stack([np.arange(n), traj.step_times, dts[:n],
                             traj.entropy, traj.dissipation])
    np.savetxt(path, table, delimiter=",", header="step,time,dt,entropy,dissipation",
               comments="", fmt="%.17g")
