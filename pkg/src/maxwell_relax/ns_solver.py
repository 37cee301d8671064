"""Reference isentropic Navier-Stokes solver and the Chapman-Enskog stresses.

Convective terms reuse the relaxation solver's LLF/MUSCL machinery; the
Newtonian viscous stress is built from cell-centered central differences
and its divergence is taken with the same central stencil, which keeps the
viscous term in divergence form (mass and momentum are conserved exactly).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import (MOM, RHO, NSField, StateViolation, check_field,
                   dev_sym_packed, tensor_matvec)
from .eos import pressure, pressure_deriv
from .relax_solver import (RECONSTRUCTIONS, compiled_divergence, kernel_params,
                           llf_divergence, snapshot_schedule)
from .structure import SAFETY

log = logging.getLogger(__name__)


def central_diff(u, axis, dx):
    """Second-order central difference of ``u`` along spatial ``axis``."""
    ax = axis + (u.ndim - len(dx))
    return (np.roll(u, -1, axis=ax) - np.roll(u, 1, axis=ax)) / (2.0 * dx[axis])


def velocity_gradient(v, grid):
    """grad[i, j] = d v_i / d x_j; derivatives along absent axes are zero."""
    grad = np.zeros((3, 3) + v.shape[1:])
    for j in range(grid.dim):
        grad[:, j] = central_diff(v, j, grid.dx)
    return grad


def newtonian_parts(v, grid):
    """Packed dev-sym(grad v) and div v on cell centers."""
    grad = velocity_gradient(v, grid)
    return dev_sym_packed(grad), grad[0, 0] + grad[1, 1] + grad[2, 2]


def ce_closure(vfield, grid, p):
    """Chapman-Enskog stresses tau1 = -eps1 nu dev-sym(grad v), tau2 = -eps2 kappa div v."""
    dev, div = newtonian_parts(np.asarray(vfield, dtype=float), grid)
    return -p.eps1 * p.nu * dev, -p.eps2 * p.kappa * div


def euler_flux(U, axis, p):
    rho = U[RHO]
    m = U[MOM]
    F = np.empty_like(U)
    F[RHO] = m[axis]
    F[MOM] = m * (m[axis] / rho)
    F[1 + axis] += pressure(rho, p)
    return F


def euler_speed(U, axis, p):
    rho = U[RHO]
    return SAFETY * (np.abs(U[1 + axis] / rho) + np.sqrt(pressure_deriv(rho, p)))


def viscous_tendency(U, grid, p):
    """Momentum tendency ``div(nu dev-sym(grad v) + kappa div v I)``."""
    v = U[MOM] / U[RHO]
    dev, div = newtonian_parts(v, grid)
    out = np.zeros_like(U)
    for j in range(grid.dim):
        col = tensor_matvec(p.nu * dev, np.eye(3)[j].reshape((3,) + (1,) * grid.dim))
        col[j] += p.kappa * div
        out[MOM] += central_diff(col, j, grid.dx)
    return out


def ns_rhs(f, g, p, reconstruction="muscl-minmod", floor=1e-8, engine="compiled"):
    """Navier-Stokes tendency of (rho, m); independent of eps1, eps2."""
    U = f.U if isinstance(f, NSField) else f
    bad = check_field(U, floor)
    if bad is not None:
        raise StateViolation(bad.field, bad.value, floor, bad.cell)
    if engine == "numpy":
        conv = llf_divergence(U, g.dx,
                              lambda V, j: euler_flux(V, j, p),
                              lambda V, j: euler_speed(V, j, p),
                              reconstruction)
        return conv + viscous_tendency(U, g, p)
    out = compiled_divergence(U, g, p, reconstruction, kernels.EULER)
    kernels.viscous_tendency(kernels.as3d(np.ascontiguousarray(U)), np.array(g.dx, dtype=float),
                             g.dim, p.nu, p.kappa, kernels.as3d(out))
    return out


@dataclass
class NSConfig:
    t_end: float = 0.2
    cfl_advective: float = 0.45
    viscous_factor: float = 1.5
    reconstruction: str = "muscl-minmod"
    snapshots: tuple = None
    n_snapshots: int = 20
    density_floor: float = 1e-8
    max_steps: int = 50_000_000

    def __post_init__(self):
        if not 0.0 < self.cfl_advective < 1.0:
            raise ValueError("cfl_advective must lie in (0, 1)")
        if not 0.0 < self.viscous_factor <= 2.0:
            raise ValueError("viscous_factor must lie in (0, 2]")
        if self.reconstruction not in RECONSTRUCTIONS:
            raise ValueError(f"reconstruction must be one of {RECONSTRUCTIONS}")
        if self.snapshots is None:
            self.snapshots = snapshot_schedule(self.t_end, self.n_snapshots)
        self.snapshots = tuple(float(t) for t in self.snapshots)


def ns_stable_dt(U, g, p, cfg):
    """min(advective CFL bound, viscous bound ~ rho dx^2 / (4/3 nu + kappa)).

    The viscous operator is a wide central stencil, whose eigenvalues are at
    most (4/3 nu + kappa)/rho * sum_j 1/dx_j^2; SSP-RK2 is stable up to 2.
    """
    rho = U[RHO]
    U3 = kernels.as3d(np.ascontiguousarray(U))
    prm = kernel_params(p)
    adv = max(kernels.max_rate(U3, j, kernels.EULER, prm) / g.dx[j] for j in range(g.dim))
    dt_adv = cfg.cfl_advective / adv
    diff = (4.0 / 3.0 * p.nu + p.kappa) / float(np.min(rho)) * sum(1.0 / h ** 2 for h in g.dx)
    dt_visc = cfg.viscous_factor / diff
    return min(dt_adv, dt_visc)


@dataclass
class NSTrajectory:
    grid: object
    params: object
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    tau1_ce: list = field(default_factory=list)
    tau2_ce: list = field(default_factory=list)
    nsteps: int = 0
    failed: bool = False
    failure: str = ""

    def field_at(self, k):
        return NSField(self.grid, self.states[k], self.tau1_ce[k], self.tau2_ce[k])

    def with_params(self, p):
        """Same (eps-independent) flow with CE stresses recomputed for ``p``."""
        out = NSTrajectory(self.grid, p, list(self.times), list(self.states),
                           nsteps=self.nsteps, failed=self.failed, failure=self.failure)
        for U in self.states:
            t1, t2 = ce_closure(U[MOM] / U[RHO], self.grid, p)
            out.tau1_ce.append(t1)
            out.tau2_ce.append(t2)
        return out


def _ns_step(U, dt, g, p, cfg):
    rhs = lambda V: ns_rhs(V, g, p, cfg.reconstruction, cfg.density_floor)
    U1 = U + dt * rhs(U)
    return 0.5 * (U + U1 + dt * rhs(U1))


def ns_run(init, cfg, p):
    """Integrate the isentropic Navier-Stokes equations with SSP-RK2.

    Every snapshot carries the CE stresses of its velocity field for the
    relaxation scales in ``p``.
    """
    g = init.grid
    U = np.array(init.U, dtype=float)
    traj = NSTrajectory(grid=g, params=p)

    def record(t):
        traj.times.append(t)
        traj.states.append(U.copy())
        t1, t2 = ce_closure(U[MOM] / U[RHO], g, p)
        traj.tau1_ce.append(t1)
        traj.tau2_ce.append(t2)

    bad = check_field(U, cfg.density_floor)
    if bad is not None:
        traj.failed = True
        traj.failure = str(StateViolation(bad.field, bad.value, cfg.density_floor, bad.cell, 0.0))
        return traj
    t = 0.0
    pending = list(cfg.snapshots)
    while pending and pending[0] <= t:
        record(pending.pop(0))
    while pending:
        if traj.nsteps >= cfg.max_steps:
            traj.failed = True
            traj.failure = f"step limit {cfg.max_steps} reached at t={t:.6g}"
            break
        try:
            dt = ns_stable_dt(U, g, p, cfg)
            target = pending[0]
            if t + dt >= target * (1 - 1e-14):
                dt = target - t
                t_new = target
            else:
                t_new = t + dt
            U = _ns_step(U, dt, g, p, cfg)
            bad = check_field(U, cfg.density_floor)
            if bad is not None:
                raise StateViolation(bad.field, bad.value, cfg.density_floor, bad.cell)
        except StateViolation as exc:
            traj.failed = True
            traj.failure = str(StateViolation(exc.field, exc.value, exc.floor, exc.cell, t))
            log.warning("Navier-Stokes run aborted: %s", traj.failure)
            break
        t = t_new
        traj.nsteps += 1
        while pending and pending[0] <= t:
            record(pending.pop(0))
    return traj
