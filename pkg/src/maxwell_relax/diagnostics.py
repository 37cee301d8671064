"""Discrete norms, relaxation-vs-Navier-Stokes error series, rate fits and
the entropy budget audit."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .core import MOM, N_RELAX, RHO, TAU1, TAU2, Grid, unpack_matrix
from .ns_solver import NSTrajectory, central_diff


def discrete_norm(u, g: Grid, order=0):
    """Discrete Sobolev-type norm on the periodic grid.

    Parameters
    ----------
    u : ndarray
        Scalar field of shape ``g.shape`` or a stack ``(ncomp,) + g.shape``.
    g : Grid
    order : {0, 1, 2}
        0 is the cell-averaged L2 norm; 1 and 2 add every central-difference
        derivative up to that order under the same quadrature.
    """
    if order not in (0, 1, 2):
        raise ValueError(f"order must be 0, 1 or 2, got {order!r}")
    u = np.asarray(u, dtype=float)
    if u.shape[u.ndim - g.dim:] != g.shape or u.ndim > g.dim + 1:
        raise ValueError(f"field shape {u.shape} does not match grid {g.shape}")
    total = np.sum(u * u)
    if order >= 1:
        for i in range(g.dim):
            di = central_diff(u, i, g.dx)
            total += np.sum(di * di)
            if order == 2:
                for j in range(g.dim):
                    dij = central_diff(di, j, g.dx)
                    total += np.sum(dij * dij)
    return float(np.sqrt(total * g.cell_volume))


@dataclass
class ErrorSeries:
    epsilon: float
    order: int
    rows: list = field(default_factory=list)  # (t, rho, mom, tau1, tau2, total)

    @property
    def sup_error(self):
        return max(r[-1] for r in self.rows) if self.rows else float("nan")

    @property
    def times(self):
        return [r[0] for r in self.rows]

    def column(self, name):
        k = ("time", "err_rho", "err_mom", "err_tau1", "err_tau2", "err_total").index(name)
        return np.array([r[k] for r in self.rows])


def _snapshots(traj):
    """Snapshot arrays of either trajectory type in the relaxation layout."""
    if isinstance(traj, NSTrajectory):
        return [traj.field_at(k).as_relax().U for k in range(len(traj.times))]
    return [np.asarray(U) for U in traj.states]


def _eps_of(traj):
    p = traj.params
    return p.eps1 if p.eps1 == p.eps2 else (p.eps1, p.eps2)


def error_vs_reference(relax, reference, order=0):
    """Per-snapshot norms of (rho, m, tau1, tau2) differences.

    Either argument may be a relaxation or a Navier-Stokes trajectory; the
    latter contributes its attached CE stresses.  tau1 differences are
    measured in the Frobenius norm of the full tensor.
    """
    if relax.grid != reference.grid:
        raise ValueError("trajectories live on different grids")
    if len(relax.times) != len(reference.times) or any(
            a != b for a, b in zip(relax.times, reference.times)):
        raise ValueError(f"snapshot schedules differ: {relax.times} vs {reference.times}")
    g = relax.grid
    series = ErrorSeries(epsilon=_eps_of(relax), order=order)
    for t, A, B in zip(relax.times, _snapshots(relax), _snapshots(reference)):
        if A.shape[0] != N_RELAX or B.shape[0] != N_RELAX:
            raise ValueError("expected relaxation-layout snapshots")
        d = A - B
        e_rho = discrete_norm(d[RHO], g, order)
        e_mom = discrete_norm(d[MOM], g, order)
        full = unpack_matrix(d[TAU1]).reshape((9,) + g.shape)
        e_t1 = discrete_norm(full, g, order)
        e_t2 = discrete_norm(d[TAU2], g, order)
        total = float(np.sqrt(e_rho ** 2 + e_mom ** 2 + e_t1 ** 2 + e_t2 ** 2))
        series.rows.append((float(t), e_rho, e_mom, e_t1, e_t2, total))
    return series


@dataclass
class RateFit:
    points: list
    slope: float
    intercept: float
    residual: float

    @property
    def constant(self):
        """Empirical prefactor exp(intercept)."""
        return float(np.exp(self.intercept))

    def in_band(self, lo=1.7, hi=2.3):
        return bool(lo <= self.slope <= hi)


def fit_rate(points):
    """Least-squares fit of log(err) = slope log(eps) + intercept.

    ``residual`` is the root-mean-square misfit in log space.
    """
    pts = [(float(e), float(r)) for e, r in points]
    if len(pts) < 3:
        raise ValueError(f"need at least 3 points, got {len(pts)}")
    eps = np.array([e for e, _ in pts])
    err = np.array([r for _, r in pts])
    if not (np.all(np.isfinite(eps)) and np.all(eps > 0)):
        raise ValueError("epsilon values must be positive and finite")
    if not (np.all(np.isfinite(err)) and np.all(err > 0)):
        raise ValueError("errors must be positive and finite")
    if len(np.unique(eps)) != len(eps):
        raise ValueError("epsilon values must be distinct")
    X = np.column_stack([np.log(eps), np.ones_like(eps)])
    y = np.log(err)
    (slope, intercept), *_ = np.linalg.lstsq(X, y, rcond=None)
    res = float(np.sqrt(np.mean((X @ [slope, intercept] - y) ** 2)))
    if not np.isfinite(slope):
        raise ValueError("fit produced a non-finite slope")
    return RateFit(pts, float(slope), float(intercept), res)


@dataclass
class EntropyBudget:
    residual: np.ndarray   # (H_{n+1} - H_n)/dt_n - D_n
    dH: np.ndarray         # H_{n+1} - H_n

    @property
    def max_abs_residual(self):
        return float(np.max(np.abs(self.residual))) if self.residual.size else 0.0

    @property
    def max_increase(self):
        return float(np.max(self.dH)) if self.dH.size else 0.0

    def non_increasing(self, tol=0.0):
        return bool(np.all(self.dH <= tol))


def entropy_budget(traj, g=None, p=None):
    """Audit the recorded entropy series against the recorded dissipation.

    The flux term integrates to zero on the torus, so the discrete balance
    is ``(H_{n+1} - H_n)/dt_n = D_n`` up to scheme error.  ``g`` and ``p``
    default to the trajectory's own grid and parameters.
    """
    H = np.asarray(traj.entropy, dtype=float)
    D = np.asarray(traj.dissipation, dtype=float)
    dts = np.asarray(traj.dts, dtype=float)
    n = len(dts)
    if len(H) != n + 1 or len(D) != n + 1:
        raise ValueError("trajectory lacks a complete per-step entropy record")
    dH = np.diff(H)
    with np.errstate(divide="ignore", invalid="ignore"):
        rate = np.where(dts > 0, dH / np.where(dts > 0, dts, 1.0), 0.0)
    return EntropyBudget(residual=rate - D[:-1], dH=dH)


# ---- CSV output ----------------------------------------------------------

ERROR_COLUMNS = ("epsilon", "time", "err_rho", "err_mom", "err_tau1", "err_tau2", "err_total")
RATE_COLUMNS = ("epsilon", "sup_error", "slope", "intercept", "fit_residual")


def _eps_text(eps):
    if isinstance(eps, tuple):
        return "/".join(repr(float(e)) for e in eps)
    return repr(float(eps))


def write_error_csv(path, series_list):
    if isinstance(series_list, ErrorSeries):
        series_list = [series_list]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(ERROR_COLUMNS)
        for s in series_list:
            for row in s.rows:
                w.writerow([_eps_text(s.epsilon)] + [repr(float(x)) for x in row])


def write_rate_csv(path, fit: RateFit):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RATE_COLUMNS)
        for eps, err in fit.points:
            w.writerow([repr(eps), repr(err), repr(fit.slope), repr(fit.intercept),
                        repr(fit.residual)])
