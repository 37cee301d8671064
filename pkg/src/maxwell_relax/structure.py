"""Quasilinear form of the relaxation system and its symmetrizer.

Conservative variables are split as w = (rho, m) and z = (tau1 packed, tau2).
Along coordinate axis j the flux is

    F_j(U) = ( f_j(w) + C_j Lambda z ,  Lambda g_j(w) )

with Lambda = diag(1/eps1 (x5), 1/eps2).  ``C_j`` is constant and ``g_j`` is
linear in the velocity, so the directional Jacobian has the block form
[[A, C Lambda], [Lambda B, 0]].  The entropy Hessian blockdiag(eta_ww, eta_zz)
symmetrizes it; :func:`check_structure` measures how exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .core import (MOM, N_RELAX, PACKED_INDEX, RHO, TAU1, TAU2, RelaxState,
                   unpack_matrix)
from .eos import pressure, pressure_deriv

SAFETY = 1.2


def _stress_basis():
    # E[i, j, c]: d T_ij / d packed_c for the full symmetric traceless tensor
    E = np.zeros((3, 3, 5))
    for c in range(5):
        e = np.zeros(5)
        e[c] = 1.0
        E[:, :, c] = unpack_matrix(e)
    # G[j, c, k]: coefficient of v_k in the packed dev-sym term of axis j
    G = np.zeros((3, 5, 3))
    for j in range(3):
        for c, (a, b) in enumerate(PACKED_INDEX):
            G[j, c, a] += float(j == b)
            G[j, c, b] += float(j == a)
            if a == b:
                G[j, c, j] -= 2.0 / 3.0
    return E, G


_E, _G = _stress_basis()

# eta_zz: Hessian of 2 tau2^2 + |tau1|^2 in packed coordinates
ETA_ZZ = np.zeros((6, 6))
ETA_ZZ[:2, :2] = [[4.0, 2.0], [2.0, 4.0]]
ETA_ZZ[2, 2] = ETA_ZZ[3, 3] = ETA_ZZ[4, 4] = 4.0
ETA_ZZ[5, 5] = 4.0


def coupling_matrix(j):
    """Constant 4x6 matrix C_j (before the 1/eps scaling)."""
    C = np.zeros((4, 6))
    C[1:4, :5] = _E[:, j, :]
    C[1 + j, 5] = 1.0
    return C


def eps_scaling(p):
    return np.array([1.0 / p.eps1] * 5 + [1.0 / p.eps2])


def source_matrix(p):
    """Diagonal S of the relaxation source -S z / eps^2 in packed form."""
    return np.diag([1.0 / p.nu] * 5 + [1.0 / p.kappa])


# ---- vectorized flux -----------------------------------------------------

def relax_flux(U, axis, p, coupled=True):
    """Physical flux along ``axis`` for a component-first array ``U``."""
    rho = U[RHO]
    m = U[MOM]
    v = m / rho
    F = np.empty_like(U)
    F[RHO] = m[axis]
    F[MOM] = m * v[axis]
    F[1 + axis] += pressure(rho, p)
    if coupled:
        t = U[TAU1]
        zz = -t[0] - t[1]
        cols = ((t[0], t[2], t[3]), (t[2], t[1], t[4]), (t[3], t[4], zz))[axis]
        F[1] += cols[0] / p.eps1
        F[2] += cols[1] / p.eps1
        F[3] += cols[2] / p.eps1
        F[1 + axis] += U[TAU2] / p.eps2
        a = v[axis] / p.eps1
        b = (v[0] / p.eps1, v[1] / p.eps1, v[2] / p.eps1)
        if axis == 0:
            F[4], F[5], F[6], F[7], F[8] = 4.0 / 3.0 * a, -2.0 / 3.0 * a, b[1], b[2], 0.0
        elif axis == 1:
            F[4], F[5], F[6], F[7], F[8] = -2.0 / 3.0 * a, 4.0 / 3.0 * a, b[0], 0.0, b[2]
        else:
            F[4], F[5], F[6], F[7], F[8] = -2.0 / 3.0 * a, -2.0 / 3.0 * a, 0.0, b[0], b[1]
        F[TAU2] = v[axis] / p.eps2
    else:
        F[TAU1] = 0.0
        F[TAU2] = 0.0
    return F


def wavespeed_bound(U, axis, p, coupled=True):
    """Per-cell bound on the characteristic speeds along ``axis``.

    |v_j| + sqrt(p' + (4/(3 eps1^2) + 1/eps2^2) / rho) bounds every root of
    the longitudinal cubic and the transverse quadratics exactly; the result
    carries the same safety factor as :func:`max_wavespeed`.
    """
    rho = U[RHO]
    vj = np.abs(U[1 + axis] / rho)
    c2 = pressure_deriv(rho, p)
    if coupled:
        c2 = c2 + (4.0 / (3.0 * p.eps1 ** 2) + 1.0 / p.eps2 ** 2) / rho
    return SAFETY * (vj + np.sqrt(c2))


# ---- point matrices ------------------------------------------------------

def _split(U):
    if isinstance(U, RelaxState):
        U = U.to_vector()
    U = np.asarray(U, dtype=float)
    if U.shape[0] == 4:
        U = np.concatenate([U, np.zeros(6)])
    if not U[0] > 0:
        raise ValueError("density must be positive")
    return U


def euler_jacobian(U, j, p):
    U = _split(U)
    rho, m = U[0], U[1:4]
    v = m / rho
    A = np.zeros((4, 4))
    A[0, 1 + j] = 1.0
    A[1:4, 0] = -v * v[j]
    A[1 + j, 0] += pressure_deriv(rho, p)
    A[1:4, 1:4] = v[j] * np.eye(3)
    A[1:4, 1 + j] += v
    return A


def stress_jacobian(U, j):
    """B_j = d g_j / d w, with g_j the unscaled stress-equation flux (6x4)."""
    U = _split(U)
    rho, m = U[0], U[1:4]
    v = m / rho
    B = np.zeros((6, 4))
    B[:5, 0] = -(_G[j] @ v) / rho
    B[:5, 1:4] = _G[j] / rho
    B[5, 0] = -v[j] / rho
    B[5, 1 + j] = 1.0 / rho
    return B


@dataclass
class QuasilinearSystem:
    """A_j, B_j, C_j and S at one state, for j = 0, 1, 2."""

    A: list
    B: list
    C: list
    S: np.ndarray

    @classmethod
    def at(cls, U, p):
        U = _split(U)
        return cls([euler_jacobian(U, j, p) for j in range(3)],
                   [stress_jacobian(U, j) for j in range(3)],
                   [coupling_matrix(j) for j in range(3)],
                   source_matrix(p))


def assemble(w, xi, p, coupled=True):
    """Directional flux Jacobian ``sum_j xi_j dF_j/dU`` (10x10).

    ``w`` may be (rho, m) or a full state; the Jacobian does not depend on z.
    ``coupled=False`` zeroes the 1/eps blocks (decoupled gas dynamics).
    """
    U = _split(w)
    xi = np.asarray(xi, dtype=float)
    if abs(np.linalg.norm(xi) - 1.0) > 1e-12:
        raise ValueError("direction must be a unit vector")
    lam = eps_scaling(p)
    M = np.zeros((N_RELAX, N_RELAX))
    for j in range(3):
        if xi[j] == 0.0:
            continue
        M[:4, :4] += xi[j] * euler_jacobian(U, j, p)
        if coupled:
            M[:4, 4:] += xi[j] * coupling_matrix(j) * lam[None, :]
            M[4:, :4] += xi[j] * lam[:, None] * stress_jacobian(U, j)
    return M


def point_flux(U, xi, p, coupled=True):
    """``sum_j xi_j F_j(U)`` for a single state vector (finite-difference oracle)."""
    U = _split(U)
    out = np.zeros(N_RELAX)
    for j in range(3):
        if xi[j] != 0.0:
            out += xi[j] * relax_flux(U, j, p, coupled=coupled)
    return out


def entropy_hessian(U, p):
    """Analytic Hessian of the entropy in (rho, m, tau1 packed, tau2)."""
    U = _split(U)
    rho, m = U[0], U[1:4]
    v = m / rho
    H = np.zeros((N_RELAX, N_RELAX))
    H[0, 0] = 4.0 * pressure_deriv(rho, p) / rho + 4.0 * (v @ v) / rho
    H[0, 1:4] = H[1:4, 0] = -4.0 * v / rho
    H[1:4, 1:4] = 4.0 / rho * np.eye(3)
    H[4:, 4:] = ETA_ZZ
    return H


def symmetrizer(U, p):
    return entropy_hessian(U, p)


# ---- wave speeds ---------------------------------------------------------

def _spectral_radius_sym(S, maxiter=1000, tol=1e-13):
    # power iteration on S^2 so that +-lambda pairs do not stall it
    S2 = S @ S
    x = np.linspace(1.0, 2.0, S.shape[0])
    x /= np.linalg.norm(x)
    lam = 0.0
    for _ in range(maxiter):
        y = S2 @ x
        lam_new = float(x @ y)
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return 0.0
        x = y / ny
        if abs(lam_new - lam) <= tol * max(abs(lam_new), 1e-300):
            lam = lam_new
            break
        lam = lam_new
    return float(np.sqrt(max(lam, 0.0)))


def max_wavespeed(U, p, coupled=True, axes=(0, 1, 2)):
    """Safety-scaled bound on the spectral radius of the flux Jacobian.

    Each axis Jacobian is symmetrized with the Cholesky factor of the entropy
    Hessian and its spectral radius found by power iteration.
    """
    U = _split(U)
    H = entropy_hessian(U, p)
    L = np.linalg.cholesky(H)
    Linv = np.linalg.inv(L)
    best = 0.0
    for j in axes:
        M = assemble(U, np.eye(3)[j], p, coupled=coupled)
        S = L.T @ M @ Linv.T
        S = 0.5 * (S + S.T)
        best = max(best, _spectral_radius_sym(S))
    return SAFETY * best


# ---- structure certification ---------------------------------------------

@dataclass
class StructureReport:
    tol: float
    rows: list = field(default_factory=list)

    @property
    def worst_symmetry(self):
        return max((r["sym_residual"] for r in self.rows if r["valid"]), default=np.nan)

    @property
    def worst_identity(self):
        return max((r["identity_residual"] for r in self.rows if r["valid"]), default=np.nan)

    @property
    def min_eigenvalue(self):
        return min((r["min_eig"] for r in self.rows if r["valid"]), default=np.nan)

    @property
    def passed(self):
        return bool(self.rows) and all(r["pass"] for r in self.rows)

    def summary(self):
        verdict = "PASS" if self.passed else "FAIL"
        return (f"structure {verdict}: samples={len(self.rows)} "
                f"max|DA-(DA)^T|={self.worst_symmetry:.3e} "
                f"max|DC-B^T H|={self.worst_identity:.3e} "
                f"min eig={self.min_eigenvalue:.3e} tol={self.tol:.1e}")

    def to_csv(self, path):
        cols = ["sample", "valid", "rho", "sym_residual", "min_eig",
                "identity_residual", "pass"]
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=cols)
            w.writeheader()
            for r in self.rows:
                w.writerow({k: r[k] for k in cols})


def check_structure(samples, p, tol=1e-10, coupling_perturbation=None):
    """Check symmetrizability and the compatibility identity on each sample.

    For each state and axis j: ||D A_j - (D A_j)^T||, the minimum eigenvalue
    of the full entropy Hessian, and ||D C_j - B_j^T H|| with D = eta_ww and
    H = eta_zz.  ``coupling_perturbation`` (4x6) is added to every C_j; it
    exists only as a negative control.
    """
    report = StructureReport(tol=tol)
    for k, s in enumerate(samples):
        U = s.to_vector() if isinstance(s, RelaxState) else np.asarray(s, dtype=float)
        row = {"sample": k, "rho": float(U[0]), "valid": bool(np.isfinite(U).all() and U[0] > 0),
               "sym_residual": np.nan, "min_eig": np.nan, "identity_residual": np.nan,
               "pass": False}
        if row["valid"]:
            Hfull = entropy_hessian(U, p)
            D = Hfull[:4, :4]
            Hz = Hfull[4:, 4:]
            sym = ident = 0.0
            for j in range(3):
                DA = D @ euler_jacobian(U, j, p)
                sym = max(sym, np.linalg.norm(DA - DA.T))
                C = coupling_matrix(j)
                if coupling_perturbation is not None:
                    C = C + coupling_perturbation
                ident = max(ident, np.linalg.norm(D @ C - stress_jacobian(U, j).T @ Hz.T))
            row["sym_residual"] = float(sym)
            row["identity_residual"] = float(ident)
            row["min_eig"] = float(np.linalg.eigvalsh(Hfull)[0])
            row["pass"] = bool(sym <= tol and ident <= tol and row["min_eig"] > 0)
        report.rows.append(row)
    return report


def full_symmetry_residual(U, xi, p):
    """Relative asymmetry of blockdiag(eta_ww, eta_zz) @ M(xi)."""
    HM = entropy_hessian(U, p) @ assemble(U, xi, p)
    return float(np.linalg.norm(HM - HM.T) / np.linalg.norm(HM))


def random_states(n, rng, rho_range=(0.5, 2.0), vmax=1.0, taumax=1.0):
    """Random admissible states: rho uniform, |v| <= vmax, |tau comps| <= taumax."""
    out = []
    for _ in range(n):
        rho = rng.uniform(*rho_range)
        d = rng.normal(size=3)
        v = d / np.linalg.norm(d) * vmax * rng.uniform() ** (1.0 / 3.0)
        tau = rng.uniform(-taumax, taumax, size=6)
        out.append(RelaxState.from_vector(np.concatenate([[rho], rho * v, tau])))
    return out
