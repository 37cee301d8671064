"""Pressure law and the scalar entropy structure of the relaxation system.

The pressure is the gamma-law ``p = A rho**gamma``.  The entropy is

    eta = 4 Phi(rho) + 2 rho |v|^2 + 2 tau2^2 + |tau1|^2,
    Phi(rho) = rho * int_1^rho p(z) / z^2 dz,

with |tau1|^2 the Frobenius norm of the full (symmetric traceless) tensor.
All functions accept scalars or arrays; field versions take the
component-first arrays described in :mod:`maxwell_relax.core`.
"""

from dataclasses import dataclass

import numpy as np

from .core import MOM, RHO, TAU1, TAU2, RelaxState, frobenius_sq, tensor_matvec


def _require_positive(rho):
    rho = np.asarray(rho, dtype=float)
    if np.any(~(rho > 0)):
        raise ValueError("density must be positive")
    return rho


def pressure(rho, p):
    rho = _require_positive(rho)
    return p.eos_A * rho ** p.eos_gamma


def pressure_deriv(rho, p):
    rho = _require_positive(rho)
    return p.eos_A * p.eos_gamma * rho ** (p.eos_gamma - 1.0)


def phi(rho, p):
    """Entropy potential ``Phi(rho) = A (rho**gamma - rho) / (gamma - 1)``.

    Closed form of ``rho * int_1^rho p(z)/z**2 dz`` for the gamma law.
    Negative for rho < 1; the reference point rho = 1 is kept as is.
    """
    rho = _require_positive(rho)
    return p.eos_A * (rho ** p.eos_gamma - rho) / (p.eos_gamma - 1.0)


def phi_quadrature(rho, p):
    """Reference value of Phi by adaptive quadrature of its defining integral."""
    from scipy.integrate import quad

    rho = float(_require_positive(rho))
    val, _ = quad(lambda z: p.eos_A * z ** (p.eos_gamma - 2.0), 1.0, rho,
                  epsabs=0.0, epsrel=1e-13, limit=200)
    return rho * val


@dataclass(frozen=True)
class EntropyBreakdown:
    phi_part: float
    kinetic_part: float
    tau2_part: float
    tau1_part: float

    @property
    def total(self):
        return self.phi_part + self.kinetic_part + self.tau2_part + self.tau1_part


def entropy(s: RelaxState, p):
    rho = float(_require_positive(s.rho))
    v = s.mom / rho
    return EntropyBreakdown(
        phi_part=float(4.0 * phi(rho, p)),
        kinetic_part=float(2.0 * rho * v @ v),
        tau2_part=2.0 * s.tau2 ** 2,
        tau1_part=s.tau1.frobenius_sq(),
    )


def entropy_flux(s: RelaxState, p):
    """Vector under the divergence in the entropy balance law."""
    rho = float(_require_positive(s.rho))
    v = s.mom / rho
    scal = 4.0 * phi(rho, p) + 2.0 * rho * (v @ v) + 4.0 * pressure(rho, p) + 4.0 * s.tau2 / p.eps2
    return scal * v + 4.0 * tensor_matvec(s.tau1.pack(), v) / p.eps1


def dissipation_rate(s: RelaxState, p):
    return float(-4.0 * s.tau2 ** 2 / (p.kappa * p.eps2 ** 2)
                 - 2.0 * s.tau1.frobenius_sq() / (p.nu * p.eps1 ** 2))


# ---- field versions -------------------------------------------------------

def entropy_density(U, p):
    rho = U[RHO]
    m = U[MOM]
    kin = 2.0 * (m[0] ** 2 + m[1] ** 2 + m[2] ** 2) / rho
    return 4.0 * phi(rho, p) + kin + 2.0 * U[TAU2] ** 2 + frobenius_sq(U[TAU1])


def dissipation_density(U, p):
    return (-4.0 * U[TAU2] ** 2 / (p.kappa * p.eps2 ** 2)
            - 2.0 * frobenius_sq(U[TAU1]) / (p.nu * p.eps1 ** 2))


def total_entropy(U, p, cell_volume):
    # np.sum reduces contiguous data pairwise, so the total is reproducible
    return float(np.sum(entropy_density(U, p)) * cell_volume)


def total_dissipation(U, p, cell_volume):
    return float(np.sum(dissipation_density(U, p)) * cell_volume)
