"""Independent reference computations used by the tests.

None of these call into the solver code paths they check.
"""

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.linalg import expm


def fd_jacobian(fun, x, rel=1e-6):
    """Central-difference Jacobian with per-coordinate scaled steps."""
    x = np.asarray(x, dtype=float)
    f0 = np.asarray(fun(x))
    J = np.zeros((f0.size, x.size))
    for k in range(x.size):
        h = rel * max(1.0, abs(x[k]))
        e = np.zeros_like(x)
        e[k] = h
        J[:, k] = (np.asarray(fun(x + e)) - np.asarray(fun(x - e))) / (2 * h)
    return J


def fd_hessian(fun, x, h=1e-4):
    """Second-order central-difference Hessian of a scalar function."""
    x = np.asarray(x, dtype=float)
    n = x.size
    H = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            ei = np.zeros(n)
            ej = np.zeros(n)
            ei[i] = h
            ej[j] = h
            H[i, j] = (fun(x + ei + ej) - fun(x + ei - ej)
                       - fun(x - ei + ej) + fun(x - ei - ej)) / (4 * h * h)
            H[j, i] = H[i, j]
    return H


def phi_by_quad(rho, A, gamma):
    val, _ = quad(lambda z: A * z ** gamma / z ** 2, 1.0, rho, epsabs=0.0, epsrel=1e-13, limit=200)
    return rho * val


def decay_by_ode(z0, rate, dt):
    """Integrate dz/dt = -rate z with a tightly controlled RK solver."""
    sol = solve_ivp(lambda t, z: -rate * z, (0.0, dt), np.atleast_1d(z0).astype(float),
                    method="DOP853", rtol=1e-13, atol=1e-16)
    return sol.y[:, -1]


def entropy_direct(U, A, gamma):
    """Entropy from its definition, with the full 3x3 stress tensor assembled by hand."""
    rho, m = U[0], U[1:4]
    xx, yy, xy, xz, yz = U[4:9]
    T = np.array([[xx, xy, xz], [xy, yy, yz], [xz, yz, -xx - yy]])
    Phi = rho * A * (rho ** (gamma - 1) - 1) / (gamma - 1)   # rho * int_1^rho A z^(gamma-2) dz
    return 4 * Phi + 2 * (m @ m) / rho + 2 * U[9] ** 2 + np.trace(T.T @ T)


def linear_ce_error(eps, amp=0.1, k=1, T=0.2, n_times=20, c2=2.0, nu=1.0, kappa=1.0):
    """sup-in-time error of the linearized relaxation system against the
    linearized Navier-Stokes solution with CE stresses, one Fourier mode.

    Linearized about rho=1, v=0; 1D longitudinal variables (rho, m, tau_xx, tau2).
    Returned in the L2 norm on the unit interval, with tau1 measured by the
    Frobenius norm of diag(1, -1/2, -1/2) tau_xx.
    """
    weight = np.array([1.0, 1.0, np.sqrt(1.5), 1.0])
    kk = 2 * np.pi * k
    ik = 1j * kk
    M = np.array([[0, -ik, 0, 0],
                  [-c2 * ik, 0, -ik / eps, -ik / eps],
                  [0, -4 / 3 * ik / eps, -1 / (nu * eps ** 2), 0],
                  [0, -ik / eps, 0, -1 / (kappa * eps ** 2)]])
    N = np.array([[0, -ik], [-c2 * ik, -(4 / 3 * nu + kappa) * kk ** 2]])
    U0 = np.array([amp / 1j, 0, 0, 0], dtype=complex)   # coefficient of amp sin(kx) up to a factor 2
    worst = 0.0
    for t in T * np.arange(1, n_times + 1) / n_times:
        U = expm(M * t) @ U0
        W = expm(N * t) @ U0[:2]
        Z = np.array([W[0], W[1], -eps * nu * 4 / 3 * ik * W[1], -eps * kappa * ik * W[1]])
        worst = max(worst, np.linalg.norm(weight * (U - Z)))
    # a mode c e^{ikx} + conj has L2 norm sqrt(2)|c|; U0 holds amp/2i per mode
    return worst / np.sqrt(2)
