"""Compiled stencil kernels for the solvers' hot loops.

Every kernel works on a component-first array viewed as 3D,
``(ncomp, nx, ny, nz)``; 1D and 2D grids use trailing axes of length one.
The numpy implementations in :mod:`relax_solver` and :mod:`ns_solver` are the
reference these kernels are tested against.
"""

import numpy as np
from numba import njit

# model codes
RELAX = 0
RELAX_UNCOUPLED = 1
EULER = 2

# reconstruction codes
FIRST_ORDER = 0
MINMOD = 1
LINEAR = 2

RECON_CODES = {"first-order": FIRST_ORDER, "muscl-minmod": MINMOD, "muscl-linear": LINEAR}

TWO_THIRDS = 2.0 / 3.0
FOUR_THIRDS = 4.0 / 3.0


@njit(cache=True, error_model="numpy")
def _eos(rho, A, gam):
    # gamma-law pressure and its derivative; gamma = 2 avoids a float power
    if gam == 2.0:
        pres = A * rho * rho
    else:
        pres = A * np.exp(gam * np.log(rho))
    return pres, gam * pres / rho


@njit(cache=True, error_model="numpy")
def _speed_pt(model, u, axis, prm):
    eps1, eps2, A, gam, safety = prm[0], prm[1], prm[2], prm[3], prm[4]
    rho = u[0]
    va = u[1 + axis] / rho
    c2 = _eos(rho, A, gam)[1]
    if model == RELAX:
        c2 += (FOUR_THIRDS / (eps1 * eps1) + 1.0 / (eps2 * eps2)) / rho
    return safety * (abs(va) + np.sqrt(c2))


@njit(cache=True, error_model="numpy")
def _up(i, n):
    return i + 1 if i + 1 < n else 0


@njit(cache=True, error_model="numpy")
def _down(i, n):
    return i - 1 if i > 0 else n - 1


@njit(cache=True, error_model="numpy")
def _flux_pt(model, u, axis, prm, out):
    # prm = (eps1, eps2, A, gamma, safety); returns the speed bound
    eps1, eps2, A, gam, safety = prm[0], prm[1], prm[2], prm[3], prm[4]
    rho = u[0]
    vx = u[1] / rho
    vy = u[2] / rho
    vz = u[3] / rho
    if axis == 0:
        va = vx
    elif axis == 1:
        va = vy
    else:
        va = vz
    pres, c2 = _eos(rho, A, gam)
    out[0] = u[1 + axis]
    out[1] = u[1] * va
    out[2] = u[2] * va
    out[3] = u[3] * va
    out[1 + axis] += pres
    if model == EULER:
        return safety * (abs(va) + np.sqrt(c2))
    if model == RELAX_UNCOUPLED:
        for c in range(4, 10):
            out[c] = 0.0
        return safety * (abs(va) + np.sqrt(c2))
    txx, tyy, txy, txz, tyz = u[4], u[5], u[6], u[7], u[8]
    tzz = -txx - tyy
    i1 = 1.0 / eps1
    i2 = 1.0 / eps2
    a = va * i1
    if axis == 0:
        out[1] += txx * i1
        out[2] += txy * i1
        out[3] += txz * i1
        out[4] = FOUR_THIRDS * a
        out[5] = -TWO_THIRDS * a
        out[6] = vy * i1
        out[7] = vz * i1
        out[8] = 0.0
    elif axis == 1:
        out[1] += txy * i1
        out[2] += tyy * i1
        out[3] += tyz * i1
        out[4] = -TWO_THIRDS * a
        out[5] = FOUR_THIRDS * a
        out[6] = vx * i1
        out[7] = 0.0
        out[8] = vz * i1
    else:
        out[1] += txz * i1
        out[2] += tyz * i1
        out[3] += tzz * i1
        out[4] = -TWO_THIRDS * a
        out[5] = -TWO_THIRDS * a
        out[6] = 0.0
        out[7] = vx * i1
        out[8] = vy * i1
    out[1 + axis] += u[9] * i2
    out[9] = va * i2
    c2 += (FOUR_THIRDS * i1 * i1 + i2 * i2) / rho
    return safety * (abs(va) + np.sqrt(c2))


@njit(cache=True, error_model="numpy")
def _slope_half(dm, dp, recon):
    if recon == MINMOD:
        if dm * dp <= 0.0:
            return 0.0
        return 0.5 * dm if abs(dm) < abs(dp) else 0.5 * dp
    return 0.25 * (dm + dp)


@njit(cache=True, error_model="numpy")
def _llf_line(U, inv, axis, recon, model, prm, out, uL, uR, fL, fR):
    # one periodic line, U and out are (ncomp, n) views
    nc, n = U.shape
    for i in range(n):
        im = i - 1 if i > 0 else n - 1
        ip = i + 1 if i + 1 < n else 0
        ipp = ip + 1 if ip + 1 < n else 0
        for c in range(nc):
            u0 = U[c, i]
            u1 = U[c, ip]
            if recon == FIRST_ORDER:
                uL[c] = u0
                uR[c] = u1
            else:
                uL[c] = u0 + _slope_half(u0 - U[c, im], u1 - u0, recon)
                uR[c] = u1 - _slope_half(u1 - u0, U[c, ipp] - u1, recon)
        sL = _flux_pt(model, uL, axis, prm, fL)
        sR = _flux_pt(model, uR, axis, prm, fR)
        a = sL if sL > sR else sR
        for c in range(nc):
            fh = (0.5 * (fL[c] + fR[c]) - 0.5 * a * (uR[c] - uL[c])) * inv
            out[c, i] -= fh
            out[c, ip] += fh


@njit(cache=True, error_model="numpy")
def llf_tendency(U, dx, axis, recon, model, prm, out):
    """Add the LLF flux-difference tendency along ``axis`` to ``out``."""
    nc, nx, ny, nz = U.shape
    uL = np.empty(nc)
    uR = np.empty(nc)
    fL = np.empty(nc)
    fR = np.empty(nc)
    inv = 1.0 / dx
    if axis == 0:
        for j in range(ny):
            for k in range(nz):
                _llf_line(U[:, :, j, k], inv, axis, recon, model, prm, out[:, :, j, k], uL, uR, fL, fR)
    elif axis == 1:
        for i in range(nx):
            for k in range(nz):
                _llf_line(U[:, i, :, k], inv, axis, recon, model, prm, out[:, i, :, k], uL, uR, fL, fR)
    else:
        for i in range(nx):
            for j in range(ny):
                _llf_line(U[:, i, j, :], inv, axis, recon, model, prm, out[:, i, j, :], uL, uR, fL, fR)


@njit(cache=True, error_model="numpy")
def max_rate(U, axis, model, prm):
    """max over cells of (speed bound) along ``axis``."""
    nc, nx, ny, nz = U.shape
    u = np.empty(nc)
    best = 0.0
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                for c in range(nc):
                    u[c] = U[c, i, j, k]
                s = _speed_pt(model, u, axis, prm)
                if s > best:
                    best = s
    return best


@njit(cache=True, error_model="numpy")
def _cdiff(a, axis, dx, out):
    nx, ny, nz = a.shape
    inv = 0.5 / dx
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                if axis == 0:
                    out[i, j, k] = (a[_up(i, nx), j, k] - a[_down(i, nx), j, k]) * inv
                elif axis == 1:
                    out[i, j, k] = (a[i, _up(j, ny), k] - a[i, _down(j, ny), k]) * inv
                else:
                    out[i, j, k] = (a[i, j, _up(k, nz)] - a[i, j, _down(k, nz)]) * inv


@njit(cache=True, error_model="numpy")
def _viscous_1d(U, dx, nu, kappa, out):
    # 1D stress: (4/3 nu + kappa) dv_x/dx on x, nu dv_y/dx and nu dv_z/dx
    n = U.shape[1]
    inv = 0.5 / dx
    s = np.empty((3, n))
    for i in range(n):
        im = i - 1 if i > 0 else n - 1
        ip = i + 1 if i + 1 < n else 0
        rp = 1.0 / U[0, ip]
        rm = 1.0 / U[0, im]
        s[0, i] = (FOUR_THIRDS * nu + kappa) * (U[1, ip] * rp - U[1, im] * rm) * inv
        s[1, i] = nu * (U[2, ip] * rp - U[2, im] * rm) * inv
        s[2, i] = nu * (U[3, ip] * rp - U[3, im] * rm) * inv
    for i in range(n):
        im = i - 1 if i > 0 else n - 1
        ip = i + 1 if i + 1 < n else 0
        for c in range(3):
            out[1 + c, i] += (s[c, ip] - s[c, im]) * inv


@njit(cache=True, error_model="numpy")
def viscous_tendency(U, dx, dim, nu, kappa, out):
    """Add div(nu dev-sym(grad v) + kappa div v I) to the momentum of ``out``.

    Gradients and the outer divergence use the same central stencil.
    """
    nc, nx, ny, nz = U.shape
    if dim == 1 and ny == 1 and nz == 1:
        _viscous_1d(U[:, :, 0, 0], dx[0], nu, kappa, out[:, :, 0, 0])
        return
    v = np.empty((3, nx, ny, nz))
    for c in range(3):
        v[c] = U[1 + c] / U[0]
    grad = np.zeros((3, 3, nx, ny, nz))
    for c in range(3):
        for j in range(dim):
            _cdiff(v[c], j, dx[j], grad[c, j])
    div = grad[0, 0] + grad[1, 1] + grad[2, 2]
    tmp = np.empty((nx, ny, nz))
    col = np.empty((nx, ny, nz))
    for j in range(dim):
        for i in range(3):
            # stress column: nu (g_ij + g_ji - 2/3 div delta_ij) + kappa div delta_ij
            for a in range(nx):
                for b in range(ny):
                    for d in range(nz):
                        s = nu * (grad[i, j, a, b, d] + grad[j, i, a, b, d])
                        if i == j:
                            s += (kappa - TWO_THIRDS * nu) * div[a, b, d]
                        col[a, b, d] = s
            _cdiff(col, j, dx[j], tmp)
            out[1 + i] += tmp


def as3d(U):
    """View a component-first array of any spatial dimension as 4D."""
    extra = 4 - U.ndim
    return U.reshape(U.shape + (1,) * extra)
