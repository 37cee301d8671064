"""Domain types shared by the solvers: parameters, packed stress tensors,
point states, periodic grids and field containers.

Field arrays are stored component-first.  A relaxation field has shape
``(10, n_1, ..., n_d)`` with the component order given by ``RELAX_COMPONENTS``;
a Navier-Stokes field has shape ``(4, n_1, ..., n_d)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

RELAX_COMPONENTS = ("rho", "mx", "my", "mz",
                    "tau1_xx", "tau1_yy", "tau1_xy", "tau1_xz", "tau1_yz",
                    "tau2")
NS_COMPONENTS = RELAX_COMPONENTS[:4]

RHO = 0
MOM = slice(1, 4)
TAU1 = slice(4, 9)
TAU2 = 9
N_RELAX = 10
N_NS = 4

# (row, col) of each packed component in the full 3x3 tensor
PACKED_INDEX = ((0, 0), (1, 1), (0, 1), (0, 2), (1, 2))


class StateViolation(Exception):
    """Raised when a state leaves the admissible set rho > floor."""

    def __init__(self, field, value, floor, cell=None, time=None):
        self.field = field
        self.value = value
        self.floor = floor
        self.cell = cell
        self.time = time
        where = f" at cell {cell}" if cell is not None else ""
        when = f" (t={time:.6g})" if time is not None else ""
        super().__init__(f"{field}={value:.6g} below floor {floor:g}{where}{when}")


@dataclass(frozen=True)
class PhysParams:
    nu: float = 1.0
    kappa: float = 1.0
    eps1: float = 0.1
    eps2: float = 0.1
    eos_A: float = 1.0
    eos_gamma: float = 2.0

    def __post_init__(self):
        for name in ("nu", "kappa", "eps1", "eps2", "eos_A"):
            val = getattr(self, name)
            if not (np.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be positive, got {val!r}")
        if not (np.isfinite(self.eos_gamma) and self.eos_gamma > 1):
            raise ValueError(f"eos_gamma must exceed 1, got {self.eos_gamma!r}")

    def with_eps(self, eps1, eps2=None):
        """Copy with new relaxation scales (``eps2`` defaults to ``eps1``)."""
        return PhysParams(self.nu, self.kappa, eps1,
                          eps1 if eps2 is None else eps2,
                          self.eos_A, self.eos_gamma)


@dataclass(frozen=True)
class SymTraceless3:
    """Symmetric traceless 3x3 tensor stored by its five free entries."""

    xx: float = 0.0
    yy: float = 0.0
    xy: float = 0.0
    xz: float = 0.0
    yz: float = 0.0

    @property
    def zz(self):
        return -self.xx - self.yy

    def pack(self):
        return np.array([self.xx, self.yy, self.xy, self.xz, self.yz])

    @classmethod
    def unpack(cls, v):
        v = np.asarray(v, dtype=float)
        if v.shape != (5,):
            raise ValueError(f"expected 5 packed components, got shape {v.shape}")
        return cls(*(float(c) for c in v))

    def to_matrix(self):
        return unpack_matrix(self.pack())

    @classmethod
    def from_matrix(cls, M):
        """Project an arbitrary 3x3 matrix onto the symmetric traceless part."""
        M = np.asarray(M, dtype=float)
        S = 0.5 * (M + M.T)
        S = S - np.trace(S) / 3.0 * np.eye(3)
        return cls.unpack(np.array([S[i, j] for i, j in PACKED_INDEX]))

    def frobenius_sq(self):
        return float(frobenius_sq(self.pack()))


def unpack_matrix(packed):
    """Full ``(3, 3, ...)`` tensor from packed ``(5, ...)`` components."""
    packed = np.asarray(packed)
    xx, yy, xy, xz, yz = packed
    zz = -xx - yy
    return np.array([[xx, xy, xz],
                     [xy, yy, yz],
                     [xz, yz, zz]])


def frobenius_sq(packed):
    """trace(T^T T) of the full tensor, evaluated on packed components."""
    xx, yy, xy, xz, yz = packed
    zz = -xx - yy
    return xx * xx + yy * yy + zz * zz + 2.0 * (xy * xy + xz * xz + yz * yz)


def tensor_matvec(packed, v):
    """(T v)_i for packed T of shape (5, ...) and v of shape (3, ...)."""
    xx, yy, xy, xz, yz = packed
    zz = -xx - yy
    return np.array([xx * v[0] + xy * v[1] + xz * v[2],
                     xy * v[0] + yy * v[1] + yz * v[2],
                     xz * v[0] + yz * v[1] + zz * v[2]])


def dev_sym_packed(grad):
    """Packed ``M + M^T - (2/3) tr(M) I`` for ``grad`` of shape (3, 3, ...)."""
    grad = np.asarray(grad, dtype=float)
    tr = grad[0, 0] + grad[1, 1] + grad[2, 2]
    return np.array([2.0 * grad[0, 0] - 2.0 / 3.0 * tr,
                     2.0 * grad[1, 1] - 2.0 / 3.0 * tr,
                     grad[0, 1] + grad[1, 0],
                     grad[0, 2] + grad[2, 0],
                     grad[1, 2] + grad[2, 1]])


def dev_sym(gradv):
    """Symmetric traceless part ``M + M^T - (2/3) tr(M) I`` of a velocity
    gradient, returned as a :class:`SymTraceless3`.

    >>> dev_sym(np.diag([1.0, 0.0, 0.0])).pack()
    array([ 1.33333333, -0.66666667,  0.        ,  0.        ,  0.        ])
    """
    gradv = np.asarray(gradv, dtype=float)
    if gradv.shape != (3, 3):
        raise ValueError(f"velocity gradient must be 3x3, got {gradv.shape}")
    return SymTraceless3.unpack(dev_sym_packed(gradv))


@dataclass(frozen=True)
class RelaxState:
    rho: float
    mom: np.ndarray = field(default_factory=lambda: np.zeros(3))
    tau1: SymTraceless3 = SymTraceless3()
    tau2: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "mom", np.asarray(self.mom, dtype=float).reshape(3))

    @property
    def velocity(self):
        return self.mom / self.rho

    def to_vector(self):
        return np.concatenate([[self.rho], self.mom, self.tau1.pack(), [self.tau2]])

    @classmethod
    def from_vector(cls, U):
        U = np.asarray(U, dtype=float)
        return cls(float(U[0]), U[1:4].copy(), SymTraceless3.unpack(U[4:9]), float(U[9]))

    @classmethod
    def from_primitive(cls, rho, v, tau1=None, tau2=0.0):
        tau1 = SymTraceless3() if tau1 is None else tau1
        return cls(rho, rho * np.asarray(v, dtype=float), tau1, tau2)


@dataclass(frozen=True)
class Violation:
    field: str
    value: float
    floor: float
    cell: Optional[tuple] = None

    def __str__(self):
        where = f" at cell {self.cell}" if self.cell is not None else ""
        return f"{self.field}={self.value:.6g} < {self.floor:g}{where}"


def validate_state(s: RelaxState, floor=1e-8):
    """Return ``None`` if ``s`` lies in the admissible set, else a Violation."""
    if not np.isfinite(s.rho) or s.rho < floor:
        return Violation("rho", float(s.rho), floor)
    vec = s.to_vector()
    if not np.all(np.isfinite(vec)):
        bad = RELAX_COMPONENTS[int(np.argmin(np.isfinite(vec)))]
        return Violation(bad, float("nan"), floor)
    return None


def check_field(U, floor=1e-8):
    """Field version of :func:`validate_state`; locates the worst cell."""
    rho = U[RHO]
    bad = ~np.isfinite(rho) | (rho < floor)
    if not bad.any():
        if not np.isfinite(U).all():
            comp, *cell = np.argwhere(~np.isfinite(U))[0]
            return Violation(RELAX_COMPONENTS[comp], float("nan"), floor, tuple(int(c) for c in cell))
        return None
    masked = np.where(np.isfinite(rho), rho, -np.inf)
    cell = np.unravel_index(int(np.argmin(masked)), rho.shape)
    return Violation("rho", float(rho[cell]), floor, tuple(int(c) for c in cell))


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on the unit torus ``[0, 1]^dim``."""

    cells: tuple

    def __post_init__(self):
        cells = tuple(int(n) for n in np.atleast_1d(self.cells))
        if not 1 <= len(cells) <= 3:
            raise ValueError(f"dim must be 1, 2 or 3, got {len(cells)}")
        if any(n < 4 for n in cells):
            raise ValueError(f"need at least 4 cells per axis, got {cells}")
        object.__setattr__(self, "cells", cells)

    @classmethod
    def uniform(cls, dim, n):
        return cls((n,) * dim)

    @property
    def dim(self):
        return len(self.cells)

    @property
    def shape(self):
        return self.cells

    @property
    def dx(self):
        return tuple(1.0 / n for n in self.cells)

    @property
    def cell_volume(self):
        return float(np.prod(self.dx))

    def centers(self):
        """Cell-center coordinates, one array of shape ``cells`` per axis."""
        axes = [(np.arange(n) + 0.5) / n for n in self.cells]
        return np.meshgrid(*axes, indexing="ij")

    def refine(self, factor=2):
        return Grid(tuple(n * factor for n in self.cells))


def _check_extent(arr, grid, ncomp, name):
    if arr.shape != (ncomp,) + grid.shape:
        raise ValueError(f"{name} has shape {arr.shape}, expected {(ncomp,) + grid.shape}")


@dataclass
class RelaxField:
    grid: Grid
    U: np.ndarray

    def __post_init__(self):
        self.U = np.asarray(self.U, dtype=float)
        _check_extent(self.U, self.grid, N_RELAX, "RelaxField")

    @classmethod
    def from_primitive(cls, grid, rho, v, tau1=None, tau2=None):
        shape = grid.shape
        U = np.zeros((N_RELAX,) + shape)
        U[RHO] = rho
        U[MOM] = np.asarray(v) * U[RHO]
        if tau1 is not None:
            U[TAU1] = tau1
        if tau2 is not None:
            U[TAU2] = tau2
        return cls(grid, U)

    @property
    def rho(self):
        return self.U[RHO]

    @property
    def mom(self):
        return self.U[MOM]

    @property
    def velocity(self):
        return self.U[MOM] / self.U[RHO]

    @property
    def tau1(self):
        return self.U[TAU1]

    @property
    def tau2(self):
        return self.U[TAU2]

    def state(self, cell):
        return RelaxState.from_vector(self.U[(slice(None),) + tuple(cell)])

    def copy(self):
        return RelaxField(self.grid, self.U.copy())


@dataclass
class NSField:
    """Navier-Stokes field (rho, m) with cached reconstructed stresses."""

    grid: Grid
    U: np.ndarray
    tau1_ce: Optional[np.ndarray] = None
    tau2_ce: Optional[np.ndarray] = None

    def __post_init__(self):
        self.U = np.asarray(self.U, dtype=float)
        _check_extent(self.U, self.grid, N_NS, "NSField")

    @classmethod
    def from_primitive(cls, grid, rho, v):
        U = np.zeros((N_NS,) + grid.shape)
        U[RHO] = rho
        U[MOM] = np.asarray(v) * U[RHO]
        return cls(grid, U)

    @property
    def rho(self):
        return self.U[RHO]

    @property
    def mom(self):
        return self.U[MOM]

    @property
    def velocity(self):
        return self.U[MOM] / self.U[RHO]

    def as_relax(self):
        """Pack (rho, m, tau1_ce, tau2_ce) into a relaxation-layout array."""
        if self.tau1_ce is None:
            raise ValueError("CE stresses not attached")
        U = np.zeros((N_RELAX,) + self.grid.shape)
        U[:N_NS] = self.U
        U[TAU1] = self.tau1_ce
        U[TAU2] = self.tau2_ce
        return RelaxField(self.grid, U)


def as_cells(cells: Sequence[int] | int, dim: int):
    if np.isscalar(cells):
        return (int(cells),) * dim
    cells = tuple(int(c) for c in cells)
    if len(cells) == 1:
        return cells * dim
    if len(cells) != dim:
        raise ValueError(f"cells {cells} do not match dim={dim}")
    return cells
