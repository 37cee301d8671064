"""Maxwell-type stress relaxation of compressible viscous flow and its
Navier-Stokes limit: solvers, structure checks and convergence diagnostics."""

__version__ = "0.1.0"
