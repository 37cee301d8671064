"""Relaxation-to-Navier-Stokes convergence on a periodic density wave.

Runs the Navier-Stokes reference once, then the relaxation system for a
decreasing sequence of relaxation scales, and fits err ~ K eps^q.

    python3 demos/convergence_sweep.py [cells]

512 cells take under a minute on one core; below about 512 cells the grid
error starts to compete with the eps^2 modelling error and q drifts low.
"""

import sys

import numpy as np

from maxwell_relax.core import Grid, NSField, PhysParams, RelaxField
from maxwell_relax.diagnostics import error_vs_reference, fit_rate
from maxwell_relax.ns_solver import NSConfig, ce_closure, ns_run
from maxwell_relax.relax_solver import SolverConfig, run

cells = int(sys.argv[1]) if len(sys.argv) > 1 else 512
base = PhysParams(nu=1.0, kappa=1.0, eos_A=1.0, eos_gamma=2.0)
g = Grid((cells,))
x = g.centers()[0]
rho = 1 + 0.1 * np.sin(2 * np.pi * x)
v = np.zeros((3, cells))

ref = ns_run(NSField(g, RelaxField.from_primitive(g, rho, v, *ce_closure(v, g, base)).U[:4]),
             NSConfig(reconstruction="muscl-linear"), base)
print(f"Navier-Stokes reference: {ref.nsteps} steps")

points = []
for eps in (0.1, 0.05, 0.025, 0.0125):
    p = base.with_eps(eps)
    # start on the Chapman-Enskog manifold so no initial layer forms
    init = RelaxField.from_primitive(g, rho, v, *ce_closure(v, g, p))
    tr = run(init, SolverConfig(reconstruction="muscl-linear"), p)
    err = error_vs_reference(tr, ref.with_params(p)).sup_error
    points.append((eps, err))
    print(f"eps={eps:<7} steps={tr.nsteps:<6} sup error={err:.4e}")

fit = fit_rate(points)
print(f"fitted rate q={fit.slope:.3f}, K={fit.constant:.3e}")
