"""Symmetric-hyperbolic structure of the relaxation system at random states.

The entropy Hessian symmetrizes every flux Jacobian, and it is positive
definite.  Perturbing the coupling matrices breaks the symmetry, which the
check reports.
"""

import numpy as np

from maxwell_relax.core import PhysParams
from maxwell_relax.structure import check_structure, max_wavespeed, random_states

p = PhysParams().with_eps(0.05)
samples = random_states(100, np.random.default_rng(1))

rep = check_structure(samples, p, tol=1e-9)
print("intact system:", rep.summary())
print("largest characteristic speed at the first state:",
      f"{max_wavespeed(samples[0].to_vector(), p):.3f}")

bad = check_structure(samples, p, tol=1e-9, coupling_perturbation=np.full((4, 6), 0.1))
print("perturbed coupling:", bad.summary())
