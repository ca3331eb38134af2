"""
The Lambda network
==================

Alice holds one half of a Bell pair with Bob and one with Charlie.
Entanglement swapping, post-selection lifting, and a search for
correlations outside the hybrid (bilocal no-signalling) polytope.
"""

import numpy as np

from bellnet.protocols import lambda_lift_demo, lambda_search, lambda_swap
from bellnet.states import isotropic, phi_ket
from bellnet.tensor import fidelity_pure

# swapping two isotropic links gives an isotropic link with visibility p^2
for p in (0.5, 0.8, 0.95):
    prob, out = lambda_swap(isotropic(p, 2), isotropic(p, 2))
    print("p=%.2f: prob %.3f, fidelity %.6f, isotropic(p^2) %.6f"
          % (p, prob, fidelity_pure(out, phi_ket(2)), fidelity_pure(isotropic(p * p, 2), phi_ket(2))))

# Alice's |Phi+> test as a post-selection, CHSH lifted to three parties
print()
for p in (1.0, 0.95, 0.9, 0.85, 0.84):
    out = lambda_lift_demo(p)
    print("p=%.2f: lifted CHSH %.6f  violated=%s" % (p, out["lifted_value"], out["violated"]))

# seesaw + LP search for a hybrid-polytope violation with 2 settings, 2 outcomes
res = lambda_search(seed=0, restarts=10, rounds=10)
print("\nSvetlichny seesaw on the two-singlet state: %.6f (hybrid bound 4)" % res.svetlichny_value)
print("smallest hybrid v* found: %.6f" % res.verdict.v_star)
print("v* per round:", np.round(res.history, 6))
