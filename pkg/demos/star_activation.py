"""
Star network activation
=======================

A centre shares noisy Bell pairs with N leaves and projects its halves
onto GHZ. The leaves end up with GHZ plus white noise, whose full-body
correlations shrink like p**N.
"""

import numpy as np

from bellnet.bell import mermin, seesaw
from bellnet.protocols import plane_threshold, star_conditional, star_seesaw_threshold, star_threshold
from bellnet.states import ghz_ket
from bellnet.tensor import fidelity_pure

for N in (2, 3, 4):
    res = star_conditional(0.9, N)
    print("N=%d: success %.4f, GHZ fidelity of the leaves %.4f"
          % (N, res.success_prob, fidelity_pure(res.conditional, ghz_ket(N))))

# Mermin on the post-selected state
res = star_conditional(0.85, 3)
f = mermin(3)
print("\nMermin(3) at p=0.85: %.4f (bound %.1f, 4 p^3 = %.4f)"
      % (seesaw(res.conditional, f.scenario, f, restarts=5).value, f.bound, 4 * 0.85**3))

print("\nthreshold formula p_N = (2/pi) 2^(1/N):")
for N in (2, 3, 7, 21, 100):
    print("  N=%3d  %.5f" % (N, star_threshold(N)))

print("\nseesaw thresholds: N=2 (CHSH) %.5f, N=3 (Mermin) %.5f"
      % (star_seesaw_threshold(2, restarts=5), star_seesaw_threshold(3, restarts=5)))
for K in (2, 4, 8):
    print("equatorial functional, K=%d settings: %.5f" % (K, plane_threshold(2, K)))
print("continuous-settings value for N=2: %.5f" % star_threshold(2))
