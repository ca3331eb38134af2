"""
Hashing bound of isotropic states
=================================

S(B) - S(AB) for the isotropic family, from the closed-form spectrum,
and the noise level where it turns positive for growing dimension.
"""

import math

from bellnet.distill import hashing_bound, hashing_threshold, isotropic_hashing
from bellnet.states import isotropic

# closed form and a materialized state agree
print("d=3, p=0.8: closed form %.12f, full state %.12f"
      % (isotropic_hashing(0.8, 3), hashing_bound(isotropic(0.8, 3), [1]).value))

print("\n      d     p*       p* - 1/2   1/(2 log2 d)")
for k in (1, 2, 4, 8, 10, 12, 16, 20):
    d = 2**k
    p = hashing_threshold(d)
    print("%7s  %.5f   %.5f    %.5f" % ("2^%d" % k, p, p - 0.5, 1 / (2 * math.log2(d))))

# the approach to 1/2 is logarithmic in d
