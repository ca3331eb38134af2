"""
CHSH and the local polytope
===========================

Noisy Bell pairs measured with the CHSH settings, checked two ways:
the CHSH value against its local bound, and LP membership in the
polytope of deterministic strategies.
"""

import numpy as np

from bellnet.behaviors import Scenario, behavior_from_quantum
from bellnet.bell import chsh, seesaw
from bellnet.measurements import chsh_assignment
from bellnet.polytope import deterministic_vertices, membership
from bellnet.states import isotropic, max_entangled

f = chsh()
local = deterministic_vertices(Scenario(2, 2, 2))
print("CHSH local bound:", f.bound, "over", len(local), "deterministic vertices")

# the textbook settings already reach the quantum maximum
best = seesaw(max_entangled(2), f.scenario, f, restarts=10)
print("seesaw optimum on |Phi+>: %.6f (2 sqrt2 = %.6f)" % (best.value, 2 * np.sqrt(2)))

ma = chsh_assignment()
print("\n   p    CHSH   v*     local?")
for p in np.arange(0.6, 0.81, 0.02):
    b = behavior_from_quantum(isotropic(p, 2), ma)
    v = membership(b, local)
    print("%.2f  %.4f  %.4f  %s" % (p, f(b), v.v_star, v.member))

# a non-member comes with a separating functional read off the LP dual
v = membership(behavior_from_quantum(max_entangled(2), ma), local)
print("\nv* for the pure state: %.6f" % v.v_star)
print("certificate bound %.4f, value %.4f" % (v.certificate.bound, v.certificate.value(behavior_from_quantum(max_entangled(2), ma))))
