"""
CGLMP for qudits
================

Visibility thresholds of the two-setting CGLMP expression on isotropic
states, from Fourier-type settings and from seesaw refinement.
"""

from bellnet.bell import cglmp, cglmp_threshold

for d in (2, 3, 4, 5):
    fourier, refined = cglmp_threshold(d, restarts=3)
    print("d=%d  local bound %.1f  p* Fourier %.5f  seesaw %.5f" % (d, cglmp(d).bound, fourier, refined))

# the thresholds keep falling slowly towards the large-d value near 0.67
