"""
Flagged many-copy activation
============================

With L flagged copies the parties fail to build the network only when
all flags agree. The resulting mixture is checked against the hybrid
polytope, and the star variant is certified through the coverage
probability of the flags.
"""

from bellnet.protocols import (
    coverage_monte_carlo,
    coverage_probability,
    lambda_behavior,
    sigma_activation,
    tau_activation,
)

target = lambda_behavior(seed=0)
act = sigma_activation(target, L_max=12)
print("target behaviour v* = %.6f" % act.target_verdict.v_star)
print(" L   p_eq       v*")
for step in act.steps:
    print("%2d  %.6f  %.6f" % (step.L, step.p_eq, step.verdict.v_star))
print("minimal nonlocal L:", act.minimal_L)

print("\ncoverage of N=3 flag values")
for L in (3, 5, 10, 20):
    est, err = coverage_monte_carlo(L, 3, samples=200_000, seed=L)
    print("L=%2d  exact %.5f  sampled %.5f +- %.5f" % (L, coverage_probability(L, 3), est, err))

t = tau_activation(3, 0.85, 10, restarts=5)
print("\nstar N=3, p=0.85, L=10: coverage %.4f x margin %.4f = %.4f"
      % (t.coverage, t.star_margin, t.certified_margin))
