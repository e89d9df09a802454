"""Empirical smoothness constants for a quadratic and a logistic loss.

For E(x) = ||Ax - b||^2 every second difference is exactly u^2 ||Ay||^2,
so both moduli equal u^2 ||A||^2 and the sampled estimates should match
that once the top singular direction is probed. The logistic loss is only
bounded above by ||X||^2 / 8, and the estimates show how loose that is.
"""

import numpy as np

from rescaled_greedy import analysis
from rescaled_greedy.objectives import estimate_alpha, estimate_m_zero, random_logistic, random_quadratic

quad = random_quadratic(6, 10, seed=1)
logi = random_logistic(5, 40, seed=1)

top = np.linalg.norm(quad.design, 2) ** 2
print(f"quadratic: ||A||^2 = {top:.4f}, alpha estimate = {estimate_alpha(quad, 2.0, 10_000, 1.0, 0):.4f}")
print(f"           M0 declared = {quad.constants.m_zero:.3f}, sampled = {estimate_m_zero(quad, 5000, 0):.3f}")
for u in (1e-2, 1e-1, 1.0):
    rho = analysis.modulus_estimate(quad, u, 10_000, 0)
    rho1 = analysis.uniform_modulus_estimate(quad, u, 10_000, 0)
    print(f"  u={u:<5} rho/u^2={rho / u**2:.4f}  rho1/u^2={rho1 / u**2:.4f}  "
          f"4 rho(u/2) <= rho1: {4 * analysis.modulus_estimate(quad, u / 2, 10_000, 0) <= rho1 * (1 + 1e-6)}")

print(f"\nlogistic: ||X||^2/8 = {logi.constants.alpha:.4f}, "
      f"alpha estimate = {estimate_alpha(logi, 2.0, 10_000, 1.0, 0):.4f}")
for u in (1e-1, 1.0, 10.0):
    print(f"  u={u:<5} rho/u^2={analysis.modulus_estimate(logi, u, 10_000, 0) / u**2:.4f}")
