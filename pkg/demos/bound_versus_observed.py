"""Observed error against the guaranteed decay on a random least-squares problem.

Runs the rescaled algorithm and its weak variant (weakness 0.5, taking the
first atom that clears the threshold rather than the best one) and prints
e_k next to the bound at a few checkpoints. Then fits the log-log slope,
which the theory puts at -1 or steeper for q = 2.
"""

from rescaled_greedy import RunConfig, analysis, canonical_basis, first_admissible_selector, run
from rescaled_greedy.objectives import random_quadratic

obj = random_quadratic(12, 18, seed=4)
d = canonical_basis(obj.dim)
e_min = obj.minimum_info()[1]

strong = RunConfig(alpha=obj.constants.alpha, mu_sequence=2.0, max_iterations=300)
weak = RunConfig(alpha=obj.constants.alpha, mu_sequence=2.0, weakness_sequence=0.5,
                 variant="weak_rescaled", max_iterations=300)
tr_s = run(obj, d, strong, e_min=e_min)
tr_w = run(obj, d, weak, selector=first_admissible_selector, e_min=e_min)
in_s = analysis.bound_inputs_for(obj, d, strong)
in_w = analysis.bound_inputs_for(obj, d, weak)

print(f"||xbar||_1 = {in_s.xbar_l1:.3f}, E(0) - E(xbar) = {in_s.initial_gap:.3f}, alpha = {in_s.alpha:.3f}")
print(f"{'k':>5} {'e_k':>11} {'bound':>11} {'weak e_k':>11} {'weak bound':>11}")
for k in (2, 5, 10, 30, 100, 300):
    print(f"{k:5d} {tr_s.error_at(k):11.3e} {analysis.theoretical_bound_rpga(in_s, k):11.3e} "
          f"{tr_w.error_at(k):11.3e} {analysis.theoretical_bound_wrpga(in_w, k):11.3e}")

for name, tr, cfg, inputs in (("rescaled", tr_s, strong, in_s), ("weak", tr_w, weak, in_w)):
    rep = analysis.verify_trace(tr, inputs, cfg, e_min)
    print(f"{name}: all per-step checks pass = {rep.passed}; "
          f"slope over [30, 300] = {analysis.fit_rate(tr, 30, 300):.2f}")
