"""A single greedy step on E(x) = (x - 1)^2, followed by hand.

The dictionary is {e1}, so the only choice is the step length and the
rescaling factor. With alpha = 1 and mu = 2 the step already lands on the
minimizer; doubling alpha halves the step, and the line search makes up
the difference by rescaling with t = 2.
"""

import numpy as np

from rescaled_greedy import RunConfig, canonical_basis, run
from rescaled_greedy.objectives import builtin_objective

obj = builtin_objective("quad1d")
d = canonical_basis(1)

print("E'(0) =", obj.gradient(np.zeros(1))[0])
for alpha in (1.0, 2.0, 4.0):
    tr = run(obj, d, RunConfig(alpha=alpha, mu_sequence=2.0))
    r = tr.records[0]
    x_hat = -r.lambda_k
    print(f"alpha={alpha}: lambda={r.lambda_k:+.3f}  x_hat={x_hat:.3f}  t={r.t_k:.3f}  "
          f"x_1={tr.final_point[0]:.3f}  E(x_1)={r.objective_value:.1e}  stop={tr.termination}")

# Without the rescaling the undershoot stays and the iteration has to keep going.
base = run(obj, d, RunConfig(alpha=4.0, mu_sequence=2.0, variant="no_rescale_baseline", max_iterations=10))
print("no rescale, alpha=4:", [f"{r.objective_value:.2e}" for r in base.records[:5]], "...")
