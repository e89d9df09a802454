import sys

import numpy as np
import pytest

from rescaled_greedy import objectives


def acceptance_instance(seed: int):
    """Seeded quadratic shared by the bound, descent and determinism tests."""
    n = 5 + (3 * seed) % 16
    return objectives.random_quadratic(n, n + 5, seed)


def simulate_recurrence(a1, r, ell, r_seq, m):
    """a_1, ..., a_m with a_{k+1} = a_k (1 - r_{k+1} / r * a_k**ell), taken with equality."""
    a = [a1]
    for k in range(2, m + 1):
        rk = r_seq[(k - 2) % len(r_seq)]
        a.append(a[-1] * (1.0 - rk / r * a[-1] ** ell))
    return np.array(a)


def draw_recurrence(rng):
    """One admissible (a1, B, r, ell, r_seq): r_k <= r / B**ell keeps a_k >= 0."""
    B = rng.uniform(0.1, 10.0)
    r = rng.uniform(0.1, 10.0)
    ell = rng.uniform(0.2, 3.0)
    a1 = B * rng.uniform(0.0, 1.0)
    r_seq = list(rng.uniform(0.0, r / B**ell, size=rng.integers(1, 8)))
    return a1, B, r, ell, r_seq


@pytest.fixture
def identity_quadratic():
    return objectives.QuadraticObjective(np.eye(2), [1.0, 0.0])


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
