"""Exact minimization of E along the line through the origin and a point."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["LineSearchError", "LineSearchResult", "minimize_ray"]


class LineSearchError(RuntimeError):
    pass


@dataclass(frozen=True)
class LineSearchResult:
    t_star: float
    value_at_t: float
    derivative_at_t: float
    evaluations: int
    certificate: float


def minimize_ray(obj, direction, tol: float = 1e-10, max_doublings: int = 60,
                 max_bisections: int = 200) -> LineSearchResult:
    """Minimize ``g(t) = E(t * direction)`` over all real t.

    g is convex, so g' is monotone. A sign change of g' is bracketed by
    doubling outward from [0, 1] (in whichever direction g' points), then
    the bracket is bisected on the sign of g'. Bisection stops once
    ``s |g'(t)| <= tol * (1 + s ||direction|| ||E'(x)||)`` with
    ``s = max(|t|, 1)`` and ``x = t * direction`` (for |t| >= 1 this is the
    certificate ``|<E'(x), x>| <= tol * (1 + ||x|| ||E'(x)||)``), or the
    bracket cannot shrink further.
    The returned point is never worse than t = 1 or t = 0 beyond roundoff.
    """
    d = np.asarray(direction, dtype=float)
    dnorm = math.sqrt(float(d @ d))
    if dnorm == 0.0:
        raise LineSearchError("zero direction")
    evals = 0

    def probe(t):
        nonlocal evals
        evals += 1
        val, g = obj.value_and_gradient(t * d)
        deriv = float(g @ d)
        if not (math.isfinite(val) and math.isfinite(deriv)):
            raise LineSearchError(f"non-finite objective or derivative at t={t}")
        cert = abs(t * deriv)
        # max(|t|, 1) keeps t = 0 from passing on the vacuous <E'(0), 0> = 0
        s = max(abs(t), 1.0)
        ok = s * abs(deriv) <= tol * (1.0 + s * dnorm * math.sqrt(float(g @ g)))
        return val, deriv, cert, ok

    cache = {}

    def at(t):
        if t not in cache:
            cache[t] = probe(t)
        return cache[t]

    lo, hi = 0.0, 1.0
    d_lo, d_hi = at(lo)[1], at(hi)[1]
    if d_lo > 0.0:
        # minimum lies at negative t
        hi, step = lo, 1.0
        lo = -step
        for _ in range(max_doublings):
            if at(lo)[1] <= 0.0:
                break
            hi, step = lo, 2.0 * step
            lo = -step
        else:
            raise LineSearchError("objective decreases without bound along the line")
    elif d_hi < 0.0:
        step = 1.0
        for _ in range(max_doublings):
            lo, step = hi, 2.0 * step
            hi = step
            if at(hi)[1] >= 0.0:
                break
        else:
            raise LineSearchError("objective decreases without bound along the line")

    # invariant: g'(lo) <= 0 <= g'(hi)
    best = None
    for t in (lo, hi):
        if at(t)[3]:
            best = t
            break
    n_bisect = 0
    while best is None and n_bisect < max_bisections:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        n_bisect += 1
        _, deriv, _, ok = at(mid)
        if ok or deriv == 0.0:
            best = mid
        elif deriv < 0.0:
            lo = mid
        else:
            hi = mid
    if best is None:
        best = min((lo, hi), key=lambda t: abs(at(t)[1]))

    # Never worse than the un-rescaled point or the origin. A certified best is
    # within |g'(best)| * |t - best| of any t, so only a certified fallback may
    # displace it; otherwise the comparison is roundoff.
    for fallback in (1.0, 0.0):
        if at(fallback)[0] < at(best)[0] and (at(fallback)[3] or not at(best)[3]):
            best = fallback
    val, deriv, cert, _ = at(best)
    return LineSearchResult(float(best), val, deriv, evals, cert)
