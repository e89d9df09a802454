"""Rescaled pure greedy iterations for convex minimization over a dictionary.

Each step picks an atom by its inner product with the current gradient,
takes the step ``x_hat = x - lambda * phi`` and then rescales the result by
an exact line search along ``span{x_hat}``. The baseline variant skips the
rescaling and keeps ``x_hat``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import IterationRecord, RunConfig, RunTrace
from .linesearch import LineSearchError, minimize_ray

__all__ = [
    "DegenerateSelectionError",
    "argmax_selector",
    "first_admissible_selector",
    "select_direction",
    "step_lambda",
    "AlgorithmState",
    "initial_state",
    "rpga_step",
    "run",
]


class DegenerateSelectionError(RuntimeError):
    """No atom has a nonzero inner product with a nonzero gradient."""


Selector = Callable[[np.ndarray, float], int]


def argmax_selector(inner: np.ndarray, weakness: float) -> int:
    """Exact maximizer of ``|inner|``; np.argmax keeps the lowest index on ties."""
    return int(np.argmax(np.abs(inner)))


def first_admissible_selector(inner: np.ndarray, weakness: float) -> int:
    """Lowest index whose ``|inner|`` reaches ``weakness`` times the maximum."""
    mag = np.abs(inner)
    return int(np.flatnonzero(mag >= weakness * mag.max())[0])


def select_direction(grad, d, weakness: float = 1.0, selector: Selector = argmax_selector):
    """Pick an atom for gradient `grad`.

    Returns ``(index, inner, sup)`` where `inner` is the signed inner product
    of the chosen atom and `sup` the largest absolute inner product.
    """
    if not 0.0 < weakness <= 1.0:
        raise ValueError(f"weakness {weakness} outside (0, 1]")
    inner = d.inner_products(grad)
    sup = float(np.max(np.abs(inner)))
    if sup == 0.0:
        if np.any(np.asarray(grad)):
            raise DegenerateSelectionError("gradient is orthogonal to every atom")
        raise DegenerateSelectionError("gradient is zero")
    j = selector(inner, weakness)
    if abs(inner[j]) < weakness * sup:
        raise ValueError(f"selector returned inadmissible atom {j}")
    return j, float(inner[j]), sup


def step_lambda(inner: float, alpha: float, mu: float, q: float) -> float:
    """``sgn(inner) * (alpha*mu)**(-1/(q-1)) * |inner|**(1/(q-1))``."""
    if inner == 0.0:
        raise ValueError("inner product must be nonzero")
    if not alpha > 0 or not 1.0 < q <= 2.0:
        raise ValueError("need alpha > 0 and q in (1, 2]")
    p = 1.0 / (q - 1.0)
    if q == 2.0:
        return inner / (alpha * mu)
    return math.copysign((abs(inner) / (alpha * mu)) ** p, inner)


@dataclass
class AlgorithmState:
    k: int
    x_current: np.ndarray
    grad_current: np.ndarray
    value_current: float
    trace: RunTrace = field(default_factory=RunTrace)


def initial_state(obj) -> AlgorithmState:
    x0 = np.zeros(obj.dim)
    x0.flags.writeable = False
    e0 = obj.value(x0)
    return AlgorithmState(0, x0, obj.gradient(x0), e0, RunTrace(initial_value=e0, final_point=x0))


def _error(value: float, e_min: Optional[float]) -> Optional[float]:
    return None if e_min is None else value - e_min


def rpga_step(state: AlgorithmState, obj, d, cfg: RunConfig,
              selector: Selector = argmax_selector, e_min: Optional[float] = None) -> AlgorithmState:
    """Advance `state` by one greedy step and append its record to the trace."""
    k = state.k + 1
    mu = cfg.mu_at(k)
    weakness = cfg.weakness_at(k)
    j, inner, sup = select_direction(state.grad_current, d, weakness, selector)
    lam = step_lambda(inner, cfg.alpha, mu, cfg.q)
    x_hat = state.x_current - lam * d[j]
    if cfg.variant == "no_rescale_baseline":
        t = 1.0
        x_new = x_hat
    else:
        ls = minimize_ray(obj, x_hat, tol=cfg.linesearch_tolerance)
        t = ls.t_star
        x_new = t * x_hat
    x_new.flags.writeable = False
    value, g_new = obj.value_and_gradient(x_new)
    rec = IterationRecord(
        k=k,
        atom_index=j,
        inner_product=inner,
        lambda_k=lam,
        t_k=t,
        objective_value=value,
        error=_error(value, e_min),
        sup_inner=sup,
        mu=mu,
        weakness=weakness,
        certificate=abs(float(g_new @ x_new)),
        point_norm=float(np.linalg.norm(x_new)),
        gradient_norm=float(np.linalg.norm(g_new)),
    )
    state.trace.records.append(rec)
    state.trace.final_point = x_new
    return AlgorithmState(k, x_new, g_new, value, state.trace)


def _gradient_vanished(state: AlgorithmState, d, tol: float) -> bool:
    return float(np.max(np.abs(d.inner_products(state.grad_current)))) <= tol


def _invisible_gradient(grad: np.ndarray, d, tol: float) -> bool:
    """True when a non-negligible gradient lies mostly outside span(atoms)."""
    gnorm = float(np.linalg.norm(grad))
    if gnorm <= tol:
        return False
    coef, *_ = np.linalg.lstsq(d.atoms.T, grad, rcond=None)
    return float(np.linalg.norm(grad - d.atoms.T @ coef)) > 0.5 * gnorm


def run(obj, d, cfg: RunConfig, selector: Selector = argmax_selector,
        e_min: Optional[float] = None) -> RunTrace:
    """Iterate from x0 = 0 until the largest atom inner product drops below the
    gradient tolerance, the iteration cap is hit, or a step fails.

    `e_min` is E(xbar); when omitted it is taken from ``obj.minimum_info()``
    if available, and errors are recorded as None otherwise. Failures do not
    raise: the partial trace is returned with the failure as its termination.
    """
    if d.dim != obj.dim:
        raise ValueError(f"dictionary dim {d.dim} does not match objective dim {obj.dim}")
    cfg.validate()
    if e_min is None:
        info = obj.minimum_info()
        e_min = None if info is None else info[1]
    state = initial_state(obj)
    tol = cfg.resolved_gradient_tolerance()
    while True:
        if _gradient_vanished(state, d, tol):
            if _invisible_gradient(state.grad_current, d, tol):
                state.trace.termination = "degenerate_selection"
                state.trace.message = "gradient is orthogonal to every atom"
            else:
                state.trace.termination = "gradient_zero"
            break
        if state.k >= cfg.max_iterations:
            state.trace.termination = "max_iterations"
            break
        try:
            state = rpga_step(state, obj, d, cfg, selector, e_min)
        except DegenerateSelectionError as exc:
            state.trace.termination = "degenerate_selection"
            state.trace.message = str(exc)
            break
        except LineSearchError as exc:
            state.trace.termination = "linesearch_failure"
            state.trace.message = str(exc)
            break
    return state.trace
