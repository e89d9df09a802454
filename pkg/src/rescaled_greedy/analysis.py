"""Convergence bounds, trace verification, smoothness moduli and rate fits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .algorithms import step_lambda
from .core import RunConfig, RunTrace
from .dictionaries import l1_seminorm_upper_bound
from .objectives import _unit_rows, curvature_direction, sample_level_set

__all__ = [
    "BoundInputs",
    "ExactConvergence",
    "bound_inputs_for",
    "recurrence_bound",
    "theoretical_bound_rpga",
    "theoretical_bound_wrpga",
    "descent_decrement",
    "TraceReport",
    "verify_trace",
    "modulus_estimate",
    "uniform_modulus_estimate",
    "fit_power_law",
    "fit_rate",
]

SequenceLike = Union[float, Sequence[float]]


def _seq(values: SequenceLike) -> tuple:
    if np.isscalar(values):
        return (float(values),)
    return tuple(float(v) for v in values)


def _cycled(seq: tuple, j: int) -> float:
    """Entry for 1-based step j of a cycled sequence."""
    return seq[(j - 1) % len(seq)]


@dataclass(frozen=True)
class BoundInputs:
    alpha: float
    q: float
    mu: SequenceLike
    weakness: SequenceLike
    xbar_l1: float
    initial_gap: float

    def __post_init__(self):
        object.__setattr__(self, "mu", _seq(self.mu))
        object.__setattr__(self, "weakness", _seq(self.weakness))
        if not 1.0 < self.q <= 2.0:
            raise ValueError("q must lie in (1, 2]")
        if min(self.alpha, self.xbar_l1, self.initial_gap) <= 0:
            raise ValueError("alpha, xbar_l1 and initial_gap must be positive")
        if any(m <= 1.0 for m in self.mu):
            raise ValueError("every mu must exceed 1")
        if any(not 0.0 < w <= 1.0 for w in self.weakness):
            raise ValueError("weakness values must lie in (0, 1]")


def bound_inputs_for(obj, d, cfg: RunConfig) -> Optional[BoundInputs]:
    """Bound inputs from an objective's known minimizer, or None if unknown or
    degenerate (minimizer at the origin)."""
    info = obj.minimum_info()
    if info is None:
        return None
    xbar, e_min = info
    gap = obj.value(np.zeros(obj.dim)) - e_min
    l1 = l1_seminorm_upper_bound(d, xbar)
    if gap <= 0 or l1 <= 0:
        return None
    weakness = (1.0,) if cfg.variant == "rescaled" else cfg.weakness_sequence
    return BoundInputs(cfg.alpha, cfg.q, cfg.mu_sequence, weakness, l1, gap)


def recurrence_bound(B: float, r: float, ell: float, r_seq: SequenceLike, m: int) -> float:
    """``max(1, ell**(-1/ell)) * r**(1/ell) * (r * B**(-ell) + sum_{k=2}^m r_k)**(-1/ell)``.

    Any nonnegative sequence with ``a_1 <= B`` and
    ``a_{k+1} <= a_k * (1 - r_{k+1} / r * a_k**ell)`` stays below this value.
    `r_seq` lists r_2, r_3, ... and is cycled when shorter than needed.
    """
    if m < 2:
        raise ValueError("the bound is defined for m >= 2")
    if min(B, r, ell) <= 0:
        raise ValueError("B, r and ell must be positive")
    rs = _seq(r_seq)
    if any(v < 0 for v in rs):
        raise ValueError("r_k must be nonnegative")
    total = sum(rs[(k - 2) % len(rs)] for k in range(2, m + 1))
    lead = max(1.0, ell ** (-1.0 / ell))
    return lead * r ** (1.0 / ell) * (r * B ** (-ell) + total) ** (-1.0 / ell)


def theoretical_bound_rpga(inputs: BoundInputs, k: int) -> float:
    """Error bound after k >= 2 steps of the rescaled algorithm with constant mu:
    ``a*mu*X**q * ((a*mu*X**q / gap)**(1/(q-1)) + (mu-1)/mu * (k-1))**(1-q)``
    with ``X = ||xbar||_1``."""
    if k < 2:
        raise ValueError("the bound is defined for k >= 2")
    if len(set(inputs.mu)) != 1:
        raise ValueError("the rescaled bound needs a constant mu")
    q, mu = inputs.q, inputs.mu[0]
    lead = inputs.alpha * mu * inputs.xbar_l1**q
    c1 = (lead / inputs.initial_gap) ** (1.0 / (q - 1.0))
    return lead * (c1 + (mu - 1.0) / mu * (k - 1)) ** (1.0 - q)


def theoretical_bound_wrpga(inputs: BoundInputs, k: int) -> float:
    """Error bound after k >= 2 steps of the weak variant:
    ``a*X**q * (C1 + sum_{j=2}^k (mu_j - 1) * (l_j / mu_j)**(q/(q-1)))**(1-q)``
    with ``C1 = (a*X**q / gap)**(1/(q-1))``."""
    if k < 2:
        raise ValueError("the bound is defined for k >= 2")
    q = inputs.q
    lead = inputs.alpha * inputs.xbar_l1**q
    c1 = (lead / inputs.initial_gap) ** (1.0 / (q - 1.0))
    p = q / (q - 1.0)
    total = 0.0
    for j in range(2, k + 1):
        mu_j = _cycled(inputs.mu, j)
        total += (mu_j - 1.0) * (_cycled(inputs.weakness, j) / mu_j) ** p
    return lead * (c1 + total) ** (1.0 - q)


def descent_decrement(inner: float, alpha: float, mu: float, q: float) -> float:
    """Guaranteed one-step decrease ``(mu-1)/mu * (a*mu)**(-1/(q-1)) * |inner|**(q/(q-1))``."""
    return (mu - 1.0) / mu * (alpha * mu) ** (-1.0 / (q - 1.0)) * abs(inner) ** (q / (q - 1.0))


class ExactConvergence(ValueError):
    """The error reached zero (or the run stopped) inside the fitting window."""


@dataclass
class TraceReport:
    variant: str
    monotone: list = field(default_factory=list)
    descent: list = field(default_factory=list)
    within_bound: list = field(default_factory=list)
    lower_bound: list = field(default_factory=list)
    admissible: list = field(default_factory=list)
    certificate: list = field(default_factory=list)
    bounds: list = field(default_factory=list)

    CHECKS = ("monotone", "descent", "within_bound", "lower_bound", "admissible", "certificate")

    def check_passed(self, name: str) -> bool:
        return all(v for v in getattr(self, name) if v is not None)

    @property
    def passed(self) -> bool:
        return all(self.check_passed(c) for c in self.CHECKS)

    def failures(self) -> dict:
        """Check name -> list of failing step indices k."""
        out = {}
        for name in self.CHECKS:
            bad = [k + 1 for k, v in enumerate(getattr(self, name)) if v is False]
            if bad:
                out[name] = bad
        return out

    def summary(self) -> dict:
        return {
            "variant": self.variant,
            "passed": self.passed,
            "checks": {c: self.check_passed(c) for c in self.CHECKS},
            "failures": self.failures(),
        }


def verify_trace(trace: RunTrace, inputs: Optional[BoundInputs], cfg: RunConfig,
                 e_min: Optional[float], rel_slack: float = 1e-9,
                 certificate_tol: float = 1e-8) -> TraceReport:
    """Check every recorded step of `trace` against the convergence argument.

    Per step k: objective monotone; the recorded lambda follows the step rule
    and the one-step descent inequality holds; e_k is below the convergence bound
    (k >= 2, rescaled and weak variants only); ``l_k * (e_{k-1} - c_{k-1}) <=
    |inner_k| * ||xbar||_1`` where c is the recorded line-search certificate;
    the chosen atom was admissible; the certificate is within tolerance
    (rescaled variants only). Checks needing e_min or inputs are None when
    those are unknown.
    """
    rep = TraceReport(cfg.variant)
    rescaled = cfg.variant != "no_rescale_baseline"
    prev_value = trace.initial_value
    prev_cert = 0.0
    for rec in trace.records:
        k = rec.k
        slack = rel_slack * max(1.0, abs(prev_value))
        rep.monotone.append(rec.objective_value <= prev_value + slack)

        lam = step_lambda(rec.inner_product, cfg.alpha, rec.mu, cfg.q)
        rule_ok = abs(rec.lambda_k - lam) <= 1e-12 * abs(lam)
        dec = descent_decrement(rec.inner_product, cfg.alpha, rec.mu, cfg.q)
        rep.descent.append(bool(rule_ok and rec.objective_value <= prev_value - dec + slack))

        rep.admissible.append(abs(rec.inner_product) >= rec.weakness * rec.sup_inner)
        rep.certificate.append(rec.certificate_holds(certificate_tol) if rescaled else None)

        bound = None
        if inputs is not None and e_min is not None and k >= 2 and rescaled:
            if cfg.variant == "rescaled":
                bound = theoretical_bound_rpga(inputs, k)
            else:
                bound = theoretical_bound_wrpga(inputs, k)
        rep.bounds.append(bound)
        if bound is None or rec.error is None:
            rep.within_bound.append(None)
        else:
            rep.within_bound.append(rec.error <= bound * (1.0 + rel_slack))

        if inputs is not None and e_min is not None:
            e_prev = prev_value - e_min
            lhs = rec.weakness * (e_prev - prev_cert)
            rhs = abs(rec.inner_product) * inputs.xbar_l1
            rep.lower_bound.append(lhs <= rhs + slack)
        else:
            rep.lower_bound.append(None)

        prev_value = rec.objective_value
        prev_cert = rec.certificate
    return rep


# smoothness moduli ---------------------------------------------------------

_LAMBDA_GUARD = 1e-3


def _modulus_samples(obj, samples: int, seed: int):
    """Base points in the level set, unit directions and lambdas, followed by
    top-curvature probes at the first few base points. Every stream depends
    only on (seed, index), so a larger `samples` extends a smaller one."""
    ss = np.random.SeedSequence(seed)
    rng_x, rng_y, rng_lam, rng_probe = (np.random.default_rng(s) for s in ss.spawn(4))
    x, _, _ = sample_level_set(obj, samples, rng_x)
    y = _unit_rows(rng_y, samples, obj.dim)
    lam = rng_lam.uniform(_LAMBDA_GUARD, 1.0 - _LAMBDA_GUARD, samples)
    n_probe = min(4, samples)
    probes = np.array([curvature_direction(obj, x[i], rng_probe) for i in range(n_probe)])
    if n_probe:
        x = np.vstack([x, x[:n_probe]])
        y = np.vstack([y, probes])
        lam = np.concatenate([lam, np.full(n_probe, 0.5)])
    return x, y, lam


def modulus_estimate(obj, u: float, samples: int, seed: int) -> float:
    """Sampled lower estimate of ``rho(E, u) = 1/2 sup (E(x+uy) + E(x-uy) - 2E(x))``
    over x in the level set and unit y."""
    if not u > 0:
        raise ValueError("u must be positive")
    x, y, _ = _modulus_samples(obj, samples, seed)
    second = obj.values(x + u * y) + obj.values(x - u * y) - 2.0 * obj.values(x)
    return float(max(0.0, 0.5 * second.max()))


def uniform_modulus_estimate(obj, u: float, samples: int, seed: int) -> float:
    """Sampled lower estimate of the three-point modulus
    ``sup ((1-l) E(x - l u y) + l E(x + (1-l) u y) - E(x)) / (l (1-l))``
    with l drawn from [1e-3, 1 - 1e-3]."""
    if not u > 0:
        raise ValueError("u must be positive")
    x, y, lam = _modulus_samples(obj, samples, seed)
    lc = lam[:, None]
    num = ((1.0 - lam) * obj.values(x - lc * u * y) + lam * obj.values(x + (1.0 - lc) * u * y)
           - obj.values(x))
    return float(max(0.0, (num / (lam * (1.0 - lam))).max()))


# rate fitting --------------------------------------------------------------


def fit_power_law(ks, errors) -> float:
    """Least-squares slope of log(error) against log(k)."""
    ks = np.asarray(ks, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if ks.size < 2:
        raise ValueError("need at least two points")
    if np.any(errors <= 0):
        raise ExactConvergence("nonpositive error: exact convergence before k_max")
    slope, _ = np.polyfit(np.log(ks), np.log(errors), 1)
    return float(slope)


def fit_rate(trace: RunTrace, k_min: int, k_max: int) -> float:
    """Fitted exponent of e_k ~ C k**s over ``k_min <= k <= k_max``."""
    if k_min < 2 or k_max <= k_min:
        raise ValueError("need 2 <= k_min < k_max")
    if len(trace) < k_max:
        if trace.termination == "gradient_zero":
            raise ExactConvergence(f"run converged at step {len(trace)}, before k_max={k_max}")
        raise ValueError(f"trace has {len(trace)} steps, fewer than k_max={k_max}")
    ks = np.arange(k_min, k_max + 1)
    errs = [trace.error_at(int(k)) for k in ks]
    if any(e is None for e in errs):
        raise ValueError("trace errors are unknown (E(xbar) not supplied)")
    return fit_power_law(ks, errs)
