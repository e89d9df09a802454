"""Vectors, run configuration and trace records shared across the package.

Vectors are plain 1-D float64 numpy arrays. Functions here never mutate
their inputs and hand back read-only arrays, so a vector stored in a trace
cannot be changed behind the caller's back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

__all__ = [
    "VARIANTS",
    "TERMINATIONS",
    "ConfigError",
    "as_vector",
    "dot",
    "axpy",
    "norm",
    "RunConfig",
    "IterationRecord",
    "RunTrace",
]

VARIANTS = ("rescaled", "weak_rescaled", "no_rescale_baseline")
TERMINATIONS = ("gradient_zero", "max_iterations", "degenerate_selection", "linesearch_failure")


class ConfigError(ValueError):
    """Raised when a run configuration violates its constraints."""


def as_vector(values) -> np.ndarray:
    """Return a read-only float64 copy of `values`, checking shape and finiteness."""
    v = np.array(values, dtype=float, copy=True)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"expected a non-empty 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    v.flags.writeable = False
    return v


def _check_same_dim(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")


def dot(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    _check_same_dim(a, b)
    return float(a @ b)


def axpy(s: float, a, b) -> np.ndarray:
    """Return ``s * a + b`` as a new read-only vector."""
    if not math.isfinite(s):
        raise ValueError("scale must be finite")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    _check_same_dim(a, b)
    out = s * a + b
    out.flags.writeable = False
    return out


def norm(a) -> float:
    return float(np.linalg.norm(np.asarray(a, dtype=float)))


Number = Union[int, float]


def _as_tuple(values: Union[Number, Sequence[Number]]) -> tuple:
    if np.isscalar(values):
        return (float(values),)
    out = tuple(float(v) for v in values)
    if not out:
        raise ConfigError("parameter sequences must be non-empty")
    return out


@dataclass(frozen=True)
class RunConfig:
    """Parameters of a single greedy run.

    ``mu_sequence`` and ``weakness_sequence`` accept a scalar or a sequence;
    shorter sequences are cycled over the run. ``m_zero=None`` means the
    gradient bound on the level set is unknown, ``us_radius=math.inf`` means
    the smoothness inequality holds globally.
    """

    q: float = 2.0
    alpha: float = 1.0
    mu_sequence: Union[Number, Sequence[Number]] = 2.0
    weakness_sequence: Union[Number, Sequence[Number]] = 1.0
    m_zero: Optional[float] = None
    us_radius: float = math.inf
    max_iterations: int = 200
    gradient_tolerance: Optional[float] = None
    linesearch_tolerance: float = 1e-10
    variant: str = "rescaled"

    def __post_init__(self):
        object.__setattr__(self, "mu_sequence", _as_tuple(self.mu_sequence))
        object.__setattr__(self, "weakness_sequence", _as_tuple(self.weakness_sequence))
        self.validate()

    def validate(self) -> None:
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if not 1.0 < self.q <= 2.0:
            raise ConfigError(f"q must lie in (1, 2], got {self.q}")
        if not self.alpha > 0:
            raise ConfigError(f"alpha must be positive, got {self.alpha}")
        if not self.us_radius > 0:
            raise ConfigError("us_radius must be positive")
        if self.m_zero is not None and self.m_zero < 0:
            raise ConfigError("m_zero must be nonnegative")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 0:
            raise ConfigError("max_iterations must be a nonnegative integer")
        if self.gradient_tolerance is not None and not self.gradient_tolerance > 0:
            raise ConfigError("gradient_tolerance must be positive")
        if not self.linesearch_tolerance > 0:
            raise ConfigError("linesearch_tolerance must be positive")
        floor = self.mu_floor
        for mu in self.mu_sequence:
            if not mu > floor:
                raise ConfigError(f"mu={mu} violates mu > {floor:g}")
        for ell in self.weakness_sequence:
            if not 0.0 < ell <= 1.0:
                raise ConfigError(f"weakness {ell} outside (0, 1]")
        if self.variant == "rescaled" and any(ell != 1.0 for ell in self.weakness_sequence):
            raise ConfigError("the rescaled variant requires weakness 1")
        if self.variant == "rescaled" and len(set(self.mu_sequence)) > 1:
            raise ConfigError("the rescaled variant uses a single constant mu")

    @property
    def mu_floor(self) -> float:
        """Lower limit for every mu: ``max(1, M0 * M**(1-q) / alpha)``."""
        if self.m_zero is None or math.isinf(self.us_radius):
            return 1.0
        return max(1.0, self.m_zero * self.us_radius ** (1.0 - self.q) / self.alpha)

    def mu_at(self, k: int) -> float:
        """mu for step ``k`` (1-based), cycling the sequence."""
        return self.mu_sequence[(k - 1) % len(self.mu_sequence)]

    def weakness_at(self, k: int) -> float:
        if self.variant == "rescaled":
            return 1.0
        return self.weakness_sequence[(k - 1) % len(self.weakness_sequence)]

    def resolved_gradient_tolerance(self) -> float:
        if self.gradient_tolerance is not None:
            return self.gradient_tolerance
        return 1e-10 * (1.0 + (self.m_zero or 0.0))


@dataclass(frozen=True)
class IterationRecord:
    """One completed step. ``error`` is E(x_k) - E(xbar), or None when unknown."""

    k: int
    atom_index: int
    inner_product: float
    lambda_k: float
    t_k: float
    objective_value: float
    error: Optional[float]
    sup_inner: float
    mu: float
    weakness: float
    certificate: float
    point_norm: float = 0.0
    gradient_norm: float = 0.0

    def certificate_holds(self, tol: float) -> bool:
        """``|<E'(x_k), x_k>| <= tol * (1 + ||x_k|| ||E'(x_k)||)``."""
        return self.certificate <= tol * (1.0 + self.point_norm * self.gradient_norm)


@dataclass
class RunTrace:
    records: list = field(default_factory=list)
    termination: Optional[str] = None
    final_point: Optional[np.ndarray] = None
    initial_value: Optional[float] = None
    message: str = ""

    def __len__(self):
        return len(self.records)

    def objective_values(self) -> np.ndarray:
        return np.array([r.objective_value for r in self.records])

    def errors(self) -> np.ndarray:
        """e_k for k = 1..len; NaN where unknown."""
        return np.array([np.nan if r.error is None else r.error for r in self.records])

    def error_at(self, k: int) -> Optional[float]:
        """e_k, holding the last value once the run has stopped on a zero gradient."""
        if k <= 0:
            raise ValueError("k must be positive")
        if k <= len(self.records):
            return self.records[k - 1].error
        if self.termination == "gradient_zero" and self.records:
            return self.records[-1].error
        return None
