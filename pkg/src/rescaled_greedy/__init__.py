"""Rescaled pure greedy algorithms for convex optimization over dictionaries."""

from .algorithms import (
    DegenerateSelectionError,
    argmax_selector,
    first_admissible_selector,
    rpga_step,
    run,
    select_direction,
    step_lambda,
)
from .core import ConfigError, IterationRecord, RunConfig, RunTrace, axpy, dot, norm
from .dictionaries import (
    Dictionary,
    canonical_basis,
    l1_seminorm_upper_bound,
    random_unit,
    union_of_bases,
)
from .linesearch import LineSearchError, LineSearchResult, minimize_ray
from .objectives import (
    LinearObjective,
    LogisticObjective,
    PowerObjective,
    QuadraticObjective,
    estimate_alpha,
    estimate_m_zero,
    finite_difference_check,
)

__version__ = "0.1.0"
