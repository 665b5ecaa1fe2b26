"""Exact and adaptive-precision reals, continued fractions, n = 1 approximation."""

from .diophantine import (
    CFExpansion,
    Convergent,
    bad_constant_lower,
    cf_expand,
    convergents,
    dirichlet_approx,
    dirichlet_profile,
)
from .real import (
    DEFAULT_PRECISION_CAP,
    ExactReal,
    GrammarError,
    PrecisionCapError,
    as_real,
    get_precision_cap,
    parse_real,
    precision_cap,
)
from .search import DEFAULT_WORK_LIMIT, WorkLimitError, get_work_limit, work_limit

GOLDEN = ExactReal.surd(1, 1, 5, 2)
SQRT2 = ExactReal.surd(0, 1, 2)

__all__ = [
    "CFExpansion",
    "Convergent",
    "DEFAULT_PRECISION_CAP",
    "DEFAULT_WORK_LIMIT",
    "ExactReal",
    "GOLDEN",
    "GrammarError",
    "PrecisionCapError",
    "SQRT2",
    "WorkLimitError",
    "as_real",
    "bad_constant_lower",
    "cf_expand",
    "convergents",
    "dirichlet_approx",
    "dirichlet_profile",
    "get_precision_cap",
    "get_work_limit",
    "parse_real",
    "precision_cap",
    "work_limit",
]
