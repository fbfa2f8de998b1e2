"""Generalized means, their limit theorems, and checks of both.

The public surface is re-exported here; see the submodules for details.
"""

from .errors import (
    DegenerateError,
    DomainError,
    GenMeansError,
    NumericalError,
    OversubscriptionError,
    SpecError,
)
from .means import (
    Bajraktarevic,
    ExpCauchy,
    Gini,
    Holder,
    LogCauchy,
    MultCauchy,
    QuasiArithmetic,
    Sample,
    bajraktarevic_mean,
    evaluate_mean,
    exp_cauchy_mean,
    gini_mean,
    holder_mean,
    log_cauchy_mean,
    mult_cauchy_mean,
    quasi_arithmetic_mean,
)

__version__ = "0.1.0"
