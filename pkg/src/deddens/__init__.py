"""Numerical workbench for Deddens algebras and spectral radius algebras.

The package is split into four layers:

``deddens.hilbert``   weighted finite-dimensional Hilbert space primitives
``deddens.condexp``   conditional expectations and WCT operators
``deddens.algebras``  empirical and closed-form membership tests
``deddens.scenario``  JSON scenarios, generators and reports (CLI: ``deddens``)
"""

from .errors import (
    ConsistencyFailure,
    DeddensError,
    DimensionMismatch,
    NotInvertible,
    NotMeasurable,
    NotPositive,
    NotQuasiIsometry,
    NotRankOneCompatible,
    ParseError,
    TruncationFailure,
    ValidationError,
    ZeroVector,
)
from .hilbert import DEFAULT_TOL, MeasureSpace, Operator, ToleranceConfig

__version__ = "0.1.0"

__all__ = [
    "ConsistencyFailure",
    "DeddensError",
    "DimensionMismatch",
    "NotInvertible",
    "NotMeasurable",
    "NotPositive",
    "NotQuasiIsometry",
    "NotRankOneCompatible",
    "ParseError",
    "TruncationFailure",
    "ValidationError",
    "ZeroVector",
    "DEFAULT_TOL",
    "MeasureSpace",
    "Operator",
    "ToleranceConfig",
    "__version__",
]
