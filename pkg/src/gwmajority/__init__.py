"""Majority-rule opinion propagation on Galton-Watson trees.

Exact simplex recursion, uniform-case fixed-point theory, basin
certificates, central-binomial/Wallis bounds and a Monte Carlo tree oracle.
"""

from .offspring import (
    Explicit,
    NAry,
    OffspringDistribution,
    ShiftedGeometric,
    SupportParity,
    parse_distribution,
)
from .simplex import ProbabilityVector, canonicalize, iterate, step_H

__all__ = [
    "Explicit",
    "NAry",
    "OffspringDistribution",
    "ProbabilityVector",
    "ShiftedGeometric",
    "SupportParity",
    "canonicalize",
    "iterate",
    "parse_distribution",
    "step_H",
]

__version__ = "0.1.0"
