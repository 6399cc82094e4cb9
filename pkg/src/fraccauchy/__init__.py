"""Analytic solution machinery for abstract fractional Cauchy problems."""

__version__ = "0.1.0"

from .entire_fn import EntireFunctionSpec, ZeroSequence
from .operator_model import OperatorSpec, SpectralOperator, assemble
from .solver import CauchyProblem, SolutionSeries, hypothesis_audit, solve

__all__ = [
    "CauchyProblem",
    "EntireFunctionSpec",
    "OperatorSpec",
    "SolutionSeries",
    "SpectralOperator",
    "ZeroSequence",
    "assemble",
    "hypothesis_audit",
    "solve",
]
