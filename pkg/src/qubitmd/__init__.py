"""Minimum-error discrimination of up to four qubit states.

Closed-form geometric solver with an independent convex-dual oracle.
"""

from .bloch import (
    Ensemble,
    ComplementaryState,
    HermitianOperator2,
    PovmElement,
    WeightedState,
    from_density_matrix,
    success_probability,
    validate_povm,
)
from .conditions import ConditionReport, check_condition
from .geometry import barycentric, displaced_geometry, simplex_angles
from .oracle import dual_socp, helstrom_two, primal_sampler
from .solver import KktResiduals, Solution, kkt_certificate, solve

__all__ = [
    "ComplementaryState",
    "ConditionReport",
    "Ensemble",
    "HermitianOperator2",
    "KktResiduals",
    "PovmElement",
    "Solution",
    "WeightedState",
    "barycentric",
    "check_condition",
    "displaced_geometry",
    "dual_socp",
    "from_density_matrix",
    "helstrom_two",
    "kkt_certificate",
    "primal_sampler",
    "simplex_angles",
    "solve",
    "success_probability",
    "validate_povm",
]

__version__ = "0.1.0"
