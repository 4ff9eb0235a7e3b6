"""Compact and Z_{2L+1}-regularized lattice QED in 2+1 dimensions.

Electric and magnetic Hamiltonian representations of the periodic
plaquette (with and without staggered fermions), a generator for general
periodic tori, a Krylov ground-state solver and the convergence
diagnostics used to pick the group resolution ``L`` for a truncation ``l``.
"""

from compactqed.basis import (
    CouplingParams,
    GroupParams,
    MatterBasis,
    RotatorBasis,
    index_of,
    vector_of,
)
from compactqed.fourier import (
    ReplacementCoefficients,
    digamma,
    replacement_coefficients,
    trigamma,
)
from compactqed.hamiltonian import (
    GaugeHamiltonian,
    LoweringOperator,
    build_link_formulation,
    build_pure_gauge_electric,
    build_pure_gauge_magnetic,
    lowering_operator,
)
from compactqed.eigensolver import ConvergenceError, EigenResult, ground_state, lowest_k

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "CouplingParams",
    "EigenResult",
    "GaugeHamiltonian",
    "GroupParams",
    "LoweringOperator",
    "MatterBasis",
    "ReplacementCoefficients",
    "RotatorBasis",
    "build_link_formulation",
    "build_pure_gauge_electric",
    "build_pure_gauge_magnetic",
    "digamma",
    "ground_state",
    "index_of",
    "lowering_operator",
    "lowest_k",
    "replacement_coefficients",
    "trigamma",
    "vector_of",
]
