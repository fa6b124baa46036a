"""Rotation errors induced by field quantization for simultaneously driven atoms.

A single quantized pulse (coherent or squeezed) rotating N two-level atoms
leaves a residual gate error that a classical field would not.  This package
provides exact joint-state simulation of the resonant collective model,
the second-order perturbative error predictor, the closed-form error and
optimal-squeezing formulas, and Haar-random ensemble statistics, plus a CLI
that writes figure datasets as CSV.
"""

from fieldrot.core import (
    AtomState,
    CollectiveOps,
    FieldState,
    JointState,
    TruncationError,
    build_collective_ops,
    cat_state,
    coherent_state,
    default_n_max,
    expectation,
    haar_random_state,
    squeezed_coherent_state,
    tensor,
)
from fieldrot.dynamics import (
    ConvergenceError,
    ErrorReport,
    RotationSpec,
    classical_rotation,
    evolve,
    gate_error_exact,
)
from fieldrot.perturbation import (
    field_quadrature_moments,
    perturbative_error,
    perturbative_error_haar_average,
)
from fieldrot import formulas
from fieldrot.ensemble import EnsembleResult, EnsembleRun, run_ensemble, worst_case_scan

__version__ = "0.1.0"

__all__ = [
    "AtomState",
    "CollectiveOps",
    "ConvergenceError",
    "EnsembleResult",
    "EnsembleRun",
    "ErrorReport",
    "FieldState",
    "JointState",
    "RotationSpec",
    "TruncationError",
    "build_collective_ops",
    "cat_state",
    "classical_rotation",
    "coherent_state",
    "default_n_max",
    "evolve",
    "expectation",
    "field_quadrature_moments",
    "formulas",
    "gate_error_exact",
    "haar_random_state",
    "perturbative_error",
    "perturbative_error_haar_average",
    "run_ensemble",
    "squeezed_coherent_state",
    "tensor",
    "worst_case_scan",
    "__version__",
]
