"""Recovery of damped cavity-field Fock superpositions by conditional measurements."""

from .analytic import CoeffTable, analytic_cm, compute_coeffs, damped_qubit_matrix, recovery_residuals
from .dissipation import DampingSpec, dissipate, dissipate_ode_oracle
from .fock import (
    TOL,
    AtomState,
    DensityMatrix,
    JointState,
    StateVector,
    ToleranceConfig,
    embed,
    partial_trace_atom,
    pure_to_density,
    tensor_with_atom,
    truncate,
)
from .jc import CmOutcome, CmParams, JcTime, apply_cm, conditional_measure, jc_evolve, jc_unitary
from .metrics import CostConfig, cost, distance, fidelity, q_function, q_grid
from .recovery import (
    OptimizationError,
    OptimizerConfig,
    RecoveryReport,
    filtering_probability,
    optimize_cm,
    run_sequence,
    table_compare,
)

__version__ = "0.1.0"
