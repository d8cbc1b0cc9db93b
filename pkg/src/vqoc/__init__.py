"""Variational optimization across the circuit and pulse levels.

Small dense-simulation toolkit: Pauli algebra, statevector kernels,
parametrized circuits (QAOA, hardware-efficient, H2), piecewise-constant
control with exact adjoint gradients, pulse/circuit level maps,
controllability and landscape diagnostics, and an optimization driver.
"""

__version__ = "0.1.0"

from ._backend import BACKEND
from .circuit import (
    Circuit,
    build_h2_circuit,
    build_hardware_efficient,
    build_qaoa,
    driver_hamiltonian,
    evaluate_circuit,
    ring_hamiltonian,
)
from .controllability import LieAlgebraReport, dynamical_lie_algebra, is_fully_controllable
from .driver import (
    MethodConfig,
    ObjectiveSpec,
    OptimizationTrace,
    control_precision_fidelity,
    evaluate_objective,
    optimize,
    precision_for_fidelity,
    shots_required,
)
from .errors import (
    DimensionMismatchError,
    ParseError,
    ResourceLimitError,
    UnboundParameterError,
    UndeterminedError,
    VqocError,
)
from .landscape import (
    classify_critical_point,
    gradient_fd,
    gradient_variance_scan,
    hessian_fd,
    local_surjectivity_rank,
    spectral_weights,
)
from .level_maps import (
    HybridAnsatz,
    digitize,
    evaluate_hybrid,
    gate_fidelity,
    generate_hamiltonian,
    hybridize,
)
from .pauli import PauliString, PauliSum, commutator, lambda_norm, parse_pauli_sum, pauli_mul, to_dense
from .pulse import ControlSystem, PulseSchedule, grape_gradient, pulse_objective
from .state import (
    Gate,
    StateVector,
    apply_gate,
    evolve_const,
    expectation,
    measure_shots,
    propagator_piecewise,
)

__all__ = [
    "BACKEND",
    "Circuit",
    "ControlSystem",
    "DimensionMismatchError",
    "Gate",
    "HybridAnsatz",
    "LieAlgebraReport",
    "MethodConfig",
    "ObjectiveSpec",
    "OptimizationTrace",
    "ParseError",
    "PauliString",
    "PauliSum",
    "PulseSchedule",
    "ResourceLimitError",
    "StateVector",
    "UnboundParameterError",
    "UndeterminedError",
    "VqocError",
    "apply_gate",
    "build_h2_circuit",
    "build_hardware_efficient",
    "build_qaoa",
    "classify_critical_point",
    "commutator",
    "control_precision_fidelity",
    "digitize",
    "driver_hamiltonian",
    "dynamical_lie_algebra",
    "evaluate_circuit",
    "evaluate_hybrid",
    "evaluate_objective",
    "evolve_const",
    "expectation",
    "gate_fidelity",
    "generate_hamiltonian",
    "gradient_fd",
    "gradient_variance_scan",
    "grape_gradient",
    "hessian_fd",
    "hybridize",
    "is_fully_controllable",
    "lambda_norm",
    "local_surjectivity_rank",
    "measure_shots",
    "optimize",
    "parse_pauli_sum",
    "pauli_mul",
    "precision_for_fidelity",
    "propagator_piecewise",
    "pulse_objective",
    "ring_hamiltonian",
    "shots_required",
    "spectral_weights",
    "to_dense",
]
