"""Uniform parameter-vector view over circuits, pulse systems and hybrids."""

import numpy as np

from .circuit import Circuit, evaluate_circuit
from .errors import DimensionMismatchError
from .level_maps import HybridAnsatz, evaluate_hybrid, hybrid_gradient, hybrid_unitary
from .pulse import ControlSystem, PulseSchedule, grape_gradient, propagator_piecewise, pulse_state
from .state import StateVector

ANSATZ_TYPES = (Circuit, ControlSystem, HybridAnsatz)


def _check(a):
    if not isinstance(a, ANSATZ_TYPES):
        raise TypeError(f"unsupported ansatz type {type(a).__name__}")


def num_params(a):
    _check(a)
    return a.num_params


def qubits(a):
    _check(a)
    return a.n


def is_angle_parametrized(a):
    """True for circuit angles (drawn from [0, 2pi)); False for pulse amplitudes."""
    return isinstance(a, Circuit)


def current_params(a):
    if isinstance(a, Circuit):
        return a.parameter_vector()
    if isinstance(a, HybridAnsatz):
        return a.initial.copy()
    return np.zeros(a.num_params)


def _vector(a, params):
    v = np.asarray(params, dtype=float).reshape(-1)
    if v.shape[0] != num_params(a):
        raise DimensionMismatchError(f"expected {num_params(a)} parameters, got {v.shape[0]}")
    return v


def prepare_state(a, params, psi0=None):
    """State produced by the ansatz at ``params`` from ``psi0`` (default |0...0>)."""
    _check(a)
    v = _vector(a, params)
    if psi0 is None:
        psi0 = StateVector.zero(a.n)
    if isinstance(a, Circuit):
        return evaluate_circuit(a, v, psi0)
    if isinstance(a, HybridAnsatz):
        return evaluate_hybrid(a, v, psi0)
    return pulse_state(a, PulseSchedule.from_vector(a, v), psi0)


def ansatz_unitary(a, params):
    _check(a)
    v = _vector(a, params)
    if isinstance(a, Circuit):
        return a.unitary(v)
    if isinstance(a, HybridAnsatz):
        return hybrid_unitary(a, v)
    return propagator_piecewise(a, PulseSchedule.from_vector(a, v))


def analytic_gradient(a, params, h_p, psi0):
    """Adjoint gradient where one exists (pulse systems, hybrids); otherwise None."""
    v = _vector(a, params)
    if isinstance(a, ControlSystem):
        return grape_gradient(a, PulseSchedule.from_vector(a, v), h_p, psi0).reshape(-1)
    if isinstance(a, HybridAnsatz):
        return hybrid_gradient(a, v, h_p, psi0)
    return None
