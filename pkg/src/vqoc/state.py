"""Dense statevector simulation.

Gate application and Pauli expectations go through the kernel backend
(compiled when available). Hamiltonian exponentials are exact, via Hermitian
eigendecomposition.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._backend import kernels
from .errors import DimensionMismatchError, UnboundParameterError, check_dense
from .pauli import PauliString, PauliSum, to_dense

NORM_TOL = 1e-10

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)
_X = np.array([[0, 1], [1, 0]], dtype=complex)


class StateVector:
    """Normalized amplitude vector over ``n`` qubits (read-only)."""

    __slots__ = ("n", "amplitudes")

    def __init__(self, amplitudes, check=True):
        amps = np.array(amplitudes, dtype=np.complex128).reshape(-1)
        dim = amps.shape[0]
        n = dim.bit_length() - 1
        if dim < 2 or 1 << n != dim:
            raise DimensionMismatchError(f"state length {dim} is not a power of two >= 2")
        if check and abs(np.linalg.norm(amps) - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {np.linalg.norm(amps):.12g} differs from 1")
        amps.setflags(write=False)
        self.n = n
        self.amplitudes = amps

    @classmethod
    def basis(cls, n, index=0):
        """Computational basis state; ``index`` may be an int or a bitstring like "0011"."""
        if isinstance(index, str):
            if len(index) != n:
                raise ValueError(f"bitstring {index!r} does not have {n} bits")
            index = int(index, 2)
        amps = np.zeros(1 << n, dtype=complex)
        amps[index] = 1.0
        return cls(amps)

    @classmethod
    def zero(cls, n):
        return cls.basis(n, 0)

    @classmethod
    def plus(cls, n):
        return cls(np.full(1 << n, (1 << n) ** -0.5, dtype=complex))

    @classmethod
    def random(cls, n, rng=None):
        rng = np.random.default_rng(rng)
        v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
        return cls(v / np.linalg.norm(v))

    @classmethod
    def from_unnormalized(cls, amplitudes):
        v = np.asarray(amplitudes, dtype=complex)
        return cls(v / np.linalg.norm(v))

    @property
    def dim(self):
        return self.amplitudes.shape[0]

    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def inner(self, other):
        """<self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def overlap(self, other):
        """Phase-insensitive |<self|other>|."""
        return abs(self.inner(other))

    def __array__(self, dtype=None, copy=None):
        return self.amplitudes if dtype is None else self.amplitudes.astype(dtype)

    def __repr__(self):
        return f"StateVector(n={self.n})"

    def to_json(self):
        return [[float(a.real), float(a.imag)] for a in self.amplitudes]

    @classmethod
    def from_json(cls, data):
        return cls([complex(re, im) for re, im in data])


@dataclass(frozen=True)
class Gate:
    """One circuit element.

    ``kind`` is "H", "X", "CZ" or "PauliRotation". A rotation applies
    ``exp(-i * angle / 2 * generator)``; its angle is either fixed (``angle``)
    or ``scale * bindings[param]``. The generator is usually a single Pauli
    string; a general ``PauliSum`` is exponentiated exactly.
    """

    kind: str
    qubits: tuple = ()
    generator: PauliSum = None
    angle: float = None
    param: str = None
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in ("H", "X", "CZ", "PauliRotation"):
            raise ValueError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"repeated target qubits {self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise ValueError(f"negative qubit index in {self.qubits}")
        if self.kind == "PauliRotation":
            if self.generator is None:
                raise ValueError("PauliRotation needs a generator")
            if (self.angle is None) == (self.param is None):
                raise ValueError("PauliRotation needs exactly one of angle / param")
        elif len(self.qubits) != (2 if self.kind == "CZ" else 1):
            raise ValueError(f"{self.kind} acts on the wrong number of qubits: {self.qubits}")

    @classmethod
    def h(cls, q):
        return cls("H", (q,))

    @classmethod
    def x(cls, q):
        return cls("X", (q,))

    @classmethod
    def cz(cls, a, b):
        return cls("CZ", (a, b))

    @classmethod
    def rotation(cls, generator, angle=None, param=None, scale=1.0):
        if isinstance(generator, str):
            generator = PauliSum.from_string(generator)
        elif isinstance(generator, PauliString):
            generator = PauliSum(generator.n, [(1.0, generator)])
        qubits = sorted({q for _, s in generator.terms for q in s.support})
        return cls("PauliRotation", tuple(qubits), generator, angle, param, scale)

    @classmethod
    def ry(cls, n, q, angle=None, param=None):
        return cls.rotation(PauliString.from_sparse(n, {q: "Y"}), angle, param)

    @property
    def is_parametrized(self):
        return self.param is not None

    def bound_angle(self, bindings=None):
        if self.param is None:
            return self.angle
        if bindings is None or self.param not in bindings:
            raise UnboundParameterError(f"parameter {self.param!r} is unbound")
        return self.scale * float(bindings[self.param])

    def bind(self, bindings):
        """Copy with the parameter replaced by its numeric angle."""
        if self.kind != "PauliRotation" or self.param is None:
            return self
        return Gate("PauliRotation", self.qubits, self.generator, self.bound_angle(bindings))

    def adjoint(self, bindings=None):
        if self.kind != "PauliRotation":
            return self
        return Gate("PauliRotation", self.qubits, self.generator, -self.bound_angle(bindings))

    def check_fits(self, n):
        if any(q >= n for q in self.qubits):
            raise IndexError(f"{self.kind} qubits {self.qubits} out of range for n={n}")
        if self.generator is not None and self.generator.n != n:
            raise DimensionMismatchError(
                f"rotation generator acts on {self.generator.n} qubits, state has {n}"
            )

    def matrix(self, n, bindings=None):
        """Dense ``2**n`` realization, built independently of the kernels."""
        self.check_fits(n)
        check_dense(n)
        if self.kind in ("H", "X"):
            u = _H if self.kind == "H" else _X
            q = self.qubits[0]
            return np.kron(np.kron(np.eye(1 << q), u), np.eye(1 << (n - 1 - q)))
        if self.kind == "CZ":
            a, b = self.qubits
            idx = np.arange(1 << n)
            both = ((idx >> (n - 1 - a)) & 1) & ((idx >> (n - 1 - b)) & 1)
            return np.diag(1.0 - 2.0 * both).astype(complex)
        return expm_hermitian(to_dense(self.generator), 0.5 * self.bound_angle(bindings))


def _as_array(state):
    return state.amplitudes if isinstance(state, StateVector) else np.asarray(state, dtype=complex)


def _rotate(psi, generator, theta):
    """exp(-i theta/2 G) psi on a raw amplitude array."""
    if len(generator.terms) == 0:
        return psi
    if generator.is_commuting():
        for c, s in generator.terms:
            xm, zm, ny = s.masks
            psi = kernels.pauli_rotation(psi, xm, zm, ny, theta * c)
        return psi
    w, v = _eigh_cached(generator)
    return v @ (np.exp(-0.5j * theta * w) * (v.conj().T @ psi))


def apply_gate_array(psi, n, g, bindings=None):
    """Kernel-level gate application on a contiguous complex128 array."""
    if g.kind == "H":
        return kernels.apply_1q(psi, n, g.qubits[0], _H)
    if g.kind == "X":
        return kernels.apply_1q(psi, n, g.qubits[0], _X)
    if g.kind == "CZ":
        return kernels.apply_cz(psi, n, g.qubits[0], g.qubits[1])
    return _rotate(psi, g.generator, g.bound_angle(bindings))


def apply_gate(state, g, bindings=None):
    """Apply ``g`` to ``state``; parametrized gates read their angle from ``bindings``."""
    g.check_fits(state.n)
    out = apply_gate_array(np.ascontiguousarray(state.amplitudes), state.n, g, bindings)
    return StateVector(out, check=False)


def apply_pauli(state, p):
    xm, zm, ny = p.masks
    return kernels.apply_pauli(np.ascontiguousarray(_as_array(state)), xm, zm, ny)


def pauli_expectation(state, p):
    if p.n != state.n:
        raise DimensionMismatchError(f"string on {p.n} qubits, state on {state.n}")
    xm, zm, ny = p.masks
    return kernels.expect_pauli(np.ascontiguousarray(state.amplitudes), xm, zm, ny).real


def expectation(state, h):
    """<psi|H|psi> as the weighted sum of per-string expectations."""
    if h.n != state.n:
        raise DimensionMismatchError(f"operator on {h.n} qubits, state on {state.n}")
    psi = np.ascontiguousarray(state.amplitudes)
    total = 0.0 + 0.0j
    for c, s in h.terms:
        xm, zm, ny = s.masks
        total += c * kernels.expect_pauli(psi, xm, zm, ny)
    if abs(total.imag) > 1e-10:
        raise ArithmeticError(f"expectation has imaginary residue {total.imag:.3g}")
    return float(total.real)


def apply_operator(state, h):
    """H|psi> as a raw (unnormalized) amplitude array."""
    psi = np.ascontiguousarray(_as_array(state))
    out = np.zeros_like(psi)
    for c, s in h.terms:
        xm, zm, ny = s.masks
        out += c * kernels.apply_pauli(psi, xm, zm, ny)
    return out


def expm_hermitian(matrix, t):
    """exp(-i t M) for Hermitian ``M``."""
    w, v = np.linalg.eigh(matrix)
    return (v * np.exp(-1j * t * w)) @ v.conj().T


@lru_cache(maxsize=128)
def _eigh_small(h):
    w, v = np.linalg.eigh(to_dense(h))
    w.setflags(write=False)
    v.setflags(write=False)
    return w, v


def _eigh_cached(h):
    if h.n <= 8:
        return _eigh_small(h)
    return np.linalg.eigh(to_dense(h))


def evolve_const(state, h, t):
    """exp(-i H t)|psi> with hbar = 1."""
    if h.n != state.n:
        raise DimensionMismatchError(f"operator on {h.n} qubits, state on {state.n}")
    check_dense(h.n)
    if t == 0 or not h.terms:
        return state
    w, v = _eigh_cached(h)
    psi = v @ (np.exp(-1j * t * w) * (v.conj().T @ state.amplitudes))
    return StateVector(psi, check=False)


def slice_generators(sys, sched):
    """Dense ``H_0 + sum_k c[m, k] H_k`` for every slice, shape (M, d, d)."""
    amps = np.asarray(sched.amplitudes if hasattr(sched, "amplitudes") else sched, dtype=float)
    if amps.shape != (sys.M, len(sys.controls)):
        raise DimensionMismatchError(
            f"schedule shape {amps.shape} does not match (M={sys.M}, K={len(sys.controls)})"
        )
    check_dense(sys.n)
    h0 = to_dense(sys.h0)
    hk = np.array([to_dense(h) for h in sys.controls]).reshape(len(sys.controls), *h0.shape)
    return h0[None, :, :] + np.einsum("mk,kab->mab", amps, hk)


def propagator_piecewise(sys, sched):
    """Time-ordered product of slice exponentials; slice 1 acts first."""
    gens = slice_generators(sys, sched)
    u = np.eye(gens.shape[1], dtype=complex)
    for g in gens:
        u = expm_hermitian(g, sys.dt) @ u
    return u


def is_unitary(u, tol=1e-9):
    return np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])) < tol


def measure_shots(state, p, shots, seed=None):
    """Mean of ``shots`` simulated +-1 outcomes of measuring the string ``p``."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if p.is_identity():
        return 1.0
    mean = pauli_expectation(state, p)
    p_plus = min(max(0.5 * (1.0 + mean), 0.0), 1.0)
    if abs(p_plus - 1.0) < 1e-12:
        p_plus = 1.0
    elif p_plus < 1e-12:
        p_plus = 0.0
    k = np.random.default_rng(seed).binomial(shots, p_plus)
    return (2.0 * k - shots) / shots
