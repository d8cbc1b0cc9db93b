"""Bilinear control systems with piecewise-constant amplitudes.

Units are dimensionless with hbar = 1. Slice ``m`` evolves under
``H_0 + sum_k c[m, k] H_k`` for ``dt = T / M``.
"""

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionMismatchError, ParseError, check_dense
from .pauli import PauliString, PauliSum, to_dense
from .state import StateVector, expm_hermitian, propagator_piecewise, slice_generators


@dataclass(frozen=True)
class ControlSystem:
    h0: PauliSum
    controls: tuple
    T: float
    M: int

    def __post_init__(self):
        object.__setattr__(self, "controls", tuple(self.controls))
        for h in self.controls:
            if h.n != self.h0.n:
                raise DimensionMismatchError(
                    f"control on {h.n} qubits, drift on {self.h0.n}"
                )
        if not self.T > 0:
            raise ValueError(f"total time must be positive, got {self.T}")
        if int(self.M) != self.M or self.M < 1:
            raise ValueError(f"slice count must be a positive integer, got {self.M}")
        object.__setattr__(self, "M", int(self.M))
        object.__setattr__(self, "T", float(self.T))

    @property
    def n(self):
        return self.h0.n

    @property
    def K(self):
        return len(self.controls)

    @property
    def dt(self):
        return self.T / self.M

    @property
    def num_params(self):
        return self.M * self.K

    def slice_generator(self, amplitudes):
        """PauliSum ``H_0 + sum_k c_k H_k`` for one slice's amplitudes."""
        out = self.h0
        for c, h in zip(amplitudes, self.controls):
            out = out + float(c) * h
        return out

    def to_dict(self):
        return {
            "n": self.n,
            "drift": [[c, s.axes] for c, s in self.h0.terms],
            "controls": [[[c, s.axes] for c, s in h.terms] for h in self.controls],
            "T": self.T,
            "M": self.M,
        }

    @classmethod
    def from_dict(cls, data):
        try:
            n = int(data["n"])

            def ps(terms):
                return PauliSum(n, [(c, PauliString(s)) for c, s in terms])

            return cls(ps(data["drift"]), [ps(t) for t in data["controls"]],
                       float(data["T"]), int(data["M"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"invalid control system: {exc}") from exc


class PulseSchedule:
    """Amplitudes ``c[m, k]`` for slices ``m`` and controls ``k``."""

    __slots__ = ("amplitudes",)

    def __init__(self, amplitudes):
        a = np.array(amplitudes, dtype=float)
        if a.ndim == 1:
            a = a.reshape(-1, 1)
        if a.ndim != 2:
            raise ValueError(f"amplitudes must be 2-D (M, K), got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("amplitudes must be finite")
        a.setflags(write=False)
        self.amplitudes = a

    @classmethod
    def zeros(cls, sys):
        return cls(np.zeros((sys.M, sys.K)))

    @classmethod
    def constant(cls, sys, values):
        return cls(np.tile(np.asarray(values, dtype=float), (sys.M, 1)))

    @classmethod
    def random(cls, sys, rng=None, low=-1.0, high=1.0):
        rng = np.random.default_rng(rng)
        return cls(rng.uniform(low, high, size=(sys.M, sys.K)))

    @classmethod
    def from_vector(cls, sys, vector):
        v = np.asarray(vector, dtype=float)
        if v.size != sys.M * sys.K:
            raise DimensionMismatchError(f"expected {sys.M * sys.K} amplitudes, got {v.size}")
        return cls(v.reshape(sys.M, sys.K))

    @property
    def shape(self):
        return self.amplitudes.shape

    @property
    def vector(self):
        return self.amplitudes.reshape(-1).copy()

    def check(self, sys):
        if self.shape != (sys.M, sys.K):
            raise DimensionMismatchError(
                f"schedule shape {self.shape} does not match system (M={sys.M}, K={sys.K})"
            )

    def __repr__(self):
        return f"PulseSchedule(M={self.shape[0]}, K={self.shape[1]})"

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["slice"] + [f"k{k}" for k in range(self.shape[1])])
        for m, row in enumerate(self.amplitudes, start=1):
            w.writerow([m] + [repr(float(x)) for x in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text, sys=None, source=None):
        rows = list(csv.reader(io.StringIO(text)))
        if not rows:
            raise ParseError("empty schedule file", source=source)
        header = [h.strip() for h in rows[0]]
        K = len(header) - 1
        if header[0] != "slice" or header[1:] != [f"k{k}" for k in range(K)]:
            raise ParseError(f"bad header {header!r}; expected slice,k0,k1,...", 1, 1, source)
        amps = []
        for lineno, row in enumerate(rows[1:], start=2):
            if not row or all(not x.strip() for x in row):
                continue
            if len(row) != K + 1:
                raise ParseError(f"expected {K + 1} fields, got {len(row)}", lineno, 1, source)
            try:
                m = int(row[0])
                vals = [float(x) for x in row[1:]]
            except ValueError as exc:
                raise ParseError(str(exc), lineno, 1, source) from None
            if m != len(amps) + 1:
                raise ParseError(f"slice {m} out of order; expected {len(amps) + 1}",
                                 lineno, 1, source)
            if not all(np.isfinite(vals)):
                raise ParseError("non-finite amplitude", lineno, 1, source)
            amps.append(vals)
        if not amps:
            raise ParseError("schedule has no slices", source=source)
        sched = cls(np.array(amps).reshape(len(amps), K))
        if sys is not None and sched.shape != (sys.M, sys.K):
            raise ParseError(
                f"schedule shape {sched.shape} does not match system (M={sys.M}, K={sys.K})",
                source=source,
            )
        return sched


def load_schedule(path, sys=None):
    path = Path(path)
    return PulseSchedule.from_csv(path.read_text(), sys, source=str(path))


def _amplitudes(sys, sched):
    if isinstance(sched, PulseSchedule):
        sched.check(sys)
        return sched.amplitudes
    return PulseSchedule.from_vector(sys, sched).amplitudes


def _check_state(sys, h_p, psi0):
    if h_p.n != sys.n or psi0.n != sys.n:
        raise DimensionMismatchError(
            f"system on {sys.n} qubits, H_p on {h_p.n}, state on {psi0.n}"
        )


def pulse_state(sys, sched, psi0):
    """Terminal state ``U_T |psi0>``."""
    if psi0.n != sys.n:
        raise DimensionMismatchError(f"system on {sys.n} qubits, state on {psi0.n}")
    gens = slice_generators(sys, _amplitudes(sys, sched))
    psi = psi0.amplitudes
    for g in gens:
        psi = expm_hermitian(g, sys.dt) @ psi
    return StateVector(psi, check=False)


def pulse_objective(sys, sched, h_p, psi0):
    """J = <psi(T)|H_p|psi(T)>."""
    _check_state(sys, h_p, psi0)
    u = propagator_piecewise(sys, _amplitudes(sys, sched))
    psi = u @ psi0.amplitudes
    return float(np.real(np.vdot(psi, to_dense(h_p) @ psi)))


def _slice_derivative_factor(w, dt):
    """Divided differences of exp(-i dt w): (e_a - e_b) / (w_a - w_b), confluent on the diagonal."""
    s = w[:, None] + w[None, :]
    d = w[:, None] - w[None, :]
    return -1j * dt * np.exp(-0.5j * dt * s) * np.sinc(dt * d / (2.0 * np.pi))


def segment_adjoint(sys, amps, psi_in, chi_out):
    """Back-propagate a costate through the pulse segment.

    ``psi_in`` enters slice 1 and ``chi_out`` is the costate at the segment's
    end. Returns ``(grad, chi_in, psi_out)`` where ``grad[m, k] = 2 Re <chi_m|
    dU_m/dc |psi_{m-1}>``, ``chi_in = U^dagger chi_out`` and ``psi_out = U psi_in``.
    """
    check_dense(sys.n)
    amps = np.asarray(amps, dtype=float).reshape(sys.M, sys.K)
    gens = slice_generators(sys, amps)
    hk = [to_dense(h) for h in sys.controls]
    dt = sys.dt
    eig = [np.linalg.eigh(g) for g in gens]
    states = [np.asarray(psi_in, dtype=complex)]
    for w, v in eig:
        states.append(v @ (np.exp(-1j * dt * w) * (v.conj().T @ states[-1])))
    chi = np.asarray(chi_out, dtype=complex)
    grad = np.zeros((sys.M, sys.K))
    for m in range(sys.M - 1, -1, -1):
        w, v = eig[m]
        vh = v.conj().T
        chi_t = vh @ chi
        psi_t = vh @ states[m]
        weights = np.conj(chi_t)[:, None] * _slice_derivative_factor(w, dt) * psi_t[None, :]
        for k, h in enumerate(hk):
            grad[m, k] = 2.0 * np.real(np.sum(weights * (vh @ h @ v)))
        chi = v @ (np.exp(1j * dt * w) * chi_t)
    return grad, chi, states[-1]


def grape_gradient(sys, sched, h_p, psi0):
    """Exact dJ/dc[m, k] by forward/adjoint propagation; shape (M, K)."""
    _check_state(sys, h_p, psi0)
    amps = _amplitudes(sys, sched)
    psi_T = pulse_state(sys, amps, psi0).amplitudes
    chi_T = to_dense(h_p) @ psi_T
    grad, _, _ = segment_adjoint(sys, amps, psi0.amplitudes, chi_T)
    return grad


def objective_and_gradient(sys, sched, h_p, psi0):
    """(J, dJ/dc) sharing one forward pass."""
    _check_state(sys, h_p, psi0)
    amps = _amplitudes(sys, sched)
    hp = to_dense(h_p)
    psi_T = pulse_state(sys, amps, psi0).amplitudes
    grad, _, _ = segment_adjoint(sys, amps, psi0.amplitudes, hp @ psi_T)
    return float(np.real(np.vdot(psi_T, hp @ psi_T))), grad
