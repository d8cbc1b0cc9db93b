"""Maps between the pulse and circuit levels.

* ``digitize``: piecewise-constant pulse -> first-order Trotter circuit.
* ``generate_hamiltonian``: single gate -> generating Hamiltonian and time.
* ``hybridize`` / ``evaluate_hybrid``: circuits with selected gates promoted
  to pulse segments whose Pauli coefficients are free parameters.
"""

import json
from dataclasses import dataclass

import numpy as np

from .circuit import Circuit
from .errors import DimensionMismatchError, ParseError
from .pauli import PauliString, PauliSum, to_dense
from .pulse import ControlSystem, PulseSchedule, pulse_state, segment_adjoint
from .state import Gate, StateVector, apply_gate_array


def gate_fidelity(u, v):
    """Phase-insensitive |tr(V^dagger U)| / d."""
    return abs(np.trace(v.conj().T @ u)) / u.shape[0]


def digitize(sys, sched, r=1):
    """First-order Trotter circuit for ``sched`` on ``sys``.

    Each slice contributes ``r`` repetitions of the product of
    ``exp(-i dt/r alpha_j P_j)`` over the slice generator's terms in canonical
    order. Identity terms become global-phase rotations so the circuit matches
    the propagator including phase.
    """
    if int(r) != r or r < 1:
        raise ValueError(f"Trotter substeps must be a positive integer, got {r}")
    amps = sched.amplitudes if isinstance(sched, PulseSchedule) else np.asarray(sched)
    PulseSchedule(amps).check(sys)
    tau = sys.dt / r
    gates = []
    for row in amps:
        gen = sys.slice_generator(row)
        step = [Gate.rotation(PauliSum(sys.n, [(1.0, s)]), angle=2.0 * c * tau)
                for c, s in gen.terms]
        gates += step * int(r)
    return Circuit(sys.n, gates)


def _single(n, ops):
    return PauliString.from_sparse(n, ops)


def generate_hamiltonian(g, n=None, bindings=None):
    """Return ``(generator, tau, phase)`` with ``exp(-i generator tau) = phase * U_g``.

    ``n`` defaults to the rotation generator's size or the highest target
    qubit + 1.
    """
    if g.kind == "PauliRotation":
        return 0.5 * g.bound_angle(bindings) * g.generator, 1.0, 1.0 + 0.0j
    if n is None:
        n = max(g.qubits) + 1
    g.check_fits(n)
    if g.kind == "X":
        q = g.qubits[0]
        return PauliSum(n, [(np.pi / 2, _single(n, {q: "X"}))]), 1.0, -1j
    if g.kind == "H":
        q = g.qubits[0]
        c = np.pi / (2.0 * np.sqrt(2.0))
        return PauliSum(n, [(c, _single(n, {q: "X"})), (c, _single(n, {q: "Z"}))]), 1.0, -1j
    if g.kind == "CZ":
        a, b = g.qubits
        c = np.pi / 4
        gen = PauliSum(n, [
            (c, _single(n, {a: "Z", b: "Z"})),
            (-c, _single(n, {a: "Z"})),
            (-c, _single(n, {b: "Z"})),
        ])
        return gen, 1.0, np.exp(0.25j * np.pi)
    raise ValueError(f"no Hamiltonian generation rule for gate kind {g.kind!r}")


@dataclass(frozen=True)
class CircuitSegment:
    circuit: Circuit

    @property
    def param_names(self):
        return self.circuit.params


@dataclass(frozen=True)
class PulseSegment:
    """Analog evolution ``exp(-i tau sum_j c_j P_j)`` with free ``c_j``.

    Stored as a one-slice control system with the ``P_j`` as controls and no
    drift, so the pulse adjoint gradient applies unchanged.
    """

    system: ControlSystem
    param_names: tuple
    initial: tuple

    @property
    def strings(self):
        return [h.terms[0][1] for h in self.system.controls]


class HybridAnsatz:
    """Ordered circuit and pulse segments sharing one parameter vector."""

    def __init__(self, n, segments, param_names=None, initial=None):
        self.n = n
        self.segments = tuple(segments)
        for seg in self.segments:
            seg_n = seg.circuit.n if isinstance(seg, CircuitSegment) else seg.system.n
            if seg_n != n:
                raise DimensionMismatchError(f"segment on {seg_n} qubits, ansatz on {n}")
        names = []
        for seg in self.segments:
            for p in seg.param_names:
                if p not in names:
                    names.append(p)
        if param_names is not None and list(param_names) != names:
            raise ValueError("parameter names disagree with the segments")
        self.param_names = tuple(names)
        if initial is None:
            init = {}
            for seg in self.segments:
                if isinstance(seg, CircuitSegment):
                    init.update(seg.circuit.bindings)
                else:
                    init.update(zip(seg.param_names, seg.initial))
            initial = [init.get(p, 0.0) for p in names]
        self.initial = np.asarray(initial, dtype=float)
        if self.initial.shape != (len(names),):
            raise DimensionMismatchError("initial vector length differs from parameter count")
        self._index = {p: i for i, p in enumerate(names)}

    @property
    def num_params(self):
        return len(self.param_names)

    def __repr__(self):
        kinds = "".join("C" if isinstance(s, CircuitSegment) else "P" for s in self.segments)
        return f"HybridAnsatz(n={self.n}, segments={kinds!r}, params={self.num_params})"

    def slots(self):
        """(segment index, parameter name, vector index) for every segment parameter."""
        return [(i, p, self._index[p]) for i, seg in enumerate(self.segments)
                for p in seg.param_names]

    def _vector(self, params):
        if params is None:
            return self.initial
        v = np.asarray(params, dtype=float).reshape(-1)
        if v.shape[0] != self.num_params:
            raise DimensionMismatchError(
                f"expected {self.num_params} parameters, got {v.shape[0]}"
            )
        return v

    def segment_values(self, seg, params):
        v = self._vector(params)
        return [v[self._index[p]] for p in seg.param_names]

    def to_dict(self):
        segs = []
        for seg in self.segments:
            if isinstance(seg, CircuitSegment):
                segs.append({"type": "circuit", "circuit": seg.circuit.to_dict()})
            else:
                segs.append({
                    "type": "pulse",
                    "system": seg.system.to_dict(),
                    "params": list(seg.param_names),
                    "initial": list(seg.initial),
                })
        return {"n": self.n, "segments": segs, "params": list(self.param_names),
                "initial": self.initial.tolist()}

    @classmethod
    def from_dict(cls, data):
        try:
            segs = []
            for d in data["segments"]:
                if d["type"] == "circuit":
                    segs.append(CircuitSegment(Circuit.from_dict(d["circuit"])))
                elif d["type"] == "pulse":
                    segs.append(PulseSegment(ControlSystem.from_dict(d["system"]),
                                             tuple(d["params"]), tuple(d["initial"])))
                else:
                    raise ValueError(f"unknown segment type {d['type']!r}")
            return cls(int(data["n"]), segs, data.get("params"), data.get("initial"))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"invalid hybrid ansatz: {exc}") from exc

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, text):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, exc.lineno, exc.colno) from exc
        return cls.from_dict(data)


def _pulse_segment(n, gen, tau, index):
    strings = [s for _, s in gen.terms]
    coefs = tuple(float(c) for c, _ in gen.terms)
    names = tuple(f"seg{index}.{s.axes}" for s in strings)
    system = ControlSystem(PauliSum.zero(n), [PauliSum(n, [(1.0, s)]) for s in strings], tau, 1)
    return PulseSegment(system, names, coefs)


def hybridize(c, selection, bindings=None):
    """Promote the gates at ``selection`` to pulse segments.

    Each selected gate is replaced by ``exp(-i tau sum_j c_j P_j)`` with its
    generating Hamiltonian's coefficients as free parameters initialized at the
    generated values; a selected parametrized gate drops its circuit parameter.
    Runs of unselected gates stay as circuit segments.
    """
    selection = sorted(set(selection))
    for i in selection:
        if not 0 <= i < len(c.gates):
            raise IndexError(f"gate index {i} out of range for {len(c.gates)} gates")
    b = c.resolve(bindings)
    segments = []
    run = []

    def flush():
        if run:
            used = [p for p in c.params if any(g.param == p for g in run)]
            segments.append(CircuitSegment(Circuit(c.n, run, used, b)))
            run.clear()

    for i, g in enumerate(c.gates):
        if i in selection:
            flush()
            gen, tau, _ = generate_hamiltonian(g, c.n, b)
            segments.append(_pulse_segment(c.n, gen, tau, len(segments)))
        else:
            run.append(g)
    flush()
    if not segments:
        segments.append(CircuitSegment(Circuit(c.n, [], [], {})))
    return HybridAnsatz(c.n, segments)


def _segment_array(h, seg, psi, params):
    vals = h.segment_values(seg, params)
    if isinstance(seg, CircuitSegment):
        bind = dict(zip(seg.param_names, vals))
        for g in seg.circuit.gates:
            psi = apply_gate_array(psi, h.n, g, bind)
        return psi
    out = pulse_state(seg.system, PulseSchedule([vals]), StateVector(psi, check=False))
    return out.amplitudes


def evaluate_hybrid(h, params=None, psi0=None):
    """Apply the segments in order; ``params`` defaults to the initial vector."""
    if psi0 is None:
        psi0 = StateVector.zero(h.n)
    if psi0.n != h.n:
        raise DimensionMismatchError(f"ansatz on {h.n} qubits, state on {psi0.n}")
    v = h._vector(params)
    psi = np.ascontiguousarray(psi0.amplitudes)
    for seg in h.segments:
        psi = _segment_array(h, seg, psi, v)
    return StateVector(psi, check=False)


def hybrid_gradient(h, params, h_p, psi0=None, fd_step=1e-5):
    """dJ/dparams with pulse coefficients by the adjoint and circuit angles by central FD."""
    if psi0 is None:
        psi0 = StateVector.zero(h.n)
    v = h._vector(params).copy()
    hp = to_dense(h_p)
    grad = np.zeros_like(v)

    def energy(x):
        psi = evaluate_hybrid(h, x, psi0).amplitudes
        return float(np.real(np.vdot(psi, hp @ psi)))

    pulse_slots = set()
    states = [np.ascontiguousarray(psi0.amplitudes)]
    for seg in h.segments:
        states.append(_segment_array(h, seg, states[-1], v))
    chi = hp @ states[-1]
    for i in range(len(h.segments) - 1, -1, -1):
        seg = h.segments[i]
        vals = h.segment_values(seg, v)
        if isinstance(seg, PulseSegment):
            g, chi, _ = segment_adjoint(seg.system, np.array([vals]), states[i], chi)
            for p, d in zip(seg.param_names, g.reshape(-1)):
                grad[h._index[p]] += d
                pulse_slots.add(h._index[p])
        else:
            chi = seg.circuit.inverse_array(np.ascontiguousarray(chi),
                                            dict(zip(seg.param_names, vals)))
    for j in range(len(v)):
        if j in pulse_slots:
            continue
        e = np.zeros_like(v)
        e[j] = fd_step
        grad[j] = (energy(v + e) - energy(v - e)) / (2.0 * fd_step)
    return grad


def hybrid_unitary(h, params=None):
    dim = 1 << h.n
    cols = np.empty((dim, dim), dtype=complex)
    for j in range(dim):
        cols[:, j] = evaluate_hybrid(h, params, StateVector.basis(h.n, j)).amplitudes
    return cols
