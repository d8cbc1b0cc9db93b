"""Parametrized circuits and the standard ansatz builders."""

import json
import warnings
from pathlib import Path

import numpy as np

from .errors import DimensionMismatchError, UnboundParameterError, ParseError
from .pauli import PauliString, PauliSum, commutator
from .state import Gate, StateVector, apply_gate_array


class Circuit:
    """Ordered gate list plus a parameter table.

    ``params`` lists the free parameter names in vector order; ``bindings``
    holds their current values. Circuits are immutable; ``bind`` returns a
    new one.
    """

    def __init__(self, n, gates=(), params=None, bindings=None):
        self.n = int(n)
        self.gates = tuple(gates)
        for g in self.gates:
            g.check_fits(self.n)
        used = []
        for g in self.gates:
            if g.param is not None and g.param not in used:
                used.append(g.param)
        if params is None:
            params = used
        self.params = tuple(params)
        missing = [p for p in used if p not in self.params]
        if missing:
            raise ValueError(f"gates reference parameters missing from the table: {missing}")
        if len(set(self.params)) != len(self.params):
            raise ValueError("duplicate parameter names")
        self.bindings = {k: float(v) for k, v in (bindings or {}).items() if k in self.params}

    def __repr__(self):
        return f"Circuit(n={self.n}, gates={len(self.gates)}, params={list(self.params)})"

    def __len__(self):
        return len(self.gates)

    @property
    def num_params(self):
        return len(self.params)

    def resolve(self, bindings=None):
        """Merge ``bindings`` (mapping or vector in ``params`` order) over the stored ones."""
        out = dict(self.bindings)
        if bindings is None:
            return out
        if isinstance(bindings, dict):
            unknown = set(bindings) - set(self.params)
            if unknown:
                raise KeyError(f"unknown parameters {sorted(unknown)}")
            out.update({k: float(v) for k, v in bindings.items()})
            return out
        vec = np.asarray(bindings, dtype=float).reshape(-1)
        if vec.shape[0] != len(self.params):
            raise DimensionMismatchError(
                f"expected {len(self.params)} parameter values, got {vec.shape[0]}"
            )
        out.update(zip(self.params, vec.tolist()))
        return out

    def bind(self, bindings):
        return Circuit(self.n, self.gates, self.params, self.resolve(bindings))

    def parameter_vector(self, bindings=None):
        b = self.resolve(bindings)
        missing = [p for p in self.params if p not in b]
        if missing:
            raise UnboundParameterError(f"unbound parameters {missing}")
        return np.array([b[p] for p in self.params])

    def depth(self):
        """Greedy layer count; identity-support rotations occupy no wire."""
        level = [0] * self.n
        for g in self.gates:
            if not g.qubits:
                continue
            d = max(level[q] for q in g.qubits) + 1
            for q in g.qubits:
                level[q] = d
        return max(level, default=0)

    def inverse_array(self, psi, bindings=None):
        """Apply U(theta)^dagger to a raw amplitude array."""
        b = self.resolve(bindings)
        for g in reversed(self.gates):
            psi = apply_gate_array(psi, self.n, g.adjoint(b))
        return psi

    def dense_matrix(self, bindings=None):
        """Product of per-gate dense matrices (independent of the kernels)."""
        b = self.resolve(bindings)
        u = np.eye(1 << self.n, dtype=complex)
        for g in self.gates:
            u = g.matrix(self.n, b) @ u
        return u

    def unitary(self, bindings=None):
        """Circuit unitary assembled column by column through the kernels."""
        b = self.resolve(bindings)
        self._check_bound(b)
        dim = 1 << self.n
        cols = np.empty((dim, dim), dtype=complex)
        for j in range(dim):
            psi = np.zeros(dim, dtype=complex)
            psi[j] = 1.0
            for g in self.gates:
                psi = apply_gate_array(psi, self.n, g, b)
            cols[:, j] = psi
        return cols

    def _check_bound(self, b):
        for g in self.gates:
            if g.param is not None and g.param not in b:
                raise UnboundParameterError(f"parameter {g.param!r} is unbound")

    def to_dict(self):
        gates = []
        for g in self.gates:
            d = {"kind": g.kind, "qubits": list(g.qubits)}
            if g.kind == "PauliRotation":
                d["generator"] = [[c, s.axes] for c, s in g.generator.terms]
                if g.param is not None:
                    d["param"] = g.param
                    d["scale"] = g.scale
                else:
                    d["angle"] = g.angle
            gates.append(d)
        return {
            "n": self.n,
            "gates": gates,
            "params": list(self.params),
            "bindings": {p: self.bindings[p] for p in self.params if p in self.bindings},
        }

    @classmethod
    def from_dict(cls, data):
        try:
            n = int(data["n"])
            gates = []
            for i, d in enumerate(data["gates"]):
                kind = d["kind"]
                if kind == "PauliRotation":
                    gen = PauliSum(n, [(c, PauliString(s)) for c, s in d["generator"]])
                    g = Gate.rotation(
                        gen, d.get("angle"), d.get("param"), float(d.get("scale", 1.0))
                    )
                    if list(g.qubits) != [int(q) for q in d.get("qubits", g.qubits)]:
                        raise ValueError(f"gate {i}: qubits disagree with generator support")
                else:
                    g = Gate(kind, tuple(d["qubits"]))
                gates.append(g)
            return cls(n, gates, data.get("params"), data.get("bindings"))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"invalid circuit description: {exc}") from exc

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, text):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, exc.lineno, exc.colno) from exc
        return cls.from_dict(data)


def load_circuit(path):
    path = Path(path)
    try:
        return Circuit.from_json(path.read_text())
    except ParseError as exc:
        raise ParseError(str(exc), exc.line, exc.column, str(path)) from exc


def evaluate_circuit(c, bindings=None, psi0=None):
    """Apply every gate of ``c`` in order to ``psi0`` (default ``|0...0>``)."""
    b = c.resolve(bindings)
    c._check_bound(b)
    if psi0 is None:
        psi0 = StateVector.zero(c.n)
    if psi0.n != c.n:
        raise DimensionMismatchError(f"circuit on {c.n} qubits, state on {psi0.n}")
    psi = np.ascontiguousarray(psi0.amplitudes)
    for g in c.gates:
        psi = apply_gate_array(psi, c.n, g, b)
    return StateVector(psi, check=False)


def _evolution_gates(h, param, factor):
    """Gates realizing exp(-i * t * h) with t = bindings[param] * factor."""
    if h.is_commuting():
        return [
            Gate.rotation(PauliSum(h.n, [(1.0, s)]), param=param, scale=2.0 * factor * c)
            for c, s in h.terms
        ]
    return [Gate.rotation(h, param=param, scale=2.0 * factor)]


def driver_hamiltonian(n):
    """Transverse-field mixer sum_q X_q."""
    return PauliSum(n, [(1.0, PauliString.from_sparse(n, {q: "X"})) for q in range(n)])


def build_qaoa(h_p, h_d=None, p=1, betas=None, gammas=None):
    """Alternating-operator ansatz prod_j exp(-i beta_j H_d) exp(-i gamma_j H_p).

    Round 1 acts first. Parameters are ordered gamma_1, beta_1, gamma_2, ...
    Evaluate on ``StateVector.plus(n)`` for the conventional start.
    """
    if h_d is None:
        h_d = driver_hamiltonian(h_p.n)
    if h_p.n != h_d.n:
        raise DimensionMismatchError(f"H_p has {h_p.n} qubits, H_d has {h_d.n}")
    if p < 1:
        raise ValueError("QAOA needs p >= 1 rounds")
    betas = np.zeros(p) if betas is None else np.asarray(betas, dtype=float)
    gammas = np.zeros(p) if gammas is None else np.asarray(gammas, dtype=float)
    if betas.shape != (p,) or gammas.shape != (p,):
        raise ValueError(f"need {p} betas and {p} gammas")
    if not commutator(h_p, h_d):
        warnings.warn("driver commutes with the problem Hamiltonian; the ansatz is trivial",
                      stacklevel=2)
    gates, params, bindings = [], [], {}
    for j in range(1, p + 1):
        g, b = f"gamma_{j}", f"beta_{j}"
        gates += _evolution_gates(h_p, g, 1.0)
        gates += _evolution_gates(h_d, b, 1.0)
        params += [g, b]
        bindings[g] = gammas[j - 1]
        bindings[b] = betas[j - 1]
    return Circuit(h_p.n, gates, params, bindings)


def ring_hamiltonian(n, weight=1.0):
    """sum_i Z_i Z_{i+1} around an n-node ring (the MaxCut 'ring of disagrees')."""
    terms = [
        (weight, PauliString.from_sparse(n, {i: "Z", (i + 1) % n: "Z"})) for i in range(n)
    ]
    return PauliSum(n, terms)


def build_hardware_efficient(n, layers, params=None):
    """``layers`` x (R_y on every qubit, then CZ on (0,1), (1,2), ...)."""
    if layers < 1:
        raise ValueError("need at least one layer")
    names = [f"theta_{i}" for i in range(n * layers)]
    if params is None:
        params = np.zeros(n * layers)
    params = np.asarray(params, dtype=float).reshape(-1)
    if params.shape[0] != n * layers:
        raise DimensionMismatchError(
            f"hardware-efficient ansatz needs {n * layers} parameters, got {params.shape[0]}"
        )
    gates = []
    k = 0
    for _ in range(layers):
        for q in range(n):
            gates.append(Gate.ry(n, q, param=names[k]))
            k += 1
        for q in range(n - 1):
            gates.append(Gate.cz(q, q + 1))
    return Circuit(n, gates, names, dict(zip(names, params.tolist())))


def build_h2_circuit(theta=0.0):
    """Four-qubit H2 ansatz: R_y/H/X column, then a CZ/H staircase down the wires.

    Wire 0 is the top wire and the most significant bit. Starting from
    ``|0000>`` the gates as drawn produce
    ``cos(theta/2)|0010> + sin(theta/2)|1101>``: a two-state family of the
    same shape as ``cos|0011> + sin|1100>`` but on different basis labels.
    """
    gates = [
        Gate.ry(4, 0, param="theta"),
        Gate.h(1),
        Gate.x(2),
        Gate.x(3),
        Gate.cz(0, 1),
        Gate.h(1),
        Gate.h(2),
        Gate.cz(1, 2),
        Gate.h(2),
        Gate.h(3),
        Gate.cz(2, 3),
        Gate.h(3),
    ]
    return Circuit(4, gates, ["theta"], {"theta": theta})
