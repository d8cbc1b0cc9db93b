"""Dynamical Lie algebra closure and the Lie rank test.

Elements are real coefficient vectors over the ``4**n`` Pauli strings (with
the factor ``i`` absorbed, so ``iH`` is stored as ``H``). Brackets use the
Pauli structure constants directly; the identity direction is always
projected out, so dimensions count su(2**n) directions only.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import numpy as np

from .errors import DimensionMismatchError, UndeterminedError
from .pauli import AXES, PauliString, PauliSum

DEFAULT_MAX_QUBITS = 5
DEFAULT_MAX_ROUNDS = 64
INDEPENDENCE_TOL = 1e-10


@dataclass
class LieAlgebraReport:
    n: int
    dimension: int
    full_dimension: int
    controllable: bool
    basis: list = field(repr=False)
    generations: int
    truncated: bool

    def summary(self):
        return {
            "dimension": self.dimension,
            "full_dimension": self.full_dimension,
            "controllable": self.controllable,
            "generations": self.generations,
            "truncated": self.truncated,
        }


@lru_cache(maxsize=8)
def _structure_tables(n):
    """Product index and bracket weight for every ordered pair of basis strings.

    ``[P_a, P_b] = i * weight[a, b] * P_{prod[a, b]}``.
    """
    dim = 4 ** n
    # digit encoding I=0, X=1, Y=2, Z=3 -> (x, z) bits
    xbit = np.array([0, 1, 1, 0])
    zbit = np.array([0, 0, 1, 1])
    digits = np.array(list(product(range(4), repeat=n))).reshape(dim, n)
    xs = xbit[digits]
    zs = zbit[digits]
    px = xs[:, None, :] ^ xs[None, :, :]
    pz = zs[:, None, :] ^ zs[None, :, :]
    back = np.zeros((2, 2), dtype=np.int64)
    back[0, 0], back[1, 0], back[1, 1], back[0, 1] = 0, 1, 2, 3
    pdig = back[px, pz]
    powers = 4 ** np.arange(n - 1, -1, -1)
    prod_idx = (pdig * powers).sum(axis=-1)
    # single-qubit phase exponent (in units of i): +1 for XY, YZ, ZX; -1 reversed
    cyc = np.zeros((4, 4), dtype=np.int64)
    for a, b in ((1, 2), (2, 3), (3, 1)):
        cyc[a, b] = 1
        cyc[b, a] = -1
    k = cyc[digits[:, None, :], digits[None, :, :]].sum(axis=-1) % 4
    # anticommuting pairs have odd k; [P, Q] = 2 i^k R, so weight = 2 * i^(k-1)
    weight = np.where(k == 1, 2.0, np.where(k == 3, -2.0, 0.0))
    return prod_idx, weight


def to_vector(h):
    """Coefficient vector of ``h`` in lexicographic Pauli order."""
    v = np.zeros(4 ** h.n)
    for c, s in h.terms:
        idx = 0
        for a in s.axes:
            idx = 4 * idx + AXES.index(a)
        v[idx] = c
    return v


def from_vector(n, v):
    labels = ["".join(t) for t in product(AXES, repeat=n)]
    return PauliSum(n, [(v[i], PauliString(labels[i])) for i in np.flatnonzero(v)])


def bracket(n, u, v):
    """Coefficient vector ``w`` with ``[U, V] = i W``."""
    prod_idx, weight = _structure_tables(n)
    iu = np.flatnonzero(u)
    iv = np.flatnonzero(v)
    if iu.size == 0 or iv.size == 0:
        return np.zeros(4 ** n)
    w = weight[np.ix_(iu, iv)] * np.outer(u[iu], v[iv])
    return np.bincount(prod_idx[np.ix_(iu, iv)].ravel(), weights=w.ravel(), minlength=4 ** n)


class _Basis:
    def __init__(self, dim, tol):
        self.rows = np.zeros((0, dim))
        self.tol = tol

    def __len__(self):
        return self.rows.shape[0]

    def add(self, v):
        """Orthonormalize ``v`` against the basis; return the new element or None."""
        v = v.copy()
        v[0] = 0.0
        scale = np.linalg.norm(v)
        if scale == 0.0:
            return None
        r = v / scale
        for _ in range(2):
            r = r - self.rows.T @ (self.rows @ r)
        nr = np.linalg.norm(r)
        if nr <= self.tol:
            return None
        r = r / nr
        self.rows = np.vstack([self.rows, r])
        return r


def dynamical_lie_algebra(drift, controls, max_qubits=DEFAULT_MAX_QUBITS,
                          max_rounds=DEFAULT_MAX_ROUNDS, max_dimension=None,
                          tol=INDEPENDENCE_TOL, pair_check_limit=128):
    """Real Lie algebra generated by ``i*drift`` and ``i*controls``.

    Breadth-first: every round brackets the previous round's new elements with
    the original generators. When a round adds nothing and the algebra is
    small enough, all basis pairs are bracketed as a cross-check.
    """
    controls = list(controls)
    n = drift.n
    for h in controls:
        if h.n != n:
            raise DimensionMismatchError(f"control on {h.n} qubits, drift on {n}")
    full = 4 ** n - 1
    if n > max_qubits:
        return LieAlgebraReport(n, 0, full, False, [], 0, True)
    cap = full if max_dimension is None else min(max_dimension, full)
    basis = _Basis(4 ** n, tol)
    gens = []
    for h in [drift] + controls:
        v = to_vector(h)
        v[0] = 0.0
        if np.any(v):
            gens.append(v)
            basis.add(v)
    frontier = list(basis.rows)
    generations = 0
    truncated = False
    while frontier and len(basis) < cap:
        if generations >= max_rounds:
            truncated = True
            break
        generations += 1
        new = []
        for e in frontier:
            for g in gens:
                r = basis.add(bracket(n, e, g))
                if r is not None:
                    new.append(r)
                if len(basis) >= cap:
                    break
            if len(basis) >= cap:
                break
        if not new and len(basis) <= pair_check_limit:
            rows = list(basis.rows)
            for i in range(len(rows)):
                for j in range(i + 1, len(rows)):
                    r = basis.add(bracket(n, rows[i], rows[j]))
                    if r is not None:
                        new.append(r)
        frontier = new
    if len(basis) >= cap and cap < full:
        truncated = True
    dimension = len(basis)
    report_basis = [from_vector(n, np.where(np.abs(r) < 1e-14, 0.0, r)) for r in basis.rows]
    controllable = dimension == full and not truncated
    return LieAlgebraReport(n, dimension, full, controllable, report_basis, generations, truncated)


def is_fully_controllable(report):
    """Lie rank criterion: the algebra is all of su(2**n)."""
    if report.truncated:
        raise UndeterminedError("closure was truncated; controllability undetermined")
    return report.dimension == report.full_dimension
