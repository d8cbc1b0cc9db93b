"""Pauli strings and real-weighted sums of them.

Qubit 0 is the leftmost tensor factor and the most significant bit of a basis
index. Sums are kept canonical: one term per string, |coefficient| >= 1e-12,
terms sorted lexicographically on their axis labels.
"""

from dataclasses import dataclass
from functools import cached_property, lru_cache, reduce
from pathlib import Path

import numpy as np

from .errors import DimensionMismatchError, ParseError, check_dense

AXES = "IXYZ"
DROP_TOL = 1e-12

_MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# single-qubit products a*b = phase * c
_MUL = {}
for _a in AXES:
    _MUL["I", _a] = (1, _a)
    _MUL[_a, "I"] = (1, _a)
    _MUL[_a, _a] = (1, "I")
for _a, _b, _c in (("X", "Y", "Z"), ("Y", "Z", "X"), ("Z", "X", "Y")):
    _MUL[_a, _b] = (1j, _c)
    _MUL[_b, _a] = (-1j, _c)


@dataclass(frozen=True, order=True)
class PauliString:
    """Tensor product of single-qubit Paulis, e.g. ``PauliString("ZZI")``."""

    axes: str

    def __post_init__(self):
        if not self.axes:
            raise ValueError("a Pauli string needs at least one qubit")
        bad = set(self.axes) - set(AXES)
        if bad:
            raise ValueError(f"invalid Pauli axes {sorted(bad)} in {self.axes!r}")

    @classmethod
    def identity(cls, n):
        return cls("I" * n)

    @classmethod
    def from_sparse(cls, n, ops):
        """Build from ``{qubit: axis}``; e.g. ``from_sparse(3, {0: "Z", 2: "X"})`` is ZIX."""
        axes = ["I"] * n
        for q, a in ops.items():
            if not 0 <= q < n:
                raise ValueError(f"qubit {q} out of range for n={n}")
            axes[q] = a
        return cls("".join(axes))

    @property
    def n(self):
        return len(self.axes)

    @property
    def weight(self):
        return sum(a != "I" for a in self.axes)

    @property
    def support(self):
        return tuple(q for q, a in enumerate(self.axes) if a != "I")

    def is_identity(self):
        return self.weight == 0

    @cached_property
    def masks(self):
        """(xmask, zmask, ny) for the bit-level action on basis states."""
        xmask = zmask = 0
        ny = 0
        for q, a in enumerate(self.axes):
            bit = 1 << (self.n - 1 - q)
            if a in "XY":
                xmask |= bit
            if a in "ZY":
                zmask |= bit
            if a == "Y":
                ny += 1
        return xmask, zmask, ny

    def commutes_with(self, other):
        anti = sum(
            a != "I" and b != "I" and a != b for a, b in zip(self.axes, other.axes)
        )
        return anti % 2 == 0

    def to_dense(self):
        check_dense(self.n)
        return _string_dense(self.axes)

    def __str__(self):
        return self.axes


@lru_cache(maxsize=4096)
def _string_dense(axes):
    m = reduce(np.kron, (_MATS[a] for a in axes))
    m.setflags(write=False)
    return m


def pauli_mul(a, b):
    """Return ``(phase, c)`` with ``a @ b == phase * c`` and phase in {1, -1, 1j, -1j}."""
    if a.n != b.n:
        raise DimensionMismatchError(f"cannot multiply {a.n}- and {b.n}-qubit strings")
    phase = 1
    out = []
    for x, y in zip(a.axes, b.axes):
        p, c = _MUL[x, y]
        phase *= p
        out.append(c)
    return phase, PauliString("".join(out))


class PauliSum:
    """Hermitian operator ``sum_j alpha_j P_j`` with real ``alpha_j``.

    Instances are immutable and always canonical, so equality and hashing
    compare term lists directly.
    """

    __slots__ = ("n", "terms", "_hash")

    def __init__(self, n, terms=()):
        if n < 1:
            raise ValueError("qubit count must be positive")
        acc = {}
        for coef, s in terms:
            if isinstance(s, str):
                s = PauliString(s)
            if s.n != n:
                raise DimensionMismatchError(
                    f"term {s.axes!r} has {s.n} qubits, expected {n}"
                )
            c = complex(coef)
            if abs(c.imag) > DROP_TOL:
                raise ValueError(f"coefficient {coef!r} of {s} is not real")
            acc[s] = acc.get(s, 0.0) + c.real
        self.n = n
        self.terms = tuple(
            (c, s) for s, c in sorted(acc.items(), key=lambda kv: kv[0].axes)
            if abs(c) >= DROP_TOL
        )
        self._hash = None

    @classmethod
    def from_string(cls, label, coef=1.0):
        s = PauliString(label)
        return cls(s.n, [(coef, s)])

    @classmethod
    def zero(cls, n):
        return cls(n)

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n, self.terms))
        return self._hash

    def __repr__(self):
        if not self.terms:
            return f"PauliSum(n={self.n}, 0)"
        body = " + ".join(f"{c:g}*{s}" for c, s in self.terms)
        return f"PauliSum({body})"

    def _check(self, other):
        if other.n != self.n:
            raise DimensionMismatchError(f"qubit counts differ: {self.n} vs {other.n}")

    def __add__(self, other):
        if not isinstance(other, PauliSum):
            return NotImplemented
        self._check(other)
        return PauliSum(self.n, self.terms + other.terms)

    def __sub__(self, other):
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self + (-other)

    def __neg__(self):
        return self * -1.0

    def __mul__(self, scalar):
        scalar = float(scalar)
        return PauliSum(self.n, [(scalar * c, s) for c, s in self.terms])

    __rmul__ = __mul__

    @property
    def coefficients(self):
        return np.array([c for c, _ in self.terms])

    @property
    def strings(self):
        return [s for _, s in self.terms]

    def coefficient(self, label):
        label = label.axes if isinstance(label, PauliString) else label
        for c, s in self.terms:
            if s.axes == label:
                return c
        return 0.0

    def identity_coefficient(self):
        return self.coefficient("I" * self.n)

    def traceless(self):
        return PauliSum(self.n, [(c, s) for c, s in self.terms if not s.is_identity()])

    def is_commuting(self):
        """True when every pair of terms commutes."""
        strs = self.strings
        return all(
            strs[i].commutes_with(strs[j])
            for i in range(len(strs)) for j in range(i + 1, len(strs))
        )

    def commutes_with(self, other):
        return not commutator(self, other)

    def to_dense(self, cap=None):
        return to_dense(self, cap)

    def to_text(self):
        return "".join(f"{c!r} {s.axes}\n" for c, s in self.terms)


def commutator(a, b):
    """Return ``C`` with ``[A, B] = i * C``; ``C`` is real-weighted."""
    a._check(b)
    out = []
    for ca, sa in a.terms:
        for cb, sb in b.terms:
            if sa.commutes_with(sb):
                continue
            # anticommuting: [P, Q] = 2 P Q = 2 * phase * R with phase = +-i
            phase, r = pauli_mul(sa, sb)
            out.append((2.0 * ca * cb * (phase / 1j).real, r))
    return PauliSum(a.n, out)


def to_dense(h, cap=None):
    """Dense ``2**n x 2**n`` complex matrix of ``h``."""
    check_dense(h.n, cap)
    dim = 1 << h.n
    m = np.zeros((dim, dim), dtype=complex)
    for c, s in h.terms:
        m += c * _string_dense(s.axes)
    return m


def lambda_norm(h):
    """Sum of absolute Pauli coefficients."""
    return float(sum(abs(c) for c, _ in h.terms))


def parse_pauli_sum(text, source=None):
    """Parse ``<coefficient> <axes>`` lines; ``#`` starts a comment."""
    terms = []
    n = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(
                "expected '<coefficient> <axes>'", lineno, raw.find(line) + 1, source
            )
        try:
            coef = float(parts[0])
        except ValueError:
            raise ParseError(f"bad coefficient {parts[0]!r}", lineno, 1, source) from None
        if not np.isfinite(coef):
            raise ParseError(f"non-finite coefficient {parts[0]!r}", lineno, 1, source)
        axes = parts[1].upper()
        col = raw.find(parts[1]) + 1
        if set(axes) - set(AXES):
            raise ParseError(f"invalid Pauli axes {parts[1]!r}", lineno, col, source)
        if n is None:
            n = len(axes)
        elif len(axes) != n:
            raise ParseError(
                f"axes {parts[1]!r} has length {len(axes)}, expected {n}", lineno, col, source
            )
        terms.append((coef, PauliString(axes)))
    if n is None:
        raise ParseError("no terms found; qubit count cannot be inferred", source=source)
    return PauliSum(n, terms)


def load_pauli_sum(path):
    path = Path(path)
    return parse_pauli_sum(path.read_text(), source=str(path))


def save_pauli_sum(h, path):
    Path(path).write_text(h.to_text())
