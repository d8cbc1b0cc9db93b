"""Independent oracles shared by the test modules.

Nothing here calls into the package's dense realizations: Pauli matrices are
built from explicit Kronecker products and exponentials use scipy's
scaling-and-squaring ``expm``.
"""

from functools import reduce

import numpy as np
import pytest
from scipy.linalg import expm

from vqoc.pauli import PauliString, PauliSum

SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def kron_all(mats):
    return reduce(np.kron, mats)


def dense_string(axes):
    return kron_all([SINGLE[a] for a in axes])


def dense_sum(terms, n):
    m = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for c, axes in terms:
        m += c * dense_string(axes)
    return m


def dense_of(h):
    return dense_sum([(c, s.axes) for c, s in h.terms], h.n)


def expm_oracle(matrix, t):
    return expm(-1j * t * np.asarray(matrix))


def random_string(rng, n):
    return "".join(rng.choice(list("IXYZ"), size=n))


def random_sum(rng, n, terms, traceless=False):
    out = []
    for _ in range(terms):
        axes = random_string(rng, n)
        if traceless and set(axes) == {"I"}:
            axes = "Z" + axes[1:]
        out.append((float(rng.normal()), PauliString(axes)))
    return PauliSum(n, out)


def on_qubit(u, q, n):
    """Embed a 2x2 ``u`` on qubit ``q`` (qubit 0 = leftmost factor)."""
    mats = [np.eye(2, dtype=complex)] * n
    mats[q] = u
    return kron_all(mats)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def cz_oracle(n, a, b):
    d = np.ones(2 ** n, dtype=complex)
    for i in range(2 ** n):
        bits = format(i, f"0{n}b")
        if bits[a] == "1" and bits[b] == "1":
            d[i] = -1
    return np.diag(d)


def ry_matrix(theta):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)
