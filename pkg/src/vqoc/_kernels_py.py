"""Numpy implementations of the statevector kernels.

Same signatures and semantics as the compiled ``_kernels`` module; used when
the extension is not built or ``VQOC_PURE_PYTHON`` is set.
"""

from functools import lru_cache

import numpy as np

_I_POW = (1.0, 1.0j, -1.0, -1.0j)


@lru_cache(maxsize=64)
def _indices(dim):
    idx = np.arange(dim, dtype=np.uint64)
    idx.setflags(write=False)
    return idx


@lru_cache(maxsize=256)
def _parity_sign(dim, zmask):
    """(-1)**popcount(x & zmask) for every basis index x."""
    bits = _indices(dim) & np.uint64(zmask)
    parity = np.zeros(dim, dtype=np.uint64)
    while bits.any():
        parity ^= bits & np.uint64(1)
        bits = bits >> np.uint64(1)
    sign = 1.0 - 2.0 * parity.astype(np.float64)
    sign.setflags(write=False)
    return sign


def _flip(dim, xmask):
    return (_indices(dim) ^ np.uint64(xmask)).astype(np.intp)


def apply_pauli(psi, xmask, zmask, ny):
    dim = psi.shape[0]
    out = np.empty_like(psi)
    out[_flip(dim, xmask)] = _I_POW[ny & 3] * _parity_sign(dim, zmask) * psi
    return out


def expect_pauli(psi, xmask, zmask, ny):
    dim = psi.shape[0]
    flipped = psi[_flip(dim, xmask)]
    return _I_POW[ny & 3] * np.sum(np.conj(flipped) * _parity_sign(dim, zmask) * psi)


def pauli_rotation(psi, xmask, zmask, ny, theta):
    p_psi = apply_pauli(psi, xmask, zmask, ny)
    return np.cos(0.5 * theta) * psi - 1j * np.sin(0.5 * theta) * p_psi


def apply_1q(psi, n, q, u):
    t = psi.reshape((1 << q, 2, 1 << (n - 1 - q)))
    return np.einsum("ab,ibj->iaj", u, t).reshape(-1)


def apply_cz(psi, n, q1, q2):
    dim = psi.shape[0]
    m = np.uint64((1 << (n - 1 - q1)) | (1 << (n - 1 - q2)))
    out = psi.copy()
    out[(_indices(dim) & m) == m] *= -1.0
    return out
