# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled statevector kernels.

Every routine takes a contiguous complex128 amplitude vector and returns a new
array; inputs are never written. Qubit ``q`` of an ``n``-qubit register lives
at bit ``n - 1 - q`` of the basis index.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin

cnp.import_array()

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


cdef inline double complex _i_pow(int k) nogil:
    k = k & 3
    if k == 0:
        return 1.0
    elif k == 1:
        return 1.0j
    elif k == 2:
        return -1.0
    return -1.0j


def apply_pauli(const double complex[::1] psi, unsigned long long xmask,
                unsigned long long zmask, int ny):
    cdef Py_ssize_t dim = psi.shape[0]
    out = np.empty(dim, dtype=np.complex128)
    cdef double complex[::1] o = out
    cdef double complex ph = _i_pow(ny)
    cdef unsigned long long x
    with nogil:
        for x in range(<unsigned long long>dim):
            if __builtin_popcountll(x & zmask) & 1:
                o[x ^ xmask] = -ph * psi[x]
            else:
                o[x ^ xmask] = ph * psi[x]
    return out


def expect_pauli(const double complex[::1] psi, unsigned long long xmask,
                 unsigned long long zmask, int ny):
    cdef Py_ssize_t dim = psi.shape[0]
    cdef double complex acc = 0.0
    cdef double complex term
    cdef unsigned long long x
    cdef double complex a, b
    with nogil:
        for x in range(<unsigned long long>dim):
            a = psi[x ^ xmask]
            b = psi[x]
            term = (a.real - 1j * a.imag) * b
            if __builtin_popcountll(x & zmask) & 1:
                acc = acc - term
            else:
                acc = acc + term
    return acc * _i_pow(ny)


def pauli_rotation(const double complex[::1] psi, unsigned long long xmask,
                   unsigned long long zmask, int ny, double theta):
    cdef Py_ssize_t dim = psi.shape[0]
    out = np.empty(dim, dtype=np.complex128)
    cdef double complex[::1] o = out
    cdef double c = cos(0.5 * theta)
    cdef double complex ms = -1j * sin(0.5 * theta) * _i_pow(ny)
    cdef unsigned long long x, y
    with nogil:
        for x in range(<unsigned long long>dim):
            y = x ^ xmask
            # (P psi)[x] = phase(y) * psi[y]
            if __builtin_popcountll(y & zmask) & 1:
                o[x] = c * psi[x] - ms * psi[y]
            else:
                o[x] = c * psi[x] + ms * psi[y]
    return out


def apply_1q(const double complex[::1] psi, int n, int q,
             const double complex[:, ::1] u):
    cdef Py_ssize_t dim = psi.shape[0]
    out = np.empty(dim, dtype=np.complex128)
    cdef double complex[::1] o = out
    cdef unsigned long long bit = 1ULL << (n - 1 - q)
    cdef unsigned long long x
    cdef double complex a0, a1
    cdef double complex u00 = u[0, 0], u01 = u[0, 1], u10 = u[1, 0], u11 = u[1, 1]
    with nogil:
        for x in range(<unsigned long long>dim):
            if x & bit:
                continue
            a0 = psi[x]
            a1 = psi[x | bit]
            o[x] = u00 * a0 + u01 * a1
            o[x | bit] = u10 * a0 + u11 * a1
    return out


def apply_cz(const double complex[::1] psi, int n, int q1, int q2):
    cdef Py_ssize_t dim = psi.shape[0]
    out = np.empty(dim, dtype=np.complex128)
    cdef double complex[::1] o = out
    cdef unsigned long long m = (1ULL << (n - 1 - q1)) | (1ULL << (n - 1 - q2))
    cdef unsigned long long x
    with nogil:
        for x in range(<unsigned long long>dim):
            if (x & m) == m:
                o[x] = -psi[x]
            else:
                o[x] = psi[x]
    return out
