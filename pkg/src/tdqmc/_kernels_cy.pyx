# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: batched Crank-Nicolson steps and ADI Cayley sweeps.

Contracts mirror _kernels_np; the selector in kernels.py picks whichever
import succeeds. Complex divisions are replaced by conjugate reciprocals
(the matrices are diagonally dominant with O(1) entries, so the naive
formula is safe).
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef inline double complex _cinv(double complex d) noexcept nogil:
    cdef double s = 1.0 / (d.real * d.real + d.imag * d.imag)
    return (s * d.real) - 1j * (s * d.imag)


def solve_tridiag_const_offdiag(double complex off,
                                double complex[:, :] diag,
                                double complex[:, ::1] rhs):
    """Thomas solve with scalar off-diagonals; one system per batch row."""
    cdef Py_ssize_t B = rhs.shape[0], n = rhs.shape[1]
    cdef Py_ssize_t db = 0 if diag.shape[0] == 1 else 1
    out = np.empty((B, n), dtype=np.complex128)
    cdef double complex[:, ::1] x = out
    cdef double complex[::1] cp = np.empty(n, dtype=np.complex128)
    cdef double complex invd, prev
    cdef Py_ssize_t b, i, d0
    with nogil:
        for b in range(B):
            d0 = b * db
            invd = _cinv(diag[d0, 0])
            cp[0] = off * invd
            prev = rhs[b, 0] * invd
            x[b, 0] = prev
            for i in range(1, n):
                invd = _cinv(diag[d0, i] - off * cp[i - 1])
                cp[i] = off * invd
                prev = (rhs[b, i] - off * prev) * invd
                x[b, i] = prev
            for i in range(n - 2, -1, -1):
                prev = x[b, i] - cp[i] * prev
                x[b, i] = prev
    return out


def cn_step_batch(double complex[:, ::1] psi,
                  double[:, :] V,
                  double dx, double dt, bint imag=False):
    """Fused RHS build + Thomas solve of one CN step per batch row."""
    cdef Py_ssize_t B = psi.shape[0], n = psi.shape[1]
    cdef Py_ssize_t vb = 0 if V.shape[0] == 1 else 1
    cdef double inv2 = 1.0 / (2.0 * dx * dx)
    cdef double two_inv2 = 2.0 * inv2
    cdef double complex z
    if imag:
        z = 0.5 * dt
    else:
        z = 0.5j * dt
    cdef double complex off = -z * inv2

    out = np.empty((B, n), dtype=np.complex128)
    cdef double complex[:, ::1] x = out
    cdef double complex[::1] cp = np.empty(n, dtype=np.complex128)
    cdef double complex invd, prev, r, left, mid, right
    cdef Py_ssize_t b, i, v0
    with nogil:
        for b in range(B):
            v0 = b * vb
            mid = psi[b, 0]
            right = psi[b, 1]
            r = mid - z * (-(right - 2.0 * mid) * inv2 + V[v0, 0] * mid)
            invd = _cinv(1.0 + z * (two_inv2 + V[v0, 0]))
            cp[0] = off * invd
            prev = r * invd
            x[b, 0] = prev
            for i in range(1, n - 1):
                left = psi[b, i - 1]
                mid = psi[b, i]
                right = psi[b, i + 1]
                r = mid - z * (-(left - 2.0 * mid + right) * inv2 + V[v0, i] * mid)
                invd = _cinv(1.0 + z * (two_inv2 + V[v0, i]) - off * cp[i - 1])
                cp[i] = off * invd
                prev = (r - off * prev) * invd
                x[b, i] = prev
            left = psi[b, n - 2]
            mid = psi[b, n - 1]
            r = mid - z * (-(left - 2.0 * mid) * inv2 + V[v0, n - 1] * mid)
            invd = _cinv(1.0 + z * (two_inv2 + V[v0, n - 1]) - off * cp[n - 2])
            prev = (r - off * prev) * invd
            x[b, n - 1] = prev
            for i in range(n - 2, -1, -1):
                prev = x[b, i] - cp[i] * prev
                x[b, i] = prev
    return out


def cayley_sweep_const(double complex[:, ::1] psi,
                       double dx, double dt, bint imag=False):
    """(I + z T)^-1 (I - z T) along the last axis; elimination coefficients
    are computed once and shared by every row."""
    cdef Py_ssize_t B = psi.shape[0], n = psi.shape[1]
    cdef double inv2 = 1.0 / (2.0 * dx * dx)
    cdef double complex z
    if imag:
        z = 0.5 * dt
    else:
        z = 0.5j * dt
    cdef double complex off = -z * inv2
    cdef double complex d0 = 1.0 + z * 2.0 * inv2

    out = np.empty((B, n), dtype=np.complex128)
    cdef double complex[:, ::1] x = out
    cdef double complex[::1] cp = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] invd = np.empty(n, dtype=np.complex128)
    cdef double complex prev, r, left, mid, right
    cdef Py_ssize_t b, i
    with nogil:
        invd[0] = _cinv(d0)
        cp[0] = off * invd[0]
        for i in range(1, n):
            invd[i] = _cinv(d0 - off * cp[i - 1])
            cp[i] = off * invd[i]
        for b in range(B):
            mid = psi[b, 0]
            right = psi[b, 1]
            r = mid + z * (right - 2.0 * mid) * inv2
            prev = r * invd[0]
            x[b, 0] = prev
            for i in range(1, n - 1):
                left = psi[b, i - 1]
                mid = psi[b, i]
                right = psi[b, i + 1]
                r = mid + z * (left - 2.0 * mid + right) * inv2
                prev = (r - off * prev) * invd[i]
                x[b, i] = prev
            left = psi[b, n - 2]
            mid = psi[b, n - 1]
            r = mid + z * (left - 2.0 * mid) * inv2
            prev = (r - off * prev) * invd[n - 1]
            x[b, n - 1] = prev
            for i in range(n - 2, -1, -1):
                prev = x[b, i] - cp[i] * prev
                x[b, i] = prev
    return out
