"""Pure-numpy implementations of the hot propagation kernels.

Same contracts as the compiled versions in ``_kernels_cy.pyx``. The batched
tridiagonal recurrences vectorize across the batch axis and loop over the
grid axis in Python, which is the main speed gap the compiled core closes.
"""

import numpy as np


def solve_tridiag_const_offdiag(off, diag, rhs):
    """Thomas solve of symmetric-pattern tridiagonal systems, batched.

    Every system shares the scalar sub/super-diagonal ``off``; the diagonal
    ``diag`` and right-hand side ``rhs`` are (B, n) arrays, one system per row.
    """
    B, n = rhs.shape
    dtype = np.result_type(diag.dtype, rhs.dtype, np.asarray(off).dtype)
    cp = np.empty((B, n), dtype=dtype)
    x = np.empty((B, n), dtype=dtype)
    cp[:, 0] = off / diag[:, 0]
    x[:, 0] = rhs[:, 0] / diag[:, 0]
    for i in range(1, n):
        denom = diag[:, i] - off * cp[:, i - 1]
        cp[:, i] = off / denom
        x[:, i] = (rhs[:, i] - off * x[:, i - 1]) / denom
    for i in range(n - 2, -1, -1):
        x[:, i] -= cp[:, i] * x[:, i + 1]
    return x


def cn_step_batch(psi, V, dx, dt, imag=False):
    """One Crank-Nicolson step for a batch of 1D waves with per-wave potentials.

    Solves (I + z H) psi' = (I - z H) psi row by row, where
    H = -1/2 d^2/dx^2 + diag(V) on a hard-wall grid and z = i dt/2 in real
    time or dt/2 in imaginary time.
    """
    B, n = psi.shape
    z = (0.5 * dt + 0.0j) if imag else 0.5j * dt
    inv2 = 1.0 / (2.0 * dx * dx)
    off = -z * inv2
    diag = 1.0 + z * (2.0 * inv2 + V)

    hpsi = np.empty_like(psi)
    hpsi[:, 1:-1] = -(psi[:, :-2] - 2.0 * psi[:, 1:-1] + psi[:, 2:]) * inv2
    hpsi[:, 0] = -(psi[:, 1] - 2.0 * psi[:, 0]) * inv2
    hpsi[:, -1] = -(psi[:, -2] - 2.0 * psi[:, -1]) * inv2
    rhs = psi - z * (hpsi + V * psi)

    return solve_tridiag_const_offdiag(off, diag, rhs)


def cayley_sweep_const(psi, dx, dt, imag=False):
    """Apply the free-particle Cayley factor (I + z T)^-1 (I - z T) along the
    last axis of a batch; T = -1/2 d^2/dx^2 with hard walls.

    Used for the alternating-direction sweeps of the two-body solver, where
    the tridiagonal matrix is identical for every row.
    """
    zeros = np.zeros((1, psi.shape[1]))
    return cn_step_batch(psi, zeros, dx, dt, imag=imag)
