"""Backend selection for the hot kernels.

The compiled extension (``tdqmc._kernels_cy``, built by setup_cython.py) is
preferred; the pure-numpy module is the fallback. Set TDQMC_FORCE_NUMPY=1 to
ignore an installed compiled core. ``benchmarks/bench_kernels.py`` compares
the two.
"""

import os

import numpy as np

from . import _kernels_np

_cy = None
if not os.environ.get("TDQMC_FORCE_NUMPY"):
    try:
        from . import _kernels_cy as _cy
    except ImportError:
        _cy = None

_impl = _cy if _cy is not None else _kernels_np
backend_name = "cython" if _cy is not None else "numpy"


def available_backends():
    """Mapping of backend name -> module, for benchmarks and parity tests."""
    out = {"numpy": _kernels_np}
    if _cy is not None:
        out["cython"] = _cy
    return out


def _as_c128(a):
    return np.ascontiguousarray(a, dtype=np.complex128)


def cn_step_batch(psi, V, dx, dt, imag=False, impl=None):
    """One Crank-Nicolson step of every row of psi (B, n) under potential V.

    V may be scalar, (n,), (1, n) or (B, n); rows of V broadcast over rows
    of psi.
    """
    impl = impl or _impl
    psi = _as_c128(psi)
    V = np.atleast_2d(np.asarray(V, dtype=np.float64))
    if V.shape[1] == 1 and psi.shape[1] != 1:  # scalar potential
        V = np.broadcast_to(V, (1, psi.shape[1]))
    V = np.ascontiguousarray(V)
    return impl.cn_step_batch(psi, V, float(dx), float(dt), bool(imag))


def cayley_sweep_const(psi, dx, dt, imag=False, impl=None):
    """Free-particle Cayley factor along the last axis of psi (B, n)."""
    impl = impl or _impl
    return impl.cayley_sweep_const(_as_c128(psi), float(dx), float(dt), bool(imag))


def solve_tridiag_const_offdiag(off, diag, rhs, impl=None):
    """Batched Thomas solve; scalar off-diagonal, per-row diagonal and rhs."""
    impl = impl or _impl
    diag = np.ascontiguousarray(np.atleast_2d(diag), dtype=np.complex128)
    rhs = _as_c128(np.atleast_2d(rhs))
    return impl.solve_tridiag_const_offdiag(complex(off), diag, rhs)
