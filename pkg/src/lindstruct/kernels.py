"""Hot kernels: superoperator assembly.

The compiled extension ``lindstruct._kernels`` is used when it was built and
importable; otherwise the numpy implementations below are used.  Set the
environment variable ``LINDSTRUCT_PURE_PYTHON=1`` to force the fallback.
``BACKEND`` reports which one is active.
"""
from __future__ import annotations

import os

import numpy as np


def lindblad_matrix_py(hamiltonian: np.ndarray, ops: np.ndarray) -> np.ndarray:
    d = hamiltonian.shape[0]
    eye = np.eye(d, dtype=complex)
    k = np.einsum("ami,amk->ik", ops.conj(), ops) if len(ops) else np.zeros((d, d), complex)
    geff = -1j * hamiltonian - 0.5 * k
    out = np.kron(eye, geff) + np.kron(geff.conj(), eye)
    for h in ops:
        out += np.kron(h.conj(), h)
    return out


def sandwich_matrix_py(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(b.T, a)


_lindblad_impl = lindblad_matrix_py
_sandwich_impl = sandwich_matrix_py
BACKEND = "python"

if not os.environ.get("LINDSTRUCT_PURE_PYTHON"):
    try:
        from ._kernels import lindblad_matrix as _lindblad_impl  # type: ignore[no-redef]
        from ._kernels import sandwich_matrix as _sandwich_impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        pass


def _prep(hamiltonian, ops):
    h = np.ascontiguousarray(hamiltonian, dtype=np.complex128)
    d = h.shape[0]
    if len(ops):
        o = np.ascontiguousarray(np.stack([np.asarray(x, dtype=np.complex128) for x in ops]))
    else:
        o = np.zeros((0, d, d), dtype=np.complex128)
    return h, o


def lindblad_matrix(hamiltonian, ops) -> np.ndarray:
    """d^2 x d^2 matrix of the Lindblad generator (column-stacking convention)."""
    h, o = _prep(hamiltonian, ops)
    return _lindblad_impl(h, o)


def sandwich_matrix(a, b) -> np.ndarray:
    """Matrix of X -> a X b."""
    return _sandwich_impl(np.ascontiguousarray(a, dtype=np.complex128),
                          np.ascontiguousarray(b, dtype=np.complex128))
