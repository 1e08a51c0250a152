import os
import subprocess
import sys

import numpy as np
import pytest

from lindstruct import kernels
from lindstruct.generator import LindbladGenerator, apply_schrodinger
from lindstruct.randgen import random_generator

try:
    from lindstruct import _kernels
except ImportError:  # extension not built
    _kernels = None

needs_ext = pytest.mark.skipif(_kernels is None, reason="compiled extension not built")


def _stack(ops, d):
    return np.ascontiguousarray(np.stack(ops)) if ops else np.zeros((0, d, d), dtype=complex)


@pytest.mark.parametrize("d", [1, 2, 3, 5])
def test_python_kernel_matches_direct_action(d, rng):
    g = random_generator(rng, d, 3)
    m = kernels.lindblad_matrix_py(np.ascontiguousarray(g.hamiltonian), _stack(list(g.transfer_ops), d))
    x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    got = (m @ x.reshape(-1, order="F")).reshape(d, d, order="F")
    assert np.allclose(got, apply_schrodinger(g, x), atol=1e-12)


@needs_ext
@pytest.mark.parametrize("d,n_ops", [(1, 1), (2, 0), (3, 2), (6, 4)])
def test_backends_agree(d, n_ops, rng):
    g = random_generator(rng, d, max(n_ops, 1))
    ops = _stack(list(g.transfer_ops)[:n_ops], d)
    H = np.ascontiguousarray(g.hamiltonian)
    assert np.allclose(_kernels.lindblad_matrix(H, ops), kernels.lindblad_matrix_py(H, ops), atol=1e-14)
    a, b = np.ascontiguousarray(g.transfer_ops[0]), np.ascontiguousarray(H)
    assert np.allclose(_kernels.sandwich_matrix(a, b), kernels.sandwich_matrix_py(a, b), atol=1e-14)


@needs_ext
def test_compiled_kernel_accepts_read_only_buffers():
    g = LindbladGenerator(np.eye(2), (np.array([[0, 1], [0, 0]]),))
    assert not g.hamiltonian.flags.writeable
    assert g.superoperator.matrix.shape == (4, 4)


def test_backend_selection_env_var():
    env = dict(os.environ, LINDSTRUCT_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import lindstruct.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")
    if _kernels is not None and not os.environ.get("LINDSTRUCT_PURE_PYTHON"):
        assert kernels.BACKEND == "cython"
