# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled assembly of Lindblad superoperator matrices.

Same contract as the numpy versions in ``lindstruct.kernels``; the entries are
written directly instead of summing Kronecker products, which avoids one
d^4 temporary per transfer operator.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef double complex cplx


def lindblad_matrix(const cplx[:, ::1] hamiltonian, const cplx[:, :, ::1] ops):
    """Matrix of rho -> -i[H, rho] + sum_a (h rho h^+ - 1/2 {h^+ h, rho}).

    Column-stacking convention: entry [i + d*j, k + d*l] is the coefficient of
    rho[k, l] in the (i, j) entry of the image.
    """
    cdef Py_ssize_t d = hamiltonian.shape[0]
    cdef Py_ssize_t n_ops = ops.shape[0]
    cdef Py_ssize_t a, i, j, k, l, m
    cdef cplx acc
    out_arr = np.zeros((d * d, d * d), dtype=np.complex128)
    cdef cplx[:, ::1] out = out_arr
    # effective non-Hermitian generator G = -iH - 1/2 sum h^+ h
    geff_arr = np.empty((d, d), dtype=np.complex128)
    cdef cplx[:, ::1] geff = geff_arr
    for i in range(d):
        for k in range(d):
            acc = 0
            for a in range(n_ops):
                for m in range(d):
                    acc = acc + ops[a, m, i].conjugate() * ops[a, m, k]
            geff[i, k] = -1j * hamiltonian[i, k] - 0.5 * acc

    for j in range(d):
        for i in range(d):
            for l in range(d):
                for k in range(d):
                    acc = 0
                    for a in range(n_ops):
                        acc = acc + ops[a, i, k] * ops[a, j, l].conjugate()
                    if j == l:
                        acc = acc + geff[i, k]
                    if i == k:
                        acc = acc + geff[j, l].conjugate()
                    out[i + d * j, k + d * l] = acc
    return out_arr


def sandwich_matrix(const cplx[:, ::1] a, const cplx[:, ::1] b):
    """Matrix of X -> a X b, i.e. kron(b.T, a)."""
    cdef Py_ssize_t d = a.shape[0]
    cdef Py_ssize_t i, j, k, l
    out_arr = np.empty((d * d, d * d), dtype=np.complex128)
    cdef cplx[:, ::1] out = out_arr
    for j in range(d):
        for l in range(d):
            for i in range(d):
                for k in range(d):
                    out[i + d * j, k + d * l] = a[i, k] * b[l, j]
    return out_arr
