"""Dense complex linear algebra on matrices and superoperators.

Conventions
-----------
Matrices are plain ``numpy`` arrays of dtype ``complex128``.  A superoperator
acts on ``vec(X)``, the column-stacking of ``X``; under this convention the map
``X -> A X B`` has the matrix ``kron(B.T, A)``.  Every module in the package
uses this convention, nothing else is supported.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from . import kernels
from .errors import DimensionError, NotAProjectorError


@dataclass(frozen=True)
class Tolerance:
    """Numerical thresholds used for every rank, equality and clustering decision.

    rank_tol
        Relative singular-value cutoff for null spaces and ranks.
    match_tol
        Spectral-norm threshold for "these matrices are equal".
    eig_group_tol
        Relative distance under which eigenvalues are treated as one cluster,
        also used to decide membership of the imaginary axis.
    """

    rank_tol: float = 1e-9
    match_tol: float = 1e-8
    eig_group_tol: float = 1e-7

    def __post_init__(self):
        for name in ("rank_tol", "match_tol", "eig_group_tol"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")


DEFAULT_TOL = Tolerance()


def as_matrix(x, name: str = "matrix") -> np.ndarray:
    a = np.asarray(x, dtype=complex)
    if a.ndim != 2:
        raise DimensionError(f"{name} must be two-dimensional, got shape {a.shape}")
    return a


def as_square(x, name: str = "matrix") -> np.ndarray:
    a = as_matrix(x, name)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {a.shape}")
    return a


def dag(x: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(x, -1, -2))


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product Tr[a^dagger b], conjugate-linear in ``a``."""
    a = as_square(a, "a")
    b = as_square(b, "b")
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def hs_norm(a) -> float:
    return float(np.linalg.norm(np.asarray(a)))


def op_norm(a) -> float:
    """Spectral norm (largest singular value)."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def vectorize(x) -> np.ndarray:
    """Column-stacking vectorization."""
    x = as_square(x, "x")
    return x.reshape(-1, order="F")


def unvectorize(v, d: int | None = None) -> np.ndarray:
    v = np.asarray(v, dtype=complex).ravel()
    n = v.shape[0]
    if d is None:
        d = math.isqrt(n)
    if d * d != n:
        raise DimensionError(f"vector length {n} is not {d}^2")
    return v.reshape((d, d), order="F")


@dataclass(frozen=True, eq=False)
class Superoperator:
    """Linear map on d x d matrices stored as a d^2 x d^2 matrix on column-stacked vectors."""

    dim: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        n = self.dim * self.dim
        if m.shape != (n, n):
            raise DimensionError(f"superoperator on dim {self.dim} needs shape {(n, n)}, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls, d: int) -> "Superoperator":
        return cls(d, np.eye(d * d, dtype=complex))

    @classmethod
    def zero(cls, d: int) -> "Superoperator":
        return cls(d, np.zeros((d * d, d * d), dtype=complex))

    @classmethod
    def from_function(cls, f: Callable[[np.ndarray], np.ndarray], d: int) -> "Superoperator":
        """Tabulate a linear map by applying it to the matrix units."""
        cols = []
        for k in range(d * d):
            unit = np.zeros(d * d, dtype=complex)
            unit[k] = 1.0
            cols.append(vectorize(f(unvectorize(unit, d))))
        return cls(d, np.column_stack(cols))

    def apply(self, x) -> np.ndarray:
        x = as_square(x, "x")
        if x.shape[0] != self.dim:
            raise DimensionError(f"operand has dim {x.shape[0]}, superoperator has dim {self.dim}")
        return unvectorize(self.matrix @ vectorize(x), self.dim)

    __call__ = apply

    def adjoint(self) -> "Superoperator":
        """Adjoint with respect to the Hilbert-Schmidt inner product."""
        return Superoperator(self.dim, self.matrix.conj().T)

    def norm(self) -> float:
        return op_norm(self.matrix)

    def _check(self, other: "Superoperator"):
        if not isinstance(other, Superoperator) or other.dim != self.dim:
            raise DimensionError("superoperators act on different spaces")

    def __add__(self, other):
        self._check(other)
        return Superoperator(self.dim, self.matrix + other.matrix)

    def __sub__(self, other):
        self._check(other)
        return Superoperator(self.dim, self.matrix - other.matrix)

    def __neg__(self):
        return Superoperator(self.dim, -self.matrix)

    def __mul__(self, scalar):
        return Superoperator(self.dim, self.matrix * complex(scalar))

    __rmul__ = __mul__

    def __matmul__(self, other):
        self._check(other)
        return Superoperator(self.dim, self.matrix @ other.matrix)


def sandwich_superop(a, b) -> Superoperator:
    """Superoperator of X -> a X b."""
    a = as_square(a, "a")
    b = as_square(b, "b")
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    return Superoperator(a.shape[0], kernels.sandwich_matrix(a, b))


def expm(s: Superoperator, t: float = 1.0) -> Superoperator:
    """exp(t * s) by scaling and squaring (scipy)."""
    t = float(t)
    if not math.isfinite(t):
        raise ValueError(f"time must be finite, got {t}")
    if t == 0.0:
        return Superoperator.identity(s.dim)
    return Superoperator(s.dim, scipy.linalg.expm(t * s.matrix))


def _phase_fix(v: np.ndarray, rel: float = 1e-10) -> np.ndarray:
    """Rotate ``v`` so that its first non-negligible component is real positive."""
    scale = np.max(np.abs(v)) if v.size else 0.0
    if scale == 0.0:
        return v
    idx = int(np.argmax(np.abs(v) > rel * scale))
    return v * (np.conj(v[idx]) / abs(v[idx]))


def canonical_basis(vectors: np.ndarray, rank: int | None = None) -> np.ndarray:
    """Deterministic orthonormal basis of the column span of ``vectors``.

    The result depends only on the subspace, not on the particular spanning set:
    the orthogonal projector onto the span is formed and its columns are
    orthogonalized greedily, always taking the column with the largest residual
    (first one on ties).  Each vector gets its first non-negligible component
    real and positive.
    """
    v = np.asarray(vectors, dtype=complex)
    if v.ndim == 1:
        v = v[:, None]
    n = v.shape[0]
    if rank is None:
        rank = v.shape[1]
    if rank == 0 or v.shape[1] == 0:
        return np.zeros((n, 0), dtype=complex)
    q = np.linalg.svd(v, full_matrices=False)[0][:, :rank]
    resid = q @ q.conj().T
    out = []
    for _ in range(rank):
        norms = np.linalg.norm(resid, axis=0)
        top = norms.max()
        idx = int(np.argmax(norms >= (1.0 - 1e-8) * top))
        w = resid[:, idx] / norms[idx]
        # re-orthogonalize against accepted vectors to stay orthonormal to 1e-15
        for u in out:
            w = w - u * np.vdot(u, w)
        w = w / np.linalg.norm(w)
        w = _phase_fix(w)
        out.append(w)
        resid = resid - np.outer(w, w.conj() @ resid)
    return np.column_stack(out)


def null_space_matrix(m, tol: Tolerance = DEFAULT_TOL, scale: float = 0.0) -> np.ndarray:
    """Null space as the columns of an ``n x k`` array (see :func:`null_space`).

    ``scale`` sets a floor for the reference size; pass the norm of the parent
    operator when ``m`` is a compression of it that may be zero up to rounding.
    """
    m = as_matrix(m, "m")
    rows, cols = m.shape
    if cols == 0:
        return np.zeros((0, 0), dtype=complex)
    if rows == 0:
        return np.eye(cols, dtype=complex)
    _, s, vh = np.linalg.svd(m, full_matrices=True)
    smax = max(s[0] if s.size else 0.0, scale)
    rank = int(np.sum(s > tol.rank_tol * smax)) if smax > 0 else 0
    kernel = vh[rank:].conj().T
    return canonical_basis(kernel, cols - rank)


def null_space(m, tol: Tolerance = DEFAULT_TOL) -> list[np.ndarray]:
    """Orthonormal basis of {v : |m v| <= rank_tol |m| |v|}.

    Singular values at or below ``rank_tol`` times the largest one are treated
    as zero.  The basis is canonical (see :func:`canonical_basis`) so results are
    reproducible regardless of LAPACK's choice inside degenerate subspaces.
    """
    k = null_space_matrix(m, tol)
    return [k[:, i].copy() for i in range(k.shape[1])]


def matrix_rank(m, tol: Tolerance = DEFAULT_TOL) -> int:
    m = np.asarray(m)
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > tol.rank_tol * s[0]))


def is_hermitian(x, atol: float) -> bool:
    x = np.asarray(x)
    return op_norm(x - dag(x)) <= atol


def projector_defect(p) -> float:
    p = as_square(p, "projector")
    return max(op_norm(p @ p - p), op_norm(p - dag(p)))


def check_projector(p, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    p = as_square(p, "projector")
    defect = projector_defect(p)
    if defect > tol.match_tol:
        raise NotAProjectorError(f"matrix is not an orthogonal projector (defect {defect:.3g})")
    return p


def projector_rank(p) -> int:
    return int(round(float(np.real(np.trace(p)))))


def projector_onto(basis: np.ndarray) -> np.ndarray:
    """Orthogonal projector onto the columns of an orthonormal ``basis``."""
    basis = np.asarray(basis, dtype=complex)
    return basis @ basis.conj().T


def range_basis(p, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Canonical orthonormal basis of range(p) for an orthogonal projector ``p``."""
    p = check_projector(p, tol)
    return canonical_basis(p, projector_rank(p))


def support_basis(mats: Sequence[np.ndarray], tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Canonical basis of the span of the row and column spaces of ``mats``."""
    mats = [np.asarray(m, dtype=complex) for m in mats]
    if not mats:
        return np.zeros((0, 0), dtype=complex)
    stacked = np.hstack([blk for m in mats for blk in (m, dag(m))])
    u, s, _ = np.linalg.svd(stacked, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros((stacked.shape[0], 0), dtype=complex)
    rank = int(np.sum(s > tol.rank_tol * s[0]))
    return canonical_basis(u[:, :rank], rank)


def complement_basis(basis: np.ndarray) -> np.ndarray:
    """Canonical orthonormal basis of the orthogonal complement of ``basis``."""
    basis = np.asarray(basis, dtype=complex)
    n, k = basis.shape
    comp = np.eye(n, dtype=complex) - projector_onto(basis)
    return canonical_basis(comp, n - k)


def polar_isometry(x, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Partial-isometry factor W of the polar decomposition x = W |x|."""
    x = as_matrix(x)
    u, s, vh = np.linalg.svd(x)
    if s.size == 0 or s[0] == 0:
        return np.zeros_like(x)
    r = int(np.sum(s > tol.rank_tol * s[0]))
    return u[:, :r] @ vh[:r]


def psd_part(x, sign: int = 1, rel: float = 1e-12) -> np.ndarray:
    """Positive (sign=+1) or negative (sign=-1) part of a Hermitian matrix."""
    x = 0.5 * (x + dag(x))
    w, v = np.linalg.eigh(x)
    scale = np.max(np.abs(w)) if w.size else 0.0
    keep = sign * w > rel * scale
    return (v[:, keep] * (sign * w[keep])) @ v[:, keep].conj().T


def complex_to_json(z) -> dict:
    z = complex(z)
    return {"re": float(z.real), "im": float(z.imag)}


def complex_from_json(obj) -> complex:
    if isinstance(obj, dict):
        return complex(float(obj["re"]), float(obj.get("im", 0.0)))
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return complex(obj)
    raise ValueError(f"not a complex number: {obj!r}")


def matrix_to_json(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[complex_to_json(z) for z in row] for row in m]


def matrix_from_json(obj) -> np.ndarray:
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise ValueError("matrix must be a non-empty list of rows")
    width = len(obj[0])
    if any(len(r) != width for r in obj):
        raise DimensionError("ragged matrix rows")
    return np.array([[complex_from_json(z) for z in row] for row in obj], dtype=complex)
