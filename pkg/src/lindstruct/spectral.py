"""Eigen-analysis of the generator superoperator.

Stationary states, phase relations, invariant observables and the path
classification of eigenvalues all come from here.  The stationary basis is
aligned with the collecting basins found by :mod:`lindstruct.structure`.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import CertificationError
from .generator import LindbladGenerator
from .linop import (
    DEFAULT_TOL,
    Tolerance,
    dag,
    expm,
    matrix_rank,
    null_space_matrix,
    op_norm,
    psd_part,
    support_basis,
    unvectorize,
    vectorize,
)


class PathClass(enum.Enum):
    ZERO = "stationary"
    PURE_IMAGINARY = "circular"
    NEGATIVE_REAL = "straight"
    COMPLEX = "spiral"


def scale_of(g: LindbladGenerator) -> float:
    return max(1.0, g.superoperator.norm())


def axis_tol(g: LindbladGenerator, tol: Tolerance) -> float:
    """Absolute distance from the imaginary axis below which Re(lambda) counts as zero."""
    return tol.eig_group_tol * scale_of(g)


def cluster_values(values: np.ndarray, radius: float) -> list[np.ndarray]:
    """Group complex numbers into clusters (single linkage at ``radius``); returns index arrays."""
    n = len(values)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) <= radius:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return [np.array(v) for v in groups.values()]


def _sort_key(z: complex, nd: int = 9):
    return (-round(z.real, nd), round(z.imag, nd))


@dataclass
class SpectralDecomposition:
    generator: LindbladGenerator
    tol: Tolerance
    eigenvalues: np.ndarray
    eigenmatrices: list
    left_eigenmatrices: list
    clusters: list                 # list of (mean eigenvalue, index array)
    jordan_defects: list           # one integer per cluster

    @property
    def dim(self) -> int:
        return self.generator.dim

    def defect_of(self, value: complex) -> int:
        for (mean, _), defect in zip(self.clusters, self.jordan_defects):
            if abs(mean - value) <= axis_tol(self.generator, self.tol):
                return defect
        return 0

    def kernel_dim(self) -> int:
        return null_space_matrix(self.generator.superoperator.matrix, self.tol).shape[1]

    def imaginary_axis(self) -> list[complex]:
        """Cluster means of eigenvalues on the imaginary axis (including 0), real part dropped."""
        eps = axis_tol(self.generator, self.tol)
        return [complex(0.0, mean.imag) for mean, _ in self.clusters if abs(mean.real) <= eps]

    def gap(self) -> float:
        """Smallest |Re lambda| among eigenvalues off the imaginary axis; 0 if there are none."""
        eps = axis_tol(self.generator, self.tol)
        decaying = [abs(z.real) for z in self.eigenvalues if abs(z.real) > eps]
        return float(min(decaying)) if decaying else 0.0


def decompose(g: LindbladGenerator, tol: Tolerance = DEFAULT_TOL) -> SpectralDecomposition:
    """Full eigensystem of D with Jordan defects per eigenvalue cluster.

    Raises :class:`CertificationError` if an eigenvalue has a positive real
    part, the spectrum is not closed under conjugation, or the eigenvalue 0
    carries a Jordan block.
    """
    m = g.superoperator.matrix
    n = m.shape[0]
    try:
        w, vl, vr = scipy.linalg.eig(m, left=True, right=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise CertificationError(f"eigensolver failed: {exc}") from exc
    if not np.all(np.isfinite(w)):
        raise CertificationError("eigensolver returned non-finite eigenvalues")
    order = sorted(range(n), key=lambda i: _sort_key(w[i]))
    w = w[order]
    vl = vl[:, order]
    vr = vr[:, order]
    d = g.dim
    right = [unvectorize(vr[:, i] / np.linalg.norm(vr[:, i]), d) for i in range(n)]
    left = [unvectorize(vl[:, i] / np.linalg.norm(vl[:, i]), d) for i in range(n)]

    eps = axis_tol(g, tol)
    if np.max(w.real) > tol.match_tol * scale_of(g):
        raise CertificationError("eigenvalue with positive real part", defect=float(np.max(w.real)))
    for z in w:
        if np.min(np.abs(w - np.conj(z))) > eps:
            raise CertificationError("spectrum not closed under complex conjugation",
                                     defect=float(np.min(np.abs(w - np.conj(z)))))

    clusters = []
    defects = []
    eye = np.eye(n)
    groups = cluster_values(w, eps)
    groups.sort(key=lambda idx: _sort_key(complex(np.mean(w[idx]))))
    for idx in groups:
        mean = complex(np.mean(w[idx]))
        sv = np.linalg.svd(m - mean * eye, compute_uv=False)
        geometric = int(np.sum(sv <= eps))
        defects.append(max(len(idx) - geometric, 0))
        clusters.append((mean, idx))

    sd = SpectralDecomposition(g, tol, w, right, left, clusters, defects)
    zero_defect = sd.defect_of(0.0)
    if zero_defect:
        raise CertificationError("eigenvalue 0 has a Jordan block", defect=zero_defect)
    return sd


def jordan_defect_by_powers(m: np.ndarray, value: complex, multiplicity: int, tol: Tolerance = DEFAULT_TOL) -> int:
    """rank(M - z) - rank((M - z)^k) with k the algebraic multiplicity; independent cross-check."""
    a = m - value * np.eye(m.shape[0])
    return matrix_rank(a, tol) - matrix_rank(np.linalg.matrix_power(a, multiplicity), tol)


def classify_paths(sd: SpectralDecomposition) -> list[PathClass]:
    eps = axis_tol(sd.generator, sd.tol)
    out = []
    for z in sd.eigenvalues:
        on_axis = abs(z.real) <= eps
        real = abs(z.imag) <= eps
        if on_axis and real:
            out.append(PathClass.ZERO)
        elif on_axis:
            out.append(PathClass.PURE_IMAGINARY)
        elif real:
            out.append(PathClass.NEGATIVE_REAL)
        else:
            out.append(PathClass.COMPLEX)
    return out


def kernel_matrices(g: LindbladGenerator, tol: Tolerance = DEFAULT_TOL) -> list[np.ndarray]:
    k = null_space_matrix(g.superoperator.matrix, tol, scale=g.scale)
    return [unvectorize(k[:, i], g.dim) for i in range(k.shape[1])]


def kernel_support(g: LindbladGenerator, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the joint support of all stationary matrices."""
    return support_basis(kernel_matrices(g, tol), tol)


def block_superop(g: LindbladGenerator, bi: np.ndarray, bj: np.ndarray) -> np.ndarray:
    """D compressed to matrices B_i Y B_j^+ (exact when that block is invariant)."""
    k = np.kron(np.conj(bj), bi)
    return dag(k) @ g.superoperator.matrix @ k


def _normalize_phase_relation(x: np.ndarray) -> np.ndarray:
    x = x / np.sum(np.linalg.svd(x, compute_uv=False))
    flat = x.ravel()
    big = flat[int(np.argmax(np.abs(flat) > (1 - 1e-8) * np.max(np.abs(flat))))]
    return x * (np.conj(big) / abs(big))


@dataclass
class StationarySet:
    basis_states: list
    phase_relations: list
    invariant_observables: list
    phase_pairs: list = field(default_factory=list)   # basin pair (i, j) of each phase relation
    split_defect: float = 0.0

    @property
    def stationary_basis(self) -> list:
        """States followed by phase relations, the order used for the invariant-observable duality."""
        return [*self.basis_states, *self.phase_relations]

    def pairing_matrix(self) -> np.ndarray:
        basis = self.stationary_basis
        return np.array([[np.trace(a @ r) for r in basis] for a in self.invariant_observables])


def certify_positive_split(g: LindbladGenerator, kernel: list[np.ndarray], tol: Tolerance = DEFAULT_TOL) -> float:
    """Split every self-adjoint kernel element into positive and negative parts and check each is stationary.

    Returns the worst relative residual ||D(rho_+-)|| / ||rho_+-||.
    """
    worst = 0.0
    scale = scale_of(g)
    for x in kernel:
        for y in (x + dag(x), 1j * (x - dag(x))):
            if op_norm(y) <= tol.rank_tol:
                continue
            for sign in (1, -1):
                part = psd_part(y, sign)
                size = op_norm(part)
                if size <= 1e-12 * op_norm(y):
                    continue
                worst = max(worst, op_norm(g.superoperator.apply(part)) / (size * scale))
    return worst


def stationary_states(sd: SpectralDecomposition, tol: Tolerance | None = None, seed: int | None = None,
                      basins=None) -> StationarySet:
    """Positive basis of the stationary states, stationary phase relations and dual invariant observables.

    One density matrix per collecting basin, then one phase relation per
    stationary off-diagonal block between basins.  Observables are normalized so
    that Tr[A_i x_j] = delta_ij against that combined list.
    """
    from .structure import DEFAULT_SEED, collecting_basins

    tol = sd.tol if tol is None else tol
    seed = DEFAULT_SEED if seed is None else seed
    g = sd.generator
    d = g.dim
    kernel = kernel_matrices(g, tol)
    split = certify_positive_split(g, kernel, tol)
    if split > 1e3 * tol.match_tol:
        raise CertificationError("stationary element does not split into stationary positive parts", defect=split)

    if basins is None:
        basins = collecting_basins(g, tol, seed=seed)
    bases = [b.basis for b in basins]
    states = []
    for b in bases:
        ns = null_space_matrix(block_superop(g, b, b), tol, scale=g.scale)
        if ns.shape[1] != 1:
            raise CertificationError(f"basin of rank {b.shape[1]} carries {ns.shape[1]} stationary states")
        y = unvectorize(ns[:, 0], b.shape[1])
        y = y / np.trace(y)
        y = 0.5 * (y + dag(y))
        states.append(b @ y @ dag(b))
    phases, pairs = [], []
    for i, bi in enumerate(bases):
        for j, bj in enumerate(bases):
            if i == j or bi.shape[1] != bj.shape[1]:
                continue
            ns = null_space_matrix(block_superop(g, bi, bj), tol, scale=g.scale)
            for c in range(ns.shape[1]):
                y = unvectorize(ns[:, c], bi.shape[1])
                phases.append(_normalize_phase_relation(bi @ y @ dag(bj)))
                pairs.append((i, j))
    if len(states) + len(phases) != len(kernel):
        raise CertificationError(
            f"stationary basis has {len(states) + len(phases)} elements, kernel has {len(kernel)}",
            defect=abs(len(states) + len(phases) - len(kernel)),
        )

    left = null_space_matrix(dag(g.superoperator.matrix), tol)
    if left.shape[1] != len(kernel):
        raise CertificationError("kernel of D and of its adjoint differ in dimension",
                                 defect=abs(left.shape[1] - len(kernel)))
    rmat = np.column_stack([vectorize(x) for x in [*states, *phases]])
    gram = dag(left) @ rmat                     # gram[m, j] = <L_m, x_j>
    coeff = dag(np.linalg.inv(gram))            # A_i^+ = sum_m L_m coeff[m, i]
    observables = []
    for i in range(len(kernel)):
        a_dag = unvectorize(left @ coeff[:, i], d)
        observables.append(dag(a_dag))
    return StationarySet(states, phases, observables, pairs, split)


@dataclass
class AlgebraReport:
    is_algebra: bool
    product_defect: float
    adjoint_defect: float


def _span_defect(basis: np.ndarray, x: np.ndarray, scale: float) -> float:
    """Distance of x from the span, relative to ``scale`` (not to |x|, which may be rounding noise)."""
    v = vectorize(x)
    if scale == 0:
        return 0.0
    return float(np.linalg.norm(v - basis @ (dag(basis) @ v)) / scale)


def invariant_observable_closure(ss: StationarySet, tol: Tolerance = DEFAULT_TOL) -> AlgebraReport:
    """Is span{A_i} closed under products and adjoints?"""
    obs = ss.invariant_observables
    if not obs:
        return AlgebraReport(True, 0.0, 0.0)
    vecs = np.column_stack([vectorize(a) for a in obs])
    u, s, _ = np.linalg.svd(vecs, full_matrices=False)
    basis = u[:, : int(np.sum(s > tol.rank_tol * s[0]))]
    norms = [np.linalg.norm(a) for a in obs]
    prod = max(_span_defect(basis, a @ b, na * nb) for a, na in zip(obs, norms) for b, nb in zip(obs, norms))
    adj = max(_span_defect(basis, dag(a), na) for a, na in zip(obs, norms))
    return AlgebraReport(prod <= tol.match_tol and adj <= tol.match_tol, prod, adj)


def invariant_observable_extension(g: LindbladGenerator, p0k: np.ndarray, structure=None,
                                   tol: Tolerance = DEFAULT_TOL, check_time: float | None = None):
    """Long-time Heisenberg limit A of a collecting-basin projector.

    Computed from the dual basis: A = sum_j Tr[P x_j] A_j.  The limit is
    cross-checked against exp(t D^+)(P) at ``check_time`` (default 100/gap);
    returns (A, cross-check defect).
    """
    from .structure import analyze, is_collecting

    p = np.asarray(p0k, dtype=complex)
    cert = is_collecting(g, p, tol)
    if not cert.passed:
        raise CertificationError("projector is not collecting", defect=cert.defect)
    if structure is None:
        structure = analyze(g, tol)
    ss = structure.stationary
    a = sum((np.trace(p @ x) * obs for x, obs in zip(ss.stationary_basis, ss.invariant_observables)),
            np.zeros_like(p))
    sd = structure.spectrum
    gap = sd.gap()
    if check_time is None:
        check_time = 100.0 / gap if gap > 0 else 0.0
    finite = expm(g.superoperator.adjoint(), check_time).apply(p)
    return a, op_norm(finite - a)
