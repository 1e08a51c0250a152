"""Hilbert-space structure of a Lindblad generator.

Everything here reduces to linear algebra on the transfer operators:

* the commutant of {H, h_a, h_a^+} and its minimal projectors (enclosures),
* block tests for lazy and collecting subspaces,
* the decay cascade: the lowest level is the joint support of the stationary
  matrices, its basins are minimal projectors of the commutant of the
  compressed generator, and higher levels repeat the construction on the
  orthogonal complement,
* intertwiners between basins of the lowest level and the dephasing classes
  they generate,
* symmetry certificates.
"""
from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import CertificationError, NotUnitaryError
from .generator import LindbladGenerator, restrict_to_basis
from .linop import (
    DEFAULT_TOL,
    Tolerance,
    _phase_fix,
    check_projector,
    complement_basis,
    dag,
    expm,
    null_space_matrix,
    op_norm,
    polar_isometry,
    projector_onto,
    projector_rank,
    range_basis,
    unvectorize,
    vectorize,
)
from .spectral import (
    SpectralDecomposition,
    StationarySet,
    axis_tol,
    block_superop,
    cluster_values,
    decompose,
    kernel_support,
    stationary_states,
)

DEFAULT_SEED = 0xC0FFEE
MARGINAL_FACTOR = 100.0
_SPLIT_RETRIES = 3
_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
           101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193,
           197, 199, 211, 223, 227, 229, 233, 239, 241, 251, 257, 263, 269, 271, 277, 281, 283, 293, 307, 311)


def _primes(n: int) -> np.ndarray:
    if n <= len(_PRIMES):
        return np.array(_PRIMES[:n], dtype=float)
    out = list(_PRIMES)
    k = out[-1] + 2
    while len(out) < n:
        if all(k % p for p in out if p * p <= k):
            out.append(k)
        k += 2
    return np.array(out[:n], dtype=float)


def _op_scale(g: LindbladGenerator) -> float:
    return max([1.0, op_norm(g.hamiltonian), *(op_norm(h) ** 2 for h in g.transfer_ops)])


@dataclass
class Certificate:
    """Outcome of a structural test: measured defect against threshold."""

    name: str
    defect: float
    threshold: float
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.defect <= self.threshold and all(v <= self.threshold for v in self.extra.values())

    @property
    def marginal(self) -> bool:
        """Failed, but by less than the structurally-false margin."""
        worst = max([self.defect, *self.extra.values()])
        return self.threshold < worst <= MARGINAL_FACTOR * self.threshold

    def __bool__(self) -> bool:
        return self.passed


# --- commutant and enclosures ------------------------------------------------------

@dataclass
class CommutantBasis:
    dim_space: int
    elements: list          # HS-orthonormal matrices

    @property
    def dim(self) -> int:
        return len(self.elements)


def commutant(g: LindbladGenerator, tol: Tolerance = DEFAULT_TOL) -> CommutantBasis:
    """Basis of {X : [X, A] = 0 for A in {H, h_a, h_a^+}}, a *-algebra."""
    d = g.dim
    eye = np.eye(d)
    blocks = []
    for a in (g.hamiltonian, *g.transfer_ops, *(dag(h) for h in g.transfer_ops)):
        size = op_norm(a)
        if size == 0.0:
            continue
        a = a / size
        blocks.append(np.kron(eye, a) - np.kron(a.T, eye))
    stacked = np.vstack(blocks) if blocks else np.zeros((0, d * d), dtype=complex)
    ns = null_space_matrix(stacked, tol)
    return CommutantBasis(d, [unvectorize(ns[:, i], d) for i in range(ns.shape[1])])


def _spectral_projectors(x: np.ndarray, rel: float = 1e-6) -> list[np.ndarray]:
    x = 0.5 * (x + dag(x))
    w, v = np.linalg.eigh(x)
    radius = rel * max(np.max(np.abs(w)) if w.size else 0.0, 1e-300)
    out = []
    for idx in sorted(cluster_values(w.astype(complex), radius), key=lambda i: w[i[0]]):
        out.append(v[:, idx] @ dag(v[:, idx]))
    return out


def _projector_basis(p: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (p + dag(p)))
    return v[:, w > 0.5]


def _is_minimal(p: np.ndarray, elements: list, tol: Tolerance) -> bool:
    r = np.real(np.trace(p))
    for b in elements:
        x = p @ b @ p
        if op_norm(x - (np.trace(x) / r) * p) > tol.match_tol:
            return False
    return True


def canonical_order(projs: list[np.ndarray], decimals: int = 8) -> list[int]:
    """Permutation sorting projectors by rank, then by descending rounded entries."""
    def key(i):
        p = projs[i]
        flat = np.round(p, decimals).ravel()
        entries = tuple(-v for z in flat for v in (float(z.real) + 0.0, float(z.imag) + 0.0))
        return (projector_rank(p), entries)
    return sorted(range(len(projs)), key=key)


def minimal_conserved_projectors(cb: CommutantBasis, tol: Tolerance = DEFAULT_TOL,
                                 seed: int = DEFAULT_SEED) -> list[np.ndarray]:
    """Mutually orthogonal minimal projectors of the commutant, summing to the identity.

    A generic self-adjoint element (the projection of a fixed diagonal matrix
    with incommensurate entries onto the algebra) gives a first splitting.  Any
    projector E that is not yet minimal, detected by E B E not being a multiple
    of E for some basis element B, is split with a seeded random self-adjoint
    element of E N E.
    """
    d = cb.dim_space
    if cb.dim == 0:
        raise CertificationError("commutant is empty; the identity is always in it")
    target = np.diag(np.sqrt(_primes(d))).astype(complex)
    generic = sum((np.vdot(b, target) * b for b in cb.elements), np.zeros((d, d), dtype=complex))
    rng = np.random.default_rng(seed)
    queue = deque(_spectral_projectors(generic))
    done = []
    while queue:
        p = queue.popleft()
        if _is_minimal(p, cb.elements, tol):
            done.append(p)
            continue
        basis = _projector_basis(p)
        for attempt in range(_SPLIT_RETRIES + 1):
            coeff = rng.normal(size=cb.dim) + 1j * rng.normal(size=cb.dim)
            x = sum((c * (dag(basis) @ b @ basis) for c, b in zip(coeff, cb.elements)),
                    np.zeros((basis.shape[1],) * 2, dtype=complex))
            parts = _spectral_projectors(x)
            if len(parts) > 1:
                queue.extend(basis @ q @ dag(basis) for q in parts)
                break
        else:
            raise CertificationError("could not split a non-minimal projector of the commutant")
    return [done[i] for i in canonical_order(done)]


def is_enclosure(g: LindbladGenerator, p, tol: Tolerance = DEFAULT_TOL) -> Certificate:
    """P commutes with H and every h_a (equivalently D^+(P) = 0 and no phase leaks)."""
    p = check_projector(p, tol)
    defect = max([op_norm(a @ p - p @ a) for a in (g.hamiltonian, *g.transfer_ops)] or [0.0])
    return Certificate("enclosure", defect, tol.match_tol * _op_scale(g))


# --- lazy / collecting -------------------------------------------------------------

def is_lazy(g: LindbladGenerator, p, tol: Tolerance = DEFAULT_TOL) -> Certificate:
    """Defect max_a ||h_a P - P h_a P||, the norm of the block P^perp h_a P."""
    p = check_projector(p, tol)
    defect = max([op_norm(h @ p - p @ h @ p) for h in g.transfer_ops] or [0.0])
    return Certificate("lazy", defect, tol.match_tol * _op_scale(g))


def is_collecting(g: LindbladGenerator, p, tol: Tolerance = DEFAULT_TOL, spot_check: bool = True,
                  seed: int = DEFAULT_SEED) -> Certificate:
    """Lazy plus P (iH - 1/2 sum h^+ h) P^perp = 0.

    When the algebraic test passes, confinement of the evolution of a random
    state supported in P is spot-checked at t = 0.1 and t = 1 and reported as
    an extra defect.
    """
    p = check_projector(p, tol)
    lazy = is_lazy(g, p, tol)
    d = g.dim
    q = np.eye(d) - p
    off = op_norm(p @ (1j * g.hamiltonian - 0.5 * g.jump_sum) @ q)
    cert = Certificate("collecting", max(lazy.defect, off), lazy.threshold)
    if spot_check and cert.passed and projector_rank(p) > 0:
        rng = np.random.default_rng(seed)
        a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        rho = p @ a @ dag(a) @ p
        rho = rho / np.trace(rho).real
        worst = 0.0
        for t in (0.1, 1.0):
            out = expm(g.superoperator, t).apply(rho)
            worst = max(worst, op_norm(out - p @ out @ p))
        cert.extra["confinement"] = worst
    return cert


# --- cascade -----------------------------------------------------------------------

@dataclass
class Basin:
    projector: np.ndarray
    basis: np.ndarray
    level: int

    @property
    def rank(self) -> int:
        return self.basis.shape[1]


def _lowest_level(g: LindbladGenerator, tol: Tolerance, seed: int):
    """(support basis, local basin bases, restricted commutant dim) of the lowest level of ``g``."""
    support = kernel_support(g, tol)
    reduced = restrict_to_basis(g, support)
    cb = commutant(reduced, tol)
    projs = minimal_conserved_projectors(cb, tol, seed)
    local = [support @ range_basis(e, tol) for e in projs]
    return support, local, cb.dim


def _make_basins(bases: list[np.ndarray], level: int) -> list[Basin]:
    projs = [projector_onto(b) for b in bases]
    order = canonical_order(projs)
    out = []
    for i in order:
        p = projs[i]
        out.append(Basin(p, range_basis(p), level))
    return out


def collecting_basins(g: LindbladGenerator, tol: Tolerance = DEFAULT_TOL, seed: int = DEFAULT_SEED) -> list[Basin]:
    """Minimal collecting subspaces of the lowest level, in canonical order."""
    _, local, _ = _lowest_level(g, tol, seed)
    return _make_basins(local, 0)


def cascade(g: LindbladGenerator, tol: Tolerance = DEFAULT_TOL, seed: int = DEFAULT_SEED):
    """Levels of basins: [[level-0 basins], [level-1 basins], ...].

    Returns (levels, p0, restricted commutant dimension of the lowest level).
    """
    d = g.dim
    support, local, n0_dim = _lowest_level(g, tol, seed)
    levels = [_make_basins(local, 0)]
    p0 = projector_onto(support)
    current = complement_basis(support)
    while current.shape[1] > 0:
        if len(levels) > d:
            raise CertificationError("cascade did not terminate within dim levels")
        reduced = restrict_to_basis(g, current)
        sub_support, sub_local, _ = _lowest_level(reduced, tol, seed)
        if sub_support.shape[1] == 0:
            raise CertificationError("reduced generator has no stationary support")
        levels.append(_make_basins([current @ b for b in sub_local], len(levels)))
        current = current @ complement_basis(sub_support)
    return levels, p0, n0_dim


def certify_decay(g: LindbladGenerator, basin: Basin, p0: np.ndarray, gap: float,
                  factor: float = 100.0) -> float:
    """||P0^perp rho(t) P0^perp|| at t = factor/gap for the maximally mixed state of ``basin``."""
    if gap <= 0:
        return float("inf")
    rho = basin.projector / basin.rank
    q = np.eye(g.dim) - p0
    out = expm(g.superoperator, factor / gap).apply(rho)
    return op_norm(q @ out @ q)


# --- intertwiners and dephasing ----------------------------------------------------

@dataclass
class Intertwiner:
    """Partial isometry u from basin j onto basin i with E_i - E_j = energy_shift."""

    i: int
    j: int
    u: np.ndarray
    energy_shift: float
    eigenvalue: complex
    defect: float


def _as_basins(basins) -> list[Basin]:
    out = []
    for b in basins:
        if isinstance(b, Basin):
            out.append(b)
        else:
            p = np.asarray(b, dtype=complex)
            out.append(Basin(p, range_basis(p), 0))
    return out


def _certify_intertwiner(u, pi, pj, h0s, ham0, r):
    return max(
        op_norm(dag(u) @ u - pj),
        op_norm(u @ dag(u) - pi),
        max([op_norm(h @ u - u @ h) for h in h0s] or [0.0]),
        op_norm(pi @ ham0 @ pi @ u - u @ pj @ ham0 @ pj - r * u),
    )


def find_intertwiners(g: LindbladGenerator, basins, tol: Tolerance = DEFAULT_TOL,
                      report_warnings: list | None = None) -> list[Intertwiner]:
    """Certified intertwiners between equal-rank basins of the lowest level.

    The generator compressed to the block P_i X P_j is diagonalized; each
    eigenvalue on the imaginary axis yields a candidate via the polar factor of
    its eigenmatrix.
    """
    basins = _as_basins(basins)
    if not basins:
        return []
    d = g.dim
    p0 = sum(b.projector for b in basins)
    h0s = [p0 @ h @ p0 for h in g.transfer_ops]
    h0s += [dag(h) for h in h0s]
    ham0 = p0 @ g.hamiltonian @ p0
    eps = axis_tol(g, tol)
    threshold = tol.match_tol * _op_scale(g)
    out = []
    for i, bi in enumerate(basins):
        for j in range(i + 1, len(basins)):
            bj = basins[j]
            if bi.rank != bj.rank:
                continue
            s = block_superop(g, bi.basis, bj.basis)
            w = np.linalg.eigvals(s)
            axis = w[np.abs(w.real) <= eps]
            if axis.size == 0:
                continue
            found = []
            for idx in cluster_values(axis, eps):
                lam = complex(0.0, float(np.mean(axis[idx].imag)))
                ns = null_space_matrix(s - lam * np.eye(s.shape[0]), Tolerance(
                    rank_tol=max(tol.rank_tol, eps / max(op_norm(s), 1.0)),
                    match_tol=tol.match_tol, eig_group_tol=tol.eig_group_tol))
                for c in range(ns.shape[1]):
                    x = bi.basis @ unvectorize(ns[:, c], bi.rank) @ dag(bj.basis)
                    u = polar_isometry(x, tol)
                    u = unvectorize(_phase_fix(vectorize(u)), d)
                    r = float(np.real(np.trace(dag(u) @ (ham0 @ u - u @ ham0)))) / bi.rank
                    defect = _certify_intertwiner(u, bi.projector, bj.projector, h0s, ham0, r)
                    if any(abs(np.vdot(f.u, u)) >= (1 - 1e-6) * bi.rank for f in found):
                        continue
                    if defect <= MARGINAL_FACTOR * threshold:
                        if defect > threshold and report_warnings is not None:
                            report_warnings.append(
                                f"intertwiner {i}<-{j} certified only marginally (defect {defect:.3g})")
                        found.append(Intertwiner(i, j, u, r, lam, defect))
                    elif report_warnings is not None:
                        report_warnings.append(
                            f"imaginary-axis eigenvalue {lam:.6g} of block ({i},{j}) gave no intertwiner "
                            f"(defect {defect:.3g})")
            out.extend(found)
    return out


@dataclass
class DephasingClass:
    members: list             # basin indices, anchor first
    projector: np.ndarray     # Q = sum of member projectors
    inner_dim: int
    energies: np.ndarray      # E_m relative to the anchor
    embeddings: list          # V_m: anchor basin -> member basin (d x d partial isometries)
    inner_state: np.ndarray   # unique stationary state of the anchor basin, in its basis
    anchor_basis: np.ndarray
    consistency_defect: float = 0.0

    @property
    def multiplicity(self) -> int:
        return len(self.members)

    @property
    def hamiltonian(self) -> np.ndarray:
        return np.diag(self.energies).astype(complex)

    def tensor_basis(self) -> np.ndarray:
        """Isometry C^n (x) C^r -> Q H, column m*r + a = V_m b_a."""
        return np.column_stack([v @ self.anchor_basis[:, a] for v in self.embeddings
                                for a in range(self.inner_dim)])

    def block_state(self, m: int, n: int) -> np.ndarray:
        """V_m rho V_n^+ with rho the inner state embedded in the anchor basin."""
        rho = self.anchor_basis @ self.inner_state @ dag(self.anchor_basis)
        return self.embeddings[m] @ rho @ dag(self.embeddings[n])


def basin_state(g: LindbladGenerator, basis: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Unique stationary state of a minimal collecting basin, in the basin's own basis."""
    ns = null_space_matrix(block_superop(g, basis, basis), tol, scale=g.scale)
    if ns.shape[1] != 1:
        raise CertificationError(f"basin carries {ns.shape[1]} stationary states instead of one")
    y = unvectorize(ns[:, 0], basis.shape[1])
    y = y / np.trace(y)
    return 0.5 * (y + dag(y))


def dephasing_classes(g: LindbladGenerator, basins, intertwiners: list[Intertwiner],
                      tol: Tolerance = DEFAULT_TOL) -> list[DephasingClass]:
    """Group basins connected by intertwiners; each group carries a tensor structure C^n (x) H_00."""
    basins = _as_basins(basins)
    n = len(basins)
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for it in intertwiners:
        ra, rb = find(it.i), find(it.j)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, list[int]] = {}
    for k in range(n):
        groups.setdefault(find(k), []).append(k)

    threshold = tol.match_tol * _op_scale(g)
    out = []
    for root in sorted(groups):
        members = sorted(groups[root])
        anchor = members[0]
        emb = {anchor: basins[anchor].projector.copy()}
        energy = {anchor: 0.0}
        edges = [it for it in intertwiners if it.i in members]
        pending = deque([anchor])
        used = set()
        while pending:
            a = pending.popleft()
            for k, it in enumerate(edges):
                if k in used:
                    continue
                if it.i == a and it.j not in emb:
                    emb[it.j] = dag(it.u) @ emb[a]
                    energy[it.j] = energy[a] - it.energy_shift
                elif it.j == a and it.i not in emb:
                    emb[it.i] = it.u @ emb[a]
                    energy[it.i] = energy[a] + it.energy_shift
                else:
                    continue
                used.add(k)
                pending.append(it.j if it.i == a else it.i)
        worst = 0.0
        for k, it in enumerate(edges):
            if k in used:
                continue
            expect = emb[it.i] @ dag(emb[it.j])
            overlap = np.vdot(expect, it.u)
            phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
            worst = max(worst, op_norm(it.u - phase * expect),
                        abs(it.energy_shift - (energy[it.i] - energy[it.j])))
        if worst > MARGINAL_FACTOR * threshold:
            raise CertificationError("intertwiners do not compose consistently", defect=worst)
        anchor_basis = basins[anchor].basis
        out.append(DephasingClass(
            members=members,
            projector=sum(basins[m].projector for m in members),
            inner_dim=basins[anchor].rank,
            energies=np.array([energy[m] for m in members]),
            embeddings=[emb[m] for m in members],
            inner_state=basin_state(g, anchor_basis, tol),
            anchor_basis=anchor_basis,
            consistency_defect=worst,
        ))
    return out


# --- symmetry ----------------------------------------------------------------------

@dataclass
class SymmetryCertificate:
    dynamical_defect: float
    stationarity_defect: float
    threshold: float

    @property
    def dynamical(self) -> bool:
        return self.dynamical_defect <= self.threshold

    @property
    def stationarity(self) -> bool:
        return self.stationarity_defect <= self.threshold


def verify_symmetry(g: LindbladGenerator, v, antiunitary: bool = False,
                    tol: Tolerance = DEFAULT_TOL) -> SymmetryCertificate:
    """Check D(Theta x) = Theta D(x) on matrix units, Theta(x) = V x V^+ or V conj(x) V^+.

    Also reports whether Theta maps the stationary matrices into themselves.
    """
    v = np.asarray(v, dtype=complex)
    d = g.dim
    if v.shape != (d, d):
        raise NotUnitaryError(f"candidate has shape {v.shape}, expected {(d, d)}")
    udef = op_norm(dag(v) @ v - np.eye(d))
    if udef > tol.match_tol:
        raise NotUnitaryError(f"candidate is not unitary (defect {udef:.3g})")

    def theta(x):
        return v @ (np.conj(x) if antiunitary else x) @ dag(v)

    D = g.superoperator
    dyn = 0.0
    for k in range(d * d):
        unit = np.zeros(d * d, dtype=complex)
        unit[k] = 1.0
        x = unvectorize(unit, d)
        dyn = max(dyn, op_norm(D.apply(theta(x)) - theta(D.apply(x))))
    ns = null_space_matrix(D.matrix, tol)
    stat = 0.0
    for c in range(ns.shape[1]):
        stat = max(stat, op_norm(D.apply(theta(unvectorize(ns[:, c], d)))))
    return SymmetryCertificate(dyn, stat, tol.match_tol * max(1.0, D.norm()))


@dataclass
class MaxSymmetry:
    is_maximal: bool
    rate: float
    defect: float


def detect_max_symmetry(g: LindbladGenerator, tol: Tolerance = DEFAULT_TOL) -> MaxSymmetry:
    """Least-squares fit D = rate * (omega Tr[.] - id); maximal iff the residual vanishes."""
    d = g.dim
    m = g.superoperator.matrix
    omega = np.eye(d) / d
    t = np.outer(vectorize(omega), vectorize(np.eye(d))) - np.eye(d * d)
    tt = np.vdot(t, t).real
    if tt == 0.0:
        return MaxSymmetry(op_norm(m) <= tol.match_tol, 0.0, op_norm(m))
    rate = float(np.vdot(t, m).real / tt)
    defect = op_norm(m - rate * t)
    return MaxSymmetry(defect <= tol.match_tol * max(1.0, op_norm(m)), rate, defect)


# --- full report -------------------------------------------------------------------

@dataclass
class StructureReport:
    dim: int
    p0: np.ndarray
    levels: list                     # list of lists of Basin
    intertwiners: list
    dephasing_classes: list
    commutant_dim: int
    enclosure_projectors: list
    restricted_commutant_dim: int
    spectrum: SpectralDecomposition
    stationary: StationarySet
    defects: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    @property
    def collecting_basins(self) -> list:
        return [b.projector for b in self.levels[0]]

    @property
    def basin_ranks(self) -> list:
        return sorted(b.rank for level in self.levels for b in level)

    @property
    def invariant_count_matches(self) -> bool:
        return len(self.stationary.invariant_observables) == self.restricted_commutant_dim


def analyze(g: LindbladGenerator, tol: Tolerance = DEFAULT_TOL, seed: int = DEFAULT_SEED,
            decay_factor: float = 100.0) -> StructureReport:
    """Complete structural decomposition with certification of every piece."""
    notes: list[str] = []
    defects: dict = {}
    sd = decompose(g, tol)
    levels, p0, n0_dim = cascade(g, tol, seed)

    threshold = tol.match_tol * _op_scale(g)

    def certify(name, cert_or_defect, limit=threshold):
        defect = cert_or_defect if isinstance(cert_or_defect, float) else max(
            [cert_or_defect.defect, *cert_or_defect.extra.values()])
        defects[name] = defect
        if defect > MARGINAL_FACTOR * limit:
            raise CertificationError(f"{name} failed", defect=defect)
        if defect > limit:
            notes.append(f"{name} certified only marginally (defect {defect:.3g})")

    certify("p0_collecting", is_collecting(g, p0, tol, seed=seed))
    for k, b in enumerate(levels[0]):
        certify(f"basin0_{k}_collecting", is_collecting(g, b.projector, tol, seed=seed))
    gap = sd.gap()
    for lev in levels[1:]:
        for k, b in enumerate(lev):
            certify(f"basin{b.level}_{k}_decay", certify_decay(g, b, p0, gap, decay_factor), 1e-6)
    total = sum(b.projector for lev in levels for b in lev)
    certify("basins_resolve_identity", op_norm(total - np.eye(g.dim)))

    its = find_intertwiners(g, levels[0], tol, notes)
    classes = dephasing_classes(g, levels[0], its, tol)
    stationary = stationary_states(sd, tol, seed=seed, basins=levels[0])
    cb = commutant(g, tol)
    enclosures = minimal_conserved_projectors(cb, tol, seed)
    report = StructureReport(
        dim=g.dim,
        p0=p0,
        levels=levels,
        intertwiners=its,
        dephasing_classes=classes,
        commutant_dim=cb.dim,
        enclosure_projectors=enclosures,
        restricted_commutant_dim=n0_dim,
        spectrum=sd,
        stationary=stationary,
        defects=defects,
        warnings=notes,
    )
    if not report.invariant_count_matches:
        notes.append(
            f"invariant observables ({len(stationary.invariant_observables)}) and restricted commutant "
            f"({n0_dim}) differ in dimension")
    for msg in notes:
        warnings.warn(msg, stacklevel=2)
    return report
