"""Stationary-state perturbation series for D(lam) = D0 + lam E + lam^2 F.

The generator is perturbed as H(lam) = H0 + lam V + lam^2 W and
h_a(lam) = h_a + lam k_a.  Stationary states are expanded as
rho(lam) = sum_n lam^n sigma_n with

    D0(sigma_n) = -E(sigma_{n-1}) - F(sigma_{n-2}).

Each sigma_n is fixed up to a kernel element of D0; those free coefficients
are determined by demanding that later right-hand sides stay in range(D0).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import (
    CertificationError,
    DegenerateBaseError,
    DegenerateBeyondOrderError,
    DimensionError,
    NotInRangeError,
)
from .generator import LindbladGenerator, generator_from_json, generator_to_json
from .linop import (
    DEFAULT_TOL,
    Superoperator,
    Tolerance,
    as_square,
    dag,
    matrix_from_json,
    matrix_to_json,
    null_space_matrix,
    op_norm,
    unvectorize,
    vectorize,
)
from .spectral import StationarySet, decompose, stationary_states


@dataclass(frozen=True, eq=False)
class PerturbedGenerator:
    """Base generator plus first/second-order Hamiltonians and transfer-operator shifts.

    ``k_ops`` is aligned index-wise with the base operators.  Whichever list
    is shorter is padded with zero matrices at the end, so new dissipation
    channels are added by listing k_ops beyond the base operators.
    """

    base: LindbladGenerator
    v: np.ndarray | None = None
    w: np.ndarray | None = None
    k_ops: tuple = ()
    tol: Tolerance = DEFAULT_TOL

    def __post_init__(self):
        d = self.base.dim
        zero = np.zeros((d, d), dtype=complex)
        for name in ("v", "w"):
            m = getattr(self, name)
            m = zero.copy() if m is None else as_square(m, name).copy()
            if m.shape != (d, d):
                raise DimensionError(f"{name} has shape {m.shape}, expected {(d, d)}")
            defect = op_norm(m - dag(m))
            if defect > self.tol.match_tol * max(1.0, op_norm(m)):
                raise ValueError(f"{name} is not Hermitian (defect {defect:.3g})")
            m.setflags(write=False)
            object.__setattr__(self, name, m)
        ks = []
        for i, k in enumerate(self.k_ops):
            k = as_square(k, f"k_ops[{i}]").copy()
            if k.shape != (d, d):
                raise DimensionError(f"k_ops[{i}] has shape {k.shape}, expected {(d, d)}")
            ks.append(k)
        n = max(len(ks), len(self.base.transfer_ops))
        ks += [zero.copy() for _ in range(n - len(ks))]
        object.__setattr__(self, "k_ops", tuple(ks))

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def base_ops(self) -> tuple:
        d = self.dim
        ops = list(self.base.transfer_ops)
        ops += [np.zeros((d, d), dtype=complex) for _ in range(len(self.k_ops) - len(ops))]
        return tuple(ops)

    def at(self, lam: float) -> LindbladGenerator:
        """The generator {H0 + lam V + lam^2 W, h_a + lam k_a}."""
        lam = float(lam)
        H = self.base.hamiltonian + lam * self.v + lam * lam * self.w
        ops = [h + lam * k for h, k in zip(self.base_ops, self.k_ops)]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return LindbladGenerator(H, tuple(ops))


def build_E(pg: PerturbedGenerator) -> Superoperator:
    """First-order part: -i[V, .] plus the h/k cross terms of every dissipator."""
    d = pg.dim
    eye = np.eye(d, dtype=complex)
    m = -1j * (kernels.sandwich_matrix(pg.v, eye) - kernels.sandwich_matrix(eye, pg.v))
    for h, k in zip(pg.base_ops, pg.k_ops):
        hk = dag(h) @ k
        kh = dag(k) @ h
        m = m + kernels.sandwich_matrix(h, dag(k)) + kernels.sandwich_matrix(k, dag(h))
        m = m - 0.5 * (kernels.sandwich_matrix(hk + kh, eye) + kernels.sandwich_matrix(eye, hk + kh))
    return Superoperator(d, m)


def build_F(pg: PerturbedGenerator) -> Superoperator:
    """Second-order part: the Lindblad generator of {W, k_a}."""
    return Superoperator(pg.dim, kernels.lindblad_matrix(pg.w, pg.k_ops))


def perturbed_superoperator(pg: PerturbedGenerator, lam: float) -> Superoperator:
    return pg.base.superoperator + lam * build_E(pg) + (lam * lam) * build_F(pg)


# --- constrained inverse -----------------------------------------------------------

class ConstrainedInverse:
    """Inverse of D0 on {tau : Tr[A_i tau] = 0}, with image in the same subspace.

    A minimum-norm least-squares solution is corrected by the kernel elements:
    sigma = sigma_raw - sum_i Tr[A_i sigma_raw] x_i, where {x_i} is the
    stationary basis dual to the invariant observables {A_i}.
    """

    def __init__(self, d0: Superoperator, ss: StationarySet, tol: Tolerance = DEFAULT_TOL):
        self.d0 = d0
        self.dim = d0.dim
        self.tol = tol
        self.basis = ss.stationary_basis
        self.observables = ss.invariant_observables
        m = d0.matrix
        self._pinv = np.linalg.pinv(m, rcond=tol.rank_tol)
        if self.basis:
            self._kvec = np.column_stack([vectorize(x) for x in self.basis])
            # Tr[A tau] = vec(A^T) . vec(tau), no conjugation
            self._avec = np.vstack([vectorize(a.T) for a in self.observables])
        else:
            self._kvec = np.zeros((m.shape[0], 0), dtype=complex)
            self._avec = np.zeros((0, m.shape[0]), dtype=complex)
        n = m.shape[0]
        self._fix = np.eye(n) - self._kvec @ self._avec
        self.matrix = self._fix @ self._pinv          # used on in-range inputs
        self.matrix_projected = self.matrix @ self._fix  # drops the kernel component of tau first

    def overlaps(self, tau) -> np.ndarray:
        return self._avec @ vectorize(as_square(tau, "tau"))

    def __call__(self, tau) -> np.ndarray:
        tau = as_square(tau, "tau")
        if tau.shape[0] != self.dim:
            raise DimensionError(f"tau has dim {tau.shape[0]}, expected {self.dim}")
        ov = self.overlaps(tau)
        scale = max(1.0, op_norm(tau))
        if ov.size and np.max(np.abs(ov)) > self.tol.match_tol * scale:
            raise NotInRangeError("right-hand side has a component outside the range of D0", ov)
        sigma = unvectorize(self.matrix @ vectorize(tau), self.dim)
        resid = op_norm(self.d0.apply(sigma) - tau)
        if resid > 1e3 * self.tol.match_tol * scale:
            raise NotInRangeError(f"least-squares residual {resid:.3g} too large", ov)
        return sigma


def constrained_inverse(d0: Superoperator, ss: StationarySet, tol: Tolerance = DEFAULT_TOL) -> ConstrainedInverse:
    return ConstrainedInverse(d0, ss, tol)


# --- series ------------------------------------------------------------------------

@dataclass
class PerturbationSeries:
    sigmas: list
    alphas: list
    order: int
    pg: PerturbedGenerator
    residual_at: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    lookahead: int = 0

    def partial_sum(self, lam: float, upto: int | None = None) -> np.ndarray:
        upto = self.order if upto is None else upto
        out = np.zeros_like(self.sigmas[0])
        for n in range(upto, -1, -1):            # Horner
            out = out * lam + self.sigmas[n]
        return out

    def residual(self, lam: float, upto: int | None = None) -> float:
        rho = self.partial_sum(lam, upto)
        return op_norm(perturbed_superoperator(self.pg, lam).apply(rho))

    def term_norms(self) -> list[float]:
        return [op_norm(s) for s in self.sigmas]

    def radius_estimate(self, floor: float = 1e-13) -> float:
        """Convergence radius from the last two non-negligible coefficients (ratio test)."""
        norms = self.term_norms()
        idx = [n for n in range(1, len(norms)) if norms[n] > floor * max(1.0, norms[0])]
        if len(idx) < 2:
            return math.inf
        n, m = idx[-1], idx[-2]
        ratio = (norms[n] / norms[m]) ** (1.0 / (n - m))
        return math.inf if ratio == 0 else 1.0 / ratio

    def diverges_at(self, lam: float) -> bool:
        return abs(lam) > self.radius_estimate()


def _base_stationary(pg: PerturbedGenerator, tol: Tolerance):
    sd = decompose(pg.base, tol)
    return stationary_states(sd, tol)


def expand_unique(pg: PerturbedGenerator, order: int = 10, tol: Tolerance = DEFAULT_TOL,
                  ss: StationarySet | None = None, probe_lambdas=(0.1,)) -> PerturbationSeries:
    """sigma_n = G_n(rho), G_n = -D0^{-1}(E G_{n-1} + F G_{n-2}); base must have one stationary state."""
    if order < 0:
        raise ValueError("order must be non-negative")
    ss = _base_stationary(pg, tol) if ss is None else ss
    if len(ss.stationary_basis) != 1:
        raise DegenerateBaseError(
            f"base generator has {len(ss.stationary_basis)} stationary matrices; use expand_degenerate")
    inv = ConstrainedInverse(pg.base.superoperator, ss, tol)
    E, F = build_E(pg), build_F(pg)
    sigmas = [ss.basis_states[0]]
    prev2 = np.zeros_like(sigmas[0])
    for n in range(1, order + 1):
        rhs = E.apply(sigmas[-1]) + F.apply(prev2)
        try:
            nxt = -inv(rhs)
        except NotInRangeError as exc:
            raise CertificationError("solvability failed although the base state is unique",
                                     defect=float(np.max(np.abs(exc.overlaps)))) from exc
        prev2 = sigmas[-1]
        sigmas.append(nxt)
    series = PerturbationSeries(sigmas, [np.array([1.0 + 0j])] + [np.zeros(1, complex)] * order, order, pg)
    _finish(series, probe_lambdas)
    return series


def _finish(series: PerturbationSeries, probe_lambdas):
    for lam in probe_lambdas:
        series.residual_at[float(lam)] = series.residual(lam)
        if series.diverges_at(lam):
            series.warnings.append(
                f"ratio test: |lambda| = {abs(lam):g} exceeds the estimated radius {series.radius_estimate():.4g}")


def expand_degenerate(pg: PerturbedGenerator, order: int = 10, tol: Tolerance = DEFAULT_TOL,
                      ss: StationarySet | None = None, max_lookahead: int | None = None,
                      probe_lambdas=(0.1,)) -> PerturbationSeries:
    """Series for a base with several stationary matrices.

    Every sigma_n is written as an affine function of the unknown kernel
    coefficients c^(0), c^(1), ... .  The linear system collects

    * normalization: sum_j c^(0)_j Tr[x_j] = 1 and sum_j c^(n)_j Tr[x_j] = 0,
    * solvability: Tr[A_i (E sigma_{n-1} + F sigma_{n-2})] = 0 for every order n,

    and orders are added until c^(0..order) is pinned down, at most
    ``max_lookahead`` orders beyond ``order``.
    """
    if order < 0:
        raise ValueError("order must be non-negative")
    ss = _base_stationary(pg, tol) if ss is None else ss
    basis = ss.stationary_basis
    K = len(basis)
    if K == 0:
        raise CertificationError("base generator has no stationary matrix")
    d = pg.dim
    if max_lookahead is None:
        max_lookahead = max(4, 2 * d)
    inv = ConstrainedInverse(pg.base.superoperator, ss, tol)
    E, F = build_E(pg).matrix, build_F(pg).matrix
    avec = inv._avec                       # rows: vec(A_i^T)
    traces = np.array([np.trace(x) for x in basis])
    kvec = inv._kvec

    top = order + max_lookahead
    U = K * (top + 1)                      # unknowns c^(n)_j, index n*K + j
    # affine vectors: shape (d^2, U + 1), column 0 = constant part
    sig = []
    rows, rhs = [], []

    def coeff_block(n):
        a = np.zeros((d * d, U + 1), dtype=complex)
        a[:, 1 + n * K: 1 + (n + 1) * K] = kvec
        return a

    row = np.zeros(U + 1, dtype=complex)
    row[1:1 + K] = traces
    rows.append(row[1:])
    rhs.append(1.0)

    resolved_at = None
    sol = None
    for n in range(0, top + 1):
        if n == 0:
            sig.append(coeff_block(0))
        else:
            prev1 = sig[n - 1]
            prev2 = sig[n - 2] if n >= 2 else np.zeros_like(prev1)
            t = E @ prev1 + F @ prev2
            cond = avec @ t                                  # solvability rows, affine
            for i in range(K):
                rows.append(cond[i, 1:])
                rhs.append(-cond[i, 0])
            sig.append(-(inv.matrix_projected @ t) + coeff_block(n))
            tr = np.zeros(U, dtype=complex)
            tr[n * K:(n + 1) * K] = traces
            rows.append(tr)
            rhs.append(0.0)
        if n < order + 1:
            continue
        used = K * (n + 1)
        a_used = np.vstack(rows)[:, :used]
        b = np.array(rhs, dtype=complex)
        # unit-norm rows; rows that vanish to rounding are identities and dropped
        norms = np.linalg.norm(a_used, axis=1)
        keep = norms > 1e-12 * np.max(norms)
        if np.any(np.abs(b[~keep]) > tol.match_tol):
            raise CertificationError("solvability conditions are inconsistent",
                                     defect=float(np.max(np.abs(b[~keep]))))
        a_used = a_used[keep] / norms[keep, None]
        b = b[keep] / norms[keep]
        x, *_ = np.linalg.lstsq(a_used, b, rcond=None)
        if np.linalg.norm(a_used @ x - b) > 1e3 * tol.match_tol:
            raise CertificationError("solvability conditions are inconsistent",
                                     defect=float(np.linalg.norm(a_used @ x - b)))
        ns = null_space_matrix(a_used, tol)
        free = ns[: K * (order + 1), :] if ns.size else ns
        if free.size == 0 or np.max(np.linalg.norm(free, axis=0)) <= 1e-8:
            resolved_at = n
            sol = np.concatenate([x, np.zeros(U - used, dtype=complex)])
            break
        last_free = free
    if resolved_at is None:
        dirs = [unvectorize(kvec @ last_free[:K, c], d) for c in range(last_free.shape[1])]
        raise DegenerateBeyondOrderError(
            f"solvability conditions leave {last_free.shape[1]} direction(s) free through "
            f"order {order} with look-ahead {max_lookahead}", last_free.T)

    full = np.concatenate([[1.0], sol])
    sigmas = [unvectorize(sig[n] @ full, d) for n in range(order + 1)]
    alphas = [sol[n * K:(n + 1) * K] for n in range(order + 1)]
    series = PerturbationSeries(sigmas, alphas, order, pg, lookahead=resolved_at - order)
    _finish(series, probe_lambdas)
    return series


def expand(pg: PerturbedGenerator, order: int = 10, tol: Tolerance = DEFAULT_TOL, **kw) -> PerturbationSeries:
    ss = _base_stationary(pg, tol)
    if len(ss.stationary_basis) == 1:
        return expand_unique(pg, order, tol, ss=ss)
    return expand_degenerate(pg, order, tol, ss=ss, **kw)


# --- closed forms for the worked cases (independent of the general solver) ---------

def merge_alpha(q1, q2, rho1, rho2, k) -> float:
    """Weight of rho1 when two enclosures are joined by a new transfer operator k."""
    into1 = np.trace(q1 @ k @ rho2 @ dag(k) @ q1).real
    into2 = np.trace(q2 @ k @ rho1 @ dag(k) @ q2).real
    return float(into1 / (into2 + into1))


def hamiltonian_dephasing_alpha(pg: PerturbedGenerator, q1, rho1, rho2, ss: StationarySet,
                                tol: Tolerance = DEFAULT_TOL):
    """alpha0 fixed at second order when two enclosures are coupled by a Hamiltonian V.

    Returns (alpha0, factor) with factor = Tr[Q1 E D0^{-1} E (rho1 - rho2)], which
    must be non-negative; a clearly negative factor raises CertificationError.
    """
    inv = ConstrainedInverse(pg.base.superoperator, ss, tol)
    E = build_E(pg)

    def chain(x):
        return np.trace(q1 @ E.apply(inv(E.apply(x)))).real

    factor = chain(rho1 - rho2)
    if factor < -tol.match_tol:
        raise CertificationError("second-order transfer factor is negative", defect=factor)
    if abs(factor) <= tol.match_tol:
        raise DegenerateBeyondOrderError("second-order factor vanishes", np.zeros((1, 0)))
    return float(-chain(rho2) / factor), float(factor)


def cascade_merge_alpha(pg: PerturbedGenerator, q1, rho1, rho2, n_levels: int, ss: StationarySet,
                        tol: Tolerance = DEFAULT_TOL):
    """alpha0 for enclosures joined only after n_levels applications of G = -D0^{-1} F.

    alpha0 = -Tr[Q1 F G^N rho2] / Tr[Q1 F G^N (rho1 - rho2)]; returns (alpha0, denominator).
    """
    inv = ConstrainedInverse(pg.base.superoperator, ss, tol)
    F = build_F(pg)

    def lift(x):
        for _ in range(n_levels):
            x = -inv(F.apply(x))
        return np.trace(q1 @ F.apply(x)).real

    denom = lift(rho1 - rho2)
    if abs(denom) <= tol.match_tol:
        raise DegenerateBeyondOrderError("transfer after the given number of levels vanishes", np.zeros((1, 0)))
    return float(-lift(rho2) / denom), float(denom)


def brute_force_state(g: LindbladGenerator, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Unique stationary state from a dense null-space computation."""
    ns = null_space_matrix(g.superoperator.matrix, tol)
    if ns.shape[1] != 1:
        raise DegenerateBaseError(f"kernel has dimension {ns.shape[1]}")
    rho = unvectorize(ns[:, 0], g.dim)
    return rho / np.trace(rho)


# --- continuity probe --------------------------------------------------------------

@dataclass
class StructureSnapshot:
    lam: float
    kernel_dim: int
    peripheral_dim: int        # total dimension of imaginary-axis eigenspaces, 0 included
    oscillating: int           # imaginary-axis eigenvalue clusters away from 0
    commutant_dim: int
    level_ranks: list
    basins: list               # projectors of all basins, level by level
    n_stationary_states: int
    n_phase_relations: int


@dataclass
class ContinuityReport:
    snapshots: list
    violations: list
    merges: dict               # lam -> list of (level, index, [(base level, base index), ...])

    def trajectory(self, attr: str) -> list:
        return [getattr(s, attr) for s in self.snapshots]


def _snapshot(g: LindbladGenerator, lam: float, tol: Tolerance, seed: int) -> StructureSnapshot:
    from .dynamics import peripheral_projection
    from .structure import analyze

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = analyze(g, tol, seed=seed)
    periph = peripheral_projection(g, tol)
    pdim = sum(int(round(np.trace(p).real)) for _, p in periph)
    osc = sum(1 for lam_, _ in periph if abs(lam_.imag) > 0)
    return StructureSnapshot(
        lam=lam,
        kernel_dim=rep.spectrum.kernel_dim(),
        peripheral_dim=pdim,
        oscillating=osc,
        commutant_dim=rep.commutant_dim,
        level_ranks=[[b.rank for b in lev] for lev in rep.levels],
        basins=[[b.projector for b in lev] for lev in rep.levels],
        n_stationary_states=len(rep.stationary.basis_states),
        n_phase_relations=len(rep.stationary.phase_relations),
    )


def structure_continuity_probe(pg: PerturbedGenerator, lambdas, tol: Tolerance = DEFAULT_TOL,
                               seed: int | None = None) -> ContinuityReport:
    """Structure at lam = 0 and at each requested lam, with the one-way rule checked.

    Counts that can only drop away from lam = 0 (kernel dimension, imaginary-axis
    dimension, commutant dimension) are compared; any increase is a violation.
    A basin at lam that overlaps several basins at lam = 0 is reported as a merge.
    """
    from .structure import DEFAULT_SEED

    seed = DEFAULT_SEED if seed is None else seed
    lambdas = [float(x) for x in lambdas]
    if not all(math.isfinite(x) for x in lambdas):
        raise ValueError("lambda values must be finite")
    base = _snapshot(pg.base, 0.0, tol, seed)
    snaps = [base]
    violations = []
    merges = {}
    for lam in lambdas:
        s = _snapshot(pg.at(lam), lam, tol, seed)
        snaps.append(s)
        for attr in ("kernel_dim", "peripheral_dim", "commutant_dim"):
            if getattr(s, attr) > getattr(base, attr):
                violations.append((lam, attr, getattr(base, attr), getattr(s, attr)))
        found = []
        for lv, lev in enumerate(s.basins):
            for bi, p in enumerate(lev):
                hits = [(blv, bbi) for blv, blev in enumerate(base.basins) for bbi, q in enumerate(blev)
                        if np.real(np.trace(p @ q)) > 0.5]
                if len(hits) > 1:
                    found.append((lv, bi, hits))
        merges[lam] = found
    return ContinuityReport(snaps, violations, merges)


# --- JSON --------------------------------------------------------------------------

def perturbation_from_json(obj: dict, tol: Tolerance = DEFAULT_TOL) -> PerturbedGenerator:
    if not isinstance(obj, dict) or "base" not in obj:
        raise ValueError("perturbation object needs a 'base' generator")
    base = generator_from_json(obj["base"])
    v = matrix_from_json(obj["v"]) if obj.get("v") is not None else None
    w = matrix_from_json(obj["w"]) if obj.get("w") is not None else None
    ks = tuple(matrix_from_json(m) for m in obj.get("k_ops", []))
    return PerturbedGenerator(base, v, w, ks, tol)


def perturbation_to_json(pg: PerturbedGenerator) -> dict:
    return {
        "base": generator_to_json(pg.base),
        "v": matrix_to_json(pg.v),
        "w": matrix_to_json(pg.w),
        "k_ops": [matrix_to_json(k) for k in pg.k_ops],
    }


def series_to_json(series: PerturbationSeries) -> dict:
    from .linop import complex_to_json

    return {
        "order": series.order,
        "sigmas": [matrix_to_json(s) for s in series.sigmas],
        "alphas": [[complex_to_json(a) for a in al] for al in series.alphas],
        "residuals": [{"lambda": k, "residual": v} for k, v in sorted(series.residual_at.items())],
        "radius_estimate": None if math.isinf(series.radius_estimate()) else series.radius_estimate(),
        "lookahead": series.lookahead,
        "warnings": list(series.warnings),
    }
