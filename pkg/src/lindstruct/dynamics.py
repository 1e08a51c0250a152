"""Time evolution, trajectories and runtime monitors."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import CertificationError, DimensionError
from .generator import LindbladGenerator
from .linop import (
    DEFAULT_TOL,
    Tolerance,
    as_square,
    dag,
    expm,
    matrix_to_json,
    null_space_matrix,
    op_norm,
    unvectorize,
    vectorize,
)
from .spectral import axis_tol, cluster_values


def _state(g: LindbladGenerator, rho0) -> np.ndarray:
    rho = as_square(rho0, "rho0")
    if rho.shape[0] != g.dim:
        raise DimensionError(f"state has dim {rho.shape[0]}, generator has dim {g.dim}")
    return rho


def evolve(g: LindbladGenerator, rho0, t: float) -> np.ndarray:
    """rho(t) = exp(t D) rho0 for t >= 0."""
    rho = _state(g, rho0)
    t = float(t)
    if not math.isfinite(t) or t < 0:
        raise ValueError(f"evolution time must be finite and non-negative, got {t}")
    return expm(g.superoperator, t).apply(rho)


def evolve_observable(g: LindbladGenerator, f, t: float) -> np.ndarray:
    """Heisenberg picture: exp(t D^+) f."""
    f = _state(g, f)
    t = float(t)
    if not math.isfinite(t) or t < 0:
        raise ValueError(f"evolution time must be finite and non-negative, got {t}")
    return expm(g.superoperator.adjoint(), t).apply(f)


@dataclass
class Trajectory:
    times: np.ndarray
    states: list
    monitors: list                  # one dict per time point

    def entry_series(self, i: int, j: int) -> np.ndarray:
        return np.array([s[i, j] for s in self.states])


def _monitor(rho: np.ndarray, blocks, rank_tol: float) -> dict:
    w = np.linalg.eigvalsh(0.5 * (rho + dag(rho)))
    rec = {
        "min_eigenvalue": float(w[0]),
        "rank": int(np.sum(w > rank_tol)),
        "trace_defect": float(abs(np.trace(rho) - 1.0)),
        "hermiticity_defect": op_norm(rho - dag(rho)),
    }
    if blocks:
        for a in range(len(blocks)):
            for b in range(a + 1, len(blocks)):
                rec[f"block_{a}_{b}"] = op_norm(blocks[a] @ rho @ blocks[b])
    return rec


def trajectory(g: LindbladGenerator, rho0, t_max: float, steps: int, blocks=None,
               rank_tol: float = 1e-9) -> Trajectory:
    """States on a uniform grid of ``steps`` intervals in [0, t_max].

    ``blocks`` is an optional list of projectors; the norms of the
    off-diagonal blocks P_a rho P_b (a < b) are then recorded as monitors.
    """
    rho = _state(g, rho0)
    if int(steps) != steps or steps < 1:
        raise ValueError("steps must be a positive integer")
    t_max = float(t_max)
    if not math.isfinite(t_max) or t_max <= 0:
        raise ValueError("t_max must be positive and finite")
    times = np.linspace(0.0, t_max, int(steps) + 1)
    blocks = [np.asarray(b, dtype=complex) for b in blocks] if blocks else None
    states = [rho.copy()]
    for t in times[1:]:
        states.append(evolve(g, rho, t))
    return Trajectory(times, states, [_monitor(s, blocks, rank_tol) for s in states])


@dataclass
class MonitorReport:
    ok: bool
    worst_margin: float
    rate: float
    violations: list = field(default_factory=list)   # (time index, branch, margin)


def check_rank_bound(g: LindbladGenerator, traj: Trajectory, slack: float = 1e-8) -> MonitorReport:
    """Check r_j(t) >= exp(-c t) r_j(0) - slack along eigenvalue branches, c = sum ||h_a||^2.

    Branches are followed between consecutive samples by the assignment that
    maximizes the total squared eigenvector overlap.
    """
    rate = float(sum(op_norm(h) ** 2 for h in g.transfer_ops))
    w0, v0 = np.linalg.eigh(0.5 * (traj.states[0] + dag(traj.states[0])))
    start = w0.copy()
    prev_v = v0
    perm = np.arange(len(w0))        # branch b sits at column perm[b] of the current eigvecs
    worst = math.inf
    violations = []
    for k in range(1, len(traj.states)):
        rho = traj.states[k]
        w, v = np.linalg.eigh(0.5 * (rho + dag(rho)))
        overlap = np.abs(dag(prev_v[:, perm]) @ v) ** 2
        _, cols = linear_sum_assignment(-overlap)
        perm = cols
        prev_v = v
        bound = math.exp(-rate * traj.times[k]) * start
        margin = w[perm] - bound
        for b in np.nonzero(margin < -slack)[0]:
            violations.append((k, int(b), float(margin[b])))
        worst = min(worst, float(np.min(margin)))
    if worst is math.inf:
        worst = 0.0
    return MonitorReport(not violations, worst, rate, violations)


# --- asymptotics -------------------------------------------------------------------

def peripheral_projection(g: LindbladGenerator, tol: Tolerance = DEFAULT_TOL):
    """Spectral projections onto the eigenspaces of D on the imaginary axis.

    Returns a list of (eigenvalue, projection matrix) pairs; the eigenvalue is
    purely imaginary.  Each projection is R (L^+ R)^{-1} L^+ with R, L bases of
    the right and left eigenspaces.
    """
    m = g.superoperator.matrix
    n = m.shape[0]
    w = np.linalg.eigvals(m)
    eps = axis_tol(g, tol)
    axis = w[np.abs(w.real) <= eps]
    out = []
    for idx in cluster_values(axis, eps):
        lam = complex(0.0, float(np.mean(axis[idx].imag)))
        local = Tolerance(rank_tol=max(tol.rank_tol, eps / max(op_norm(m), 1.0)),
                          match_tol=tol.match_tol, eig_group_tol=tol.eig_group_tol)
        r = null_space_matrix(m - lam * np.eye(n), local)
        left = null_space_matrix(dag(m - lam * np.eye(n)), local)
        if r.shape[1] != left.shape[1] or r.shape[1] == 0:
            raise CertificationError("left and right eigenspaces on the imaginary axis differ",
                                     defect=abs(r.shape[1] - left.shape[1]))
        out.append((lam, r @ np.linalg.solve(dag(left) @ r, dag(left))))
    out.sort(key=lambda pair: (abs(pair[0].imag), pair[0].imag))
    return out


@dataclass
class AsymptoticClass:
    weight: float                 # lambda_k
    relations: np.ndarray         # R_k, n x n, trace one
    hamiltonian: np.ndarray       # H_0k
    inner_state: np.ndarray       # rho_k
    members: list
    embeddings: list
    anchor_basis: np.ndarray


@dataclass
class AsymptoticForm:
    dim: int
    classes: list
    decomposition_defect: float   # ||limit part - sum of class contributions|| at t = 0
    check_time: float
    check_residual: float

    def at(self, t: float) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for c in self.classes:
            phase = np.exp(-1j * np.diag(c.hamiltonian).real * t)
            rel = (phase[:, None] * c.relations * np.conj(phase)[None, :])
            rho = c.anchor_basis @ c.inner_state @ dag(c.anchor_basis)
            for a, va in enumerate(c.embeddings):
                for b, vb in enumerate(c.embeddings):
                    if rel[a, b] != 0:
                        out += c.weight * rel[a, b] * (va @ rho @ dag(vb))
        return out


def asymptotic_state(g: LindbladGenerator, rho0, structure, tol: Tolerance = DEFAULT_TOL,
                     check_time: float | None = None) -> AsymptoticForm:
    """Long-time form of rho(t): a direct sum over dephasing classes of weight * rotating R_k (x) rho_k."""
    rho = _state(g, rho0)
    if structure.dim != g.dim:
        raise DimensionError("structure report belongs to a generator of another dimension")
    limit = np.zeros_like(rho)
    for lam, proj in peripheral_projection(g, tol):
        limit += unvectorize(proj @ vectorize(rho), g.dim)
    classes = []
    recon = np.zeros_like(rho)
    for dc in structure.dephasing_classes:
        n = dc.multiplicity
        coeff = np.zeros((n, n), dtype=complex)
        for a in range(n):
            for b in range(n):
                block = dc.block_state(a, b)
                coeff[a, b] = np.vdot(block, limit) / np.vdot(block, block).real
                recon += coeff[a, b] * block
        weight = float(np.real(np.trace(coeff)))
        rel = coeff / weight if weight > 1e-14 else np.eye(n) / n
        classes.append(AsymptoticClass(max(weight, 0.0), rel, dc.hamiltonian, dc.inner_state,
                                       dc.members, dc.embeddings, dc.anchor_basis))
    defect = op_norm(recon - limit)
    if check_time is None:
        gap = structure.spectrum.gap()
        check_time = 50.0 / gap if gap > 0 else 0.0
    form = AsymptoticForm(g.dim, classes, defect, check_time, 0.0)
    form.check_residual = op_norm(evolve(g, rho, check_time) - form.at(check_time))
    return form


# --- export ------------------------------------------------------------------------

def trajectory_csv(traj: Trajectory) -> str:
    d = traj.states[0].shape[0]
    monitor_keys = list(traj.monitors[0].keys()) if traj.monitors else []
    header = ["t"]
    for i in range(d):
        for j in range(d):
            header += [f"re_{i}_{j}", f"im_{i}_{j}"]
    header += monitor_keys
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for t, s, mon in zip(traj.times, traj.states, traj.monitors):
        row = [repr(float(t))]
        for z in s.ravel():
            row += [repr(float(z.real)), repr(float(z.imag))]
        row += [repr(mon[k]) for k in monitor_keys]
        writer.writerow(row)
    return buf.getvalue()


def trajectory_to_json(traj: Trajectory) -> dict:
    return {
        "times": [float(t) for t in traj.times],
        "states": [matrix_to_json(s) for s in traj.states],
        "monitors": traj.monitors,
    }
