"""Lindblad generators {H, h_a}: action, superoperator matrices, validity, restriction."""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from . import kernels
from .errors import DimensionError
from .linop import (
    DEFAULT_TOL,
    Superoperator,
    Tolerance,
    as_square,
    dag,
    expm,
    matrix_from_json,
    matrix_to_json,
    op_norm,
    range_basis,
)


@dataclass(frozen=True, eq=False)
class LindbladGenerator:
    """Hamiltonian plus an ordered list of transfer operators.

    The list is taken as given: no re-gauging (tracelessness, unitary mixing of
    the h_a) is ever applied, and every structural test quantifies over exactly
    these operators.  Hermiticity of ``hamiltonian`` is checked by
    :func:`validate`, not enforced here.
    """

    hamiltonian: np.ndarray
    transfer_ops: tuple = ()
    labels: tuple | None = None

    def __post_init__(self):
        h = as_square(self.hamiltonian, "hamiltonian").copy()
        d = h.shape[0]
        ops = []
        for i, op in enumerate(self.transfer_ops):
            op = as_square(op, f"transfer_ops[{i}]").copy()
            if op.shape != (d, d):
                raise DimensionError(f"transfer_ops[{i}] has shape {op.shape}, expected {(d, d)}")
            op.setflags(write=False)
            ops.append(op)
        h.setflags(write=False)
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "transfer_ops", tuple(ops))
        if self.labels is not None:
            labels = tuple(str(x) for x in self.labels)
            if len(labels) != len(ops):
                raise ValueError("labels must match transfer_ops one to one")
            object.__setattr__(self, "labels", labels)
        if len(ops) > max(d * d - 1, 1):
            warnings.warn(
                f"{len(ops)} transfer operators exceed dim^2 - 1 = {d * d - 1}; "
                "the generator can be written with fewer",
                stacklevel=3,
            )

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    @classmethod
    def from_ops(cls, hamiltonian=None, ops: Sequence = (), dim: int | None = None):
        if hamiltonian is None:
            if dim is None:
                if not ops:
                    raise ValueError("need a Hamiltonian, an operator or an explicit dim")
                dim = np.asarray(ops[0]).shape[0]
            hamiltonian = np.zeros((dim, dim), dtype=complex)
        return cls(np.asarray(hamiltonian, dtype=complex), tuple(ops))

    @cached_property
    def superoperator(self) -> Superoperator:
        return Superoperator(self.dim, kernels.lindblad_matrix(self.hamiltonian, self.transfer_ops))

    @cached_property
    def jump_sum(self) -> np.ndarray:
        """sum_a h_a^dagger h_a."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for h in self.transfer_ops:
            out += dag(h) @ h
        return out

    @cached_property
    def scale(self) -> float:
        """||H|| + ||sum h^+ h||, a basis-independent size used as a rank floor."""
        return float(np.linalg.norm(self.hamiltonian, 2) + np.linalg.norm(self.jump_sum, 2))

    def scaled(self, factor: float) -> "LindbladGenerator":
        """Generator of the time-rescaled dynamics D -> factor * D (factor >= 0)."""
        root = np.sqrt(factor)
        return LindbladGenerator(self.hamiltonian * factor, tuple(root * h for h in self.transfer_ops))


def _check_operand(g: LindbladGenerator, x) -> np.ndarray:
    x = as_square(x, "operand")
    if x.shape[0] != g.dim:
        raise DimensionError(f"operand has dim {x.shape[0]}, generator has dim {g.dim}")
    return x


def apply_schrodinger(g: LindbladGenerator, x) -> np.ndarray:
    """D(x) = -i[H, x] + sum_a (h x h^+ - 1/2 {h^+ h, x})."""
    x = _check_operand(g, x)
    H = g.hamiltonian
    k = g.jump_sum
    out = -1j * (H @ x - x @ H) - 0.5 * (k @ x + x @ k)
    for h in g.transfer_ops:
        out += h @ x @ dag(h)
    return out


def apply_heisenberg(g: LindbladGenerator, f) -> np.ndarray:
    """D^+(f) = i[H, f] + sum_a (h^+ f h - 1/2 {h^+ h, f})."""
    f = _check_operand(g, f)
    H = g.hamiltonian
    k = g.jump_sum
    out = 1j * (H @ f - f @ H) - 0.5 * (k @ f + f @ k)
    for h in g.transfer_ops:
        out += dag(h) @ f @ h
    return out


def build_superoperator(g: LindbladGenerator) -> Superoperator:
    return g.superoperator


def build_adjoint_superoperator(g: LindbladGenerator) -> Superoperator:
    return g.superoperator.adjoint()


def choi_matrix(s: Superoperator) -> np.ndarray:
    """Choi matrix sum_ij E_ij (x) S(E_ij); row index i*d + a."""
    d = s.dim
    m4 = s.matrix.reshape(d, d, d, d, order="F")  # m4[a, b, i, j] = S(E_ij)[a, b]
    return m4.transpose(2, 0, 3, 1).reshape(d * d, d * d)


@dataclass
class ValidationReport:
    hermiticity_defect: float
    trace_defect: float
    choi_min_eigenvalue: float
    choi_dt: float
    n_ops: int
    dim: int
    hermitian_ok: bool
    trace_ok: bool
    cp_ok: bool
    warnings: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.hermitian_ok and self.trace_ok and self.cp_ok

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "dim": self.dim,
            "n_ops": self.n_ops,
            "hermiticity_defect": self.hermiticity_defect,
            "hermitian_ok": self.hermitian_ok,
            "trace_defect": self.trace_defect,
            "trace_ok": self.trace_ok,
            "choi_dt": self.choi_dt,
            "choi_min_eigenvalue": self.choi_min_eigenvalue,
            "cp_ok": self.cp_ok,
            "warnings": list(self.warnings),
        }


def validate(g: LindbladGenerator, tol: Tolerance = DEFAULT_TOL, dt: float = 1e-3,
             cp_threshold: float = 1e-8) -> ValidationReport:
    """Certify Hermiticity of H, trace preservation and complete positivity.

    Complete positivity is checked on the short-time propagator exp(dt D): its
    Choi matrix must have no eigenvalue below ``-cp_threshold``.
    """
    H = g.hamiltonian
    herm = op_norm(H - dag(H))
    trace = op_norm(apply_heisenberg(g, np.eye(g.dim)))
    choi = choi_matrix(expm(g.superoperator, dt))
    choi = 0.5 * (choi + dag(choi))
    min_eig = float(np.linalg.eigvalsh(choi)[0])
    scale = max(1.0, op_norm(H))
    notes = []
    if len(g.transfer_ops) > max(g.dim * g.dim - 1, 1):
        notes.append(f"{len(g.transfer_ops)} transfer operators exceed dim^2 - 1")
    return ValidationReport(
        hermiticity_defect=herm,
        trace_defect=trace,
        choi_min_eigenvalue=min_eig,
        choi_dt=dt,
        n_ops=len(g.transfer_ops),
        dim=g.dim,
        hermitian_ok=herm <= tol.match_tol * scale,
        trace_ok=trace <= tol.match_tol * max(1.0, g.superoperator.norm()),
        cp_ok=min_eig >= -cp_threshold,
        warnings=notes,
    )


def restrict_to_basis(g: LindbladGenerator, basis: np.ndarray) -> LindbladGenerator:
    """Generator {B^+ H B, B^+ h_a B} for an orthonormal d x r ``basis`` B."""
    b = np.asarray(basis, dtype=complex)
    bd = dag(b)
    return LindbladGenerator(bd @ g.hamiltonian @ b, tuple(bd @ h @ b for h in g.transfer_ops))


def restrict(g: LindbladGenerator, p, tol: Tolerance = DEFAULT_TOL) -> LindbladGenerator:
    """Reduced generator {PHP, P h_a P} written on a canonical orthonormal basis of range(p).

    The basis is :func:`lindstruct.linop.range_basis` of ``p``; use it to map
    matrices of the reduced system back: X_full = B X_reduced B^+.
    """
    return restrict_to_basis(g, range_basis(p, tol))


def has_adjoint_closed_ops(g: LindbladGenerator, tol: Tolerance = DEFAULT_TOL) -> bool:
    """True if the set {h_a^+} equals the set {h_a} (each op is self-adjoint or has its adjoint partner)."""
    ops = list(g.transfer_ops)
    unused = list(range(len(ops)))
    for h in ops:
        target = dag(h)
        hit = next((j for j in unused if op_norm(ops[j] - target) <= tol.match_tol), None)
        if hit is None:
            return False
        unused.remove(hit)
    return True


def is_self_adjoint(g: LindbladGenerator, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Whether D equals its Hilbert-Schmidt adjoint."""
    m = g.superoperator.matrix
    return op_norm(m - m.conj().T) <= tol.match_tol * max(1.0, op_norm(m))


def density_defects(rho) -> tuple[float, float, float]:
    """(hermiticity defect, |trace - 1|, smallest eigenvalue of the Hermitian part)."""
    rho = as_square(rho, "rho")
    herm = op_norm(rho - dag(rho))
    tr = abs(np.trace(rho) - 1.0)
    min_eig = float(np.linalg.eigvalsh(0.5 * (rho + dag(rho)))[0])
    return herm, float(tr), min_eig


def is_density_matrix(rho, atol: float = DEFAULT_TOL.match_tol) -> bool:
    herm, tr, min_eig = density_defects(rho)
    return herm <= atol and tr <= atol and min_eig >= -atol


# --- JSON ---------------------------------------------------------------------------

def generator_to_json(g: LindbladGenerator) -> dict:
    out = {
        "dim": g.dim,
        "hamiltonian": matrix_to_json(g.hamiltonian),
        "transfer_ops": [matrix_to_json(h) for h in g.transfer_ops],
    }
    if g.labels is not None:
        out["labels"] = list(g.labels)
    return out


def generator_from_json(obj: dict) -> LindbladGenerator:
    if not isinstance(obj, dict):
        raise ValueError("generator must be a JSON object")
    try:
        dim = int(obj["dim"])
    except (KeyError, TypeError, ValueError):
        raise ValueError("generator needs an integer 'dim'") from None
    if dim < 1:
        raise ValueError("'dim' must be positive")
    if "hamiltonian" in obj and obj["hamiltonian"] is not None:
        H = matrix_from_json(obj["hamiltonian"])
    else:
        H = np.zeros((dim, dim), dtype=complex)
    ops = [matrix_from_json(m) for m in obj.get("transfer_ops", [])]
    for m in [H, *ops]:
        if m.shape != (dim, dim):
            raise DimensionError(f"matrix of shape {m.shape} in a generator of dim {dim}")
    return LindbladGenerator(H, tuple(ops), obj.get("labels"))


def load_generator(path) -> LindbladGenerator:
    with open(Path(path)) as fh:
        return generator_from_json(json.load(fh))
