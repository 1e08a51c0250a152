"""Worked examples shipped as JSON fixtures, and a runner that checks them."""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from importlib import resources

import numpy as np
import scipy.linalg

from .dynamics import evolve
from .errors import LindstructError, UnknownFixtureError
from .generator import LindbladGenerator, generator_from_json, has_adjoint_closed_ops, validate
from .linop import (
    DEFAULT_TOL,
    Tolerance,
    complex_from_json,
    matrix_from_json,
    op_norm,
    vectorize,
)
from .perturbation import (
    PerturbedGenerator,
    brute_force_state,
    cascade_merge_alpha,
    expand,
    hamiltonian_dephasing_alpha,
    merge_alpha,
    perturbation_from_json,
)
from .spectral import block_superop, decompose, invariant_observable_closure, stationary_states
from .structure import analyze, detect_max_symmetry

FIXTURE_SCHEMA = "lindstruct.fixture/1"


@dataclass(frozen=True)
class Fixture:
    name: str
    title: str
    kind: str                     # "generator" or "perturbation"
    system: object                # LindbladGenerator or PerturbedGenerator
    expected: dict
    notes: tuple = ()

    @property
    def generator(self) -> LindbladGenerator:
        return self.system if self.kind == "generator" else self.system.base


def _data_dir():
    return resources.files("lindstruct") / "data"


def list_fixtures() -> list[str]:
    return sorted(p.name[:-5] for p in _data_dir().iterdir() if p.name.endswith(".json"))


def fixture_from_json(obj: dict) -> Fixture:
    if obj.get("schema") != FIXTURE_SCHEMA:
        raise ValueError(f"unsupported fixture schema {obj.get('schema')!r}")
    kind = obj["kind"]
    if kind == "generator":
        system = generator_from_json(obj["generator"])
    elif kind == "perturbation":
        system = perturbation_from_json(obj["perturbation"])
    else:
        raise ValueError(f"unknown fixture kind {kind!r}")
    return Fixture(obj["name"], obj.get("title", ""), kind, system, obj.get("expected", {}),
                   tuple(obj.get("notes", ())))


def load(name: str) -> Fixture:
    if name not in list_fixtures():
        raise UnknownFixtureError(f"no fixture named {name!r}; known: {', '.join(list_fixtures())}")
    with (_data_dir() / f"{name}.json").open() as fh:
        return fixture_from_json(json.load(fh))


# --- checks ------------------------------------------------------------------------

@dataclass
class CheckResult:
    key: str
    passed: bool
    defect: float
    tol: float | None
    detail: str = ""


@dataclass
class FixtureResult:
    name: str
    checks: list = field(default_factory=list)
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.error is None and all(c.passed for c in self.checks)


@dataclass
class CorpusReport:
    results: list

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def failures(self) -> list:
        return [(r.name, c) for r in self.results for c in r.checks if not c.passed] + \
               [(r.name, r.error) for r in self.results if r.error]


def _mats(lst):
    return [matrix_from_json(m) for m in lst]


def subspace_angle(a: list, b: list) -> float:
    """Largest principal angle between span(a) and span(b) in Hilbert-Schmidt geometry."""
    if not a and not b:
        return 0.0
    if len(a) != len(b):
        return float(np.pi / 2)
    return float(np.max(scipy.linalg.subspace_angles(np.column_stack([vectorize(x) for x in a]),
                                                     np.column_stack([vectorize(x) for x in b]))))


def _match_sets(got: list, want: list) -> float:
    """Worst distance after greedily pairing each expected matrix with its nearest computed one."""
    if len(got) != len(want):
        return float("inf")
    left = list(got)
    worst = 0.0
    for w in want:
        dists = [op_norm(g - w) for g in left]
        k = int(np.argmin(dists))
        worst = max(worst, dists[k])
        left.pop(k)
    return worst


def _multiset_distance(got, want) -> float:
    got = sorted(got, key=lambda z: (round(z.real, 6), round(z.imag, 6)))
    want = sorted(want, key=lambda z: (round(z.real, 6), round(z.imag, 6)))
    if len(got) != len(want):
        return float("inf")
    return max((abs(a - b) for a, b in zip(got, want)), default=0.0)


def _rates(g: LindbladGenerator, entries) -> np.ndarray:
    """Matrix R with d/dt r_a = sum_b R[a, b] r_b over the listed (1-based) matrix entries."""
    d = g.dim
    idx = [(i - 1, j - 1) for i, j in entries]
    out = np.zeros((len(idx), len(idx)), dtype=complex)
    for b, (i, j) in enumerate(idx):
        unit = np.zeros((d, d), dtype=complex)
        unit[i, j] = 1.0
        image = g.superoperator.apply(unit)
        for a, (k, m) in enumerate(idx):
            out[a, b] = image[k, m]
    return out


class _Context:
    """Lazily computed analyses shared by the checks of one fixture."""

    def __init__(self, fx: Fixture, tol: Tolerance, seed: int):
        self.fx, self.tol, self.seed = fx, tol, seed
        self._report = None
        self._series = {}

    @property
    def report(self):
        if self._report is None:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                self._report = analyze(self.fx.generator, self.tol, seed=self.seed)
        return self._report

    def series(self, order):
        if order not in self._series:
            self._series[order] = expand(self.fx.system, order, self.tol)
        return self._series[order]


def _check(key, entry, ctx: _Context) -> CheckResult:
    g = ctx.fx.generator
    tol = entry.get("tol")
    val = entry["value"]
    rep = ctx.report if ctx.fx.kind == "generator" else None

    def within(defect, detail=""):
        return CheckResult(key, bool(defect <= tol), float(defect), tol, detail)

    def equal(got, want):
        return CheckResult(key, got == want, 0.0 if got == want else 1.0, None, f"got {got!r}, expected {want!r}")

    if key == "spectrum":
        return within(_multiset_distance(rep.spectrum.eigenvalues, [complex_from_json(z) for z in val]))
    if key == "restricted_spectrum":
        basis = np.eye(g.dim, dtype=complex)[:, val["basis"]]
        w = np.linalg.eigvals(block_superop(g, basis, basis))
        return within(_multiset_distance(w, [complex_from_json(z) for z in val["values"]]))
    if key == "stationary_states":
        return within(_match_sets(rep.stationary.basis_states, _mats(val)))
    if key == "kernel_dim":
        return equal(rep.spectrum.kernel_dim(), val)
    if key == "commutant_dim":
        return equal(rep.commutant_dim, val)
    if key == "invariant_span":
        return within(subspace_angle(rep.stationary.invariant_observables, _mats(val)))
    if key == "invariant_normalized":
        got = rep.stationary.invariant_observables
        want = _mats(val)
        if len(got) != len(want):
            return CheckResult(key, False, float("inf"), tol, "count differs")
        return within(max(op_norm(a - b) for a, b in zip(got, want)))
    if key == "algebra":
        return equal(invariant_observable_closure(rep.stationary, ctx.tol).is_algebra, val)
    if key == "detailed_balance":
        return equal(has_adjoint_closed_ops(g, ctx.tol), val)
    if key == "level_ranks":
        return equal([[b.rank for b in lev] for lev in rep.levels], val)
    if key == "basins":
        got = [[b.projector for b in lev] for lev in rep.levels]
        want = [[np.diag(np.asarray(p, dtype=complex)) for p in lev] for lev in val]
        if [len(x) for x in got] != [len(x) for x in want]:
            return CheckResult(key, False, float("inf"), None, "level sizes differ")
        worst = max(_match_sets(a, b) for a, b in zip(got, want))
        return CheckResult(key, worst <= ctx.tol.match_tol, worst, ctx.tol.match_tol)
    if key == "intertwiners":
        got = sorted((it.i, it.j, it.energy_shift) for it in rep.intertwiners)
        want = sorted((w["pair"][0], w["pair"][1], w["energy_shift"]) for w in val)
        if [(a, b) for a, b, _ in got] != [(a, b) for a, b, _ in want]:
            return CheckResult(key, False, 1.0, tol, f"got pairs {[(a, b) for a, b, _ in got]}")
        worst = max((abs(x[2] - y[2]) for x, y in zip(got, want)), default=0.0)
        t = 1e-8 if tol is None else tol
        return CheckResult(key, worst <= t, worst, t)
    if key == "dephasing_classes":
        got = [(list(c.members), sorted(abs(float(e) - float(c.energies[0])) for e in c.energies[1:]))
               for c in rep.dephasing_classes]
        want = [(w["members"], sorted(w["energy_gaps"])) for w in val]
        if [m for m, _ in got] != [m for m, _ in want] or any(len(a) != len(b) for (_, a), (_, b) in zip(got, want)):
            return CheckResult(key, False, 1.0, tol, f"got {got}")
        worst = max((abs(x - y) for (_, a), (_, b) in zip(got, want) for x, y in zip(a, b)), default=0.0)
        t = 1e-8 if tol is None else tol
        return CheckResult(key, worst <= t, worst, t)
    if key == "diagonal_rates":
        d = g.dim
        return within(op_norm(_rates(g, [(i, i) for i in range(1, d + 1)]) - matrix_from_json(val)))
    if key == "block_rates":
        return within(op_norm(_rates(g, val["entries"]) - matrix_from_json(val["matrix"])))
    if key == "block_eigenvalue":
        want = complex_from_json(val)
        best = np.inf
        for i, bi in enumerate(rep.levels[0]):
            for j, bj in enumerate(rep.levels[0]):
                if i != j:
                    w = np.linalg.eigvals(block_superop(g, bi.basis, bj.basis))
                    best = min(best, float(np.min(np.abs(w - want))))
        return within(best)
    if key == "oscillation":
        psi = np.array([complex_from_json(z) for z in val["psi"]])
        rho = np.outer(psi, psi.conj())
        t = val["t"]
        rows, cols = val["rows"], val["cols"]
        out = evolve(g, rho, t)[np.ix_(rows, cols)]
        blk = rho[np.ix_(rows, cols)]
        want = np.exp(-1j * t) * np.trace(blk) / 2 * np.eye(len(rows))
        return within(op_norm(out - want))
    if key == "decay_empty":
        q = np.eye(g.dim) - rep.p0
        worst = max(op_norm(q @ evolve(g, r0, val["t"]) @ q) for r0 in _mats(val["initial"]))
        return within(worst)
    if key == "max_symmetric":
        ms = detect_max_symmetry(g, ctx.tol)
        ok = ms.is_maximal == val["is_maximal"] and abs(ms.rate - val["rate"]) <= tol
        return CheckResult(key, ok, abs(ms.rate - val["rate"]), tol, f"maximal={ms.is_maximal} rate={ms.rate:.12g}")
    if key == "superoperator_equals":
        other = load(val).generator
        return within(op_norm(g.superoperator.matrix - other.superoperator.matrix))
    if key == "same_ops_as":
        other = load(val).generator
        same = all(op_norm(a - b) == 0 for a, b in zip(g.transfer_ops, other.transfer_ops))
        return equal(same and len(g.transfer_ops) == len(other.transfer_ops), True)

    # perturbation fixtures
    pg = ctx.fx.system
    if key == "series":
        s = ctx.series(val["order"])
        want = _mats(val["sigmas"])
        return within(max(op_norm(a - b) for a, b in zip(s.sigmas, want)))
    if key == "closed_form":
        s = ctx.series(val["order"])
        return within(op_norm(s.partial_sum(val["lambda"]) - matrix_from_json(val["state"])))
    if key == "stationarity_residual":
        return within(ctx.series(val["order"]).residual(val["lambda"]))
    if key == "radius":
        return within(abs(ctx.series(20).radius_estimate() - val))
    if key == "diverges_at":
        return equal(ctx.series(20).diverges_at(val), True)
    if key == "brute_force":
        s = ctx.series(val["order"])
        lam = val["lambda"]
        return within(op_norm(s.partial_sum(lam) - brute_force_state(pg.at(lam), ctx.tol)))
    if key in ("alpha0", "positive_factor"):
        ss = stationary_states(decompose(pg.base, ctx.tol), ctx.tol)
        q1 = matrix_from_json(val["q1"])
        rho1, rho2 = ss.basis_states
        if op_norm(q1 @ rho1 - rho1) > ctx.tol.match_tol:
            rho1, rho2 = rho2, rho1
        if key == "positive_factor":
            _, factor = hamiltonian_dephasing_alpha(pg, q1, rho1, rho2, ss, ctx.tol)
            return CheckResult(key, factor >= 0, factor, None, f"factor {factor:.6g}")
        s = ctx.series(2)
        got = float(np.real(np.trace(q1 @ s.sigmas[0])))
        if not np.any(pg.v) and not np.any([np.any(x) for x in _shared_k(pg)]):
            if "levels" in val:
                closed, _ = cascade_merge_alpha(pg, q1, rho1, rho2, val["levels"], ss, ctx.tol)
            else:
                q2 = np.eye(pg.dim) - q1
                closed = merge_alpha(q1, q2, rho1, rho2, _new_k(pg))
        else:
            closed, _ = hamiltonian_dephasing_alpha(pg, q1, rho1, rho2, ss, ctx.tol)
        defect = max(abs(got - val["value"]), abs(closed - val["value"]))
        return CheckResult(key, defect <= tol, defect, tol, f"series {got:.12g}, closed form {closed:.12g}")
    raise ValueError(f"unknown expectation {key!r}")


def _shared_k(pg: PerturbedGenerator):
    """k operators sitting next to a non-zero base operator."""
    return [k for h, k in zip(pg.base_ops, pg.k_ops) if np.any(h)]


def _new_k(pg: PerturbedGenerator):
    ks = [k for h, k in zip(pg.base_ops, pg.k_ops) if not np.any(h) and np.any(k)]
    if len(ks) != 1:
        raise ValueError("closed form needs exactly one new transfer operator")
    return ks[0]


def run_fixture(fx: Fixture, tol: Tolerance = DEFAULT_TOL, seed: int | None = None) -> FixtureResult:
    from .structure import DEFAULT_SEED

    ctx = _Context(fx, tol, DEFAULT_SEED if seed is None else seed)
    result = FixtureResult(fx.name)
    gens = [fx.generator] if fx.kind == "generator" else [fx.system.base, fx.system.at(0.1)]
    for g in gens:
        v = validate(g, tol)
        result.checks.append(CheckResult("validate", v.ok, 0.0 if v.ok else 1.0, None, ""))
    for key, entry in fx.expected.items():
        try:
            result.checks.append(_check(key, entry, ctx))
        except (LindstructError, ValueError, np.linalg.LinAlgError) as exc:
            result.checks.append(CheckResult(key, False, float("inf"), entry.get("tol"), f"{type(exc).__name__}: {exc}"))
    return result


def run_all(tol: Tolerance = DEFAULT_TOL, seed: int | None = None, names=None) -> CorpusReport:
    names = list_fixtures() if names is None else list(names)
    results = []
    for name in names:
        try:
            fx = load(name)
        except (LindstructError, ValueError) as exc:
            results.append(FixtureResult(name, error=f"{type(exc).__name__}: {exc}"))
            continue
        results.append(run_fixture(fx, tol, seed))
    return CorpusReport(results)
