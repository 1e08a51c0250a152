import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from lindstruct.corpus import load
from lindstruct.dynamics import (
    asymptotic_state,
    check_rank_bound,
    evolve,
    evolve_observable,
    peripheral_projection,
    trajectory,
    trajectory_csv,
    trajectory_to_json,
)
from lindstruct.errors import DimensionError
from lindstruct.linop import dag
from lindstruct.randgen import random_density, random_generator, random_structured_generator
from lindstruct.structure import analyze

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def ode_oracle(g, rho, t):
    """Integrate the master equation directly, without the superoperator."""
    d = g.dim
    h = g.hamiltonian
    ops = g.transfer_ops

    def rhs(_, y):
        r = y.reshape(d, d)
        out = -1j * (h @ r - r @ h)
        for a in ops:
            ad = dag(a)
            out += a @ r @ ad - 0.5 * (ad @ a @ r + r @ ad @ a)
        return out.ravel()

    sol = solve_ivp(rhs, (0, t), rho.astype(complex).ravel(), rtol=1e-11, atol=1e-13, method="DOP853")
    return sol.y[:, -1].reshape(d, d)


def test_evolution_matches_ode(rng):
    for d in (2, 3, 4):
        g = random_generator(rng, d)
        rho = random_density(rng, d)
        assert np.linalg.norm(evolve(g, rho, 1.3) - ode_oracle(g, rho, 1.3)) <= 1e-8


def test_dissipation_closed_form(e):
    g = load("dissipation").generator
    rho = np.array([[0.25, 0.3], [0.3, 0.75]])
    t = 0.8
    out = evolve(g, rho, t)
    assert abs(out[1, 0] - 0.3 * np.exp(-t)) <= 1e-12
    assert abs(np.trace(out) - 1) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(seeds, st.sampled_from([2, 3, 4]), st.floats(0.01, 3.0), st.floats(0.01, 3.0))
def test_semigroup_law_and_positivity(seed, d, s, t):
    rng = np.random.default_rng(seed)
    g = random_generator(rng, d)
    rho = random_density(rng, d)
    once = evolve(g, rho, s + t)
    twice = evolve(g, evolve(g, rho, s), t)
    assert np.linalg.norm(once - twice, 2) <= 1e-9
    assert np.min(np.linalg.eigvalsh(0.5 * (once + dag(once)))) >= -1e-10
    assert abs(np.trace(once) - 1) <= 1e-12


def test_observable_duality(rng):
    g = random_generator(rng, 3)
    rho = random_density(rng, 3)
    f = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    lhs = np.trace(f @ evolve(g, rho, 0.9))
    rhs = np.trace(evolve_observable(g, f, 0.9) @ rho)
    assert abs(lhs - rhs) <= 1e-11


@pytest.mark.parametrize("t", [0.5, 5.0])
def test_collecting_basin_confines(t):
    g = load("cascade").generator
    rep = analyze(g)
    p = rep.collecting_basins[0]
    rng = np.random.default_rng(5)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = p @ a @ dag(a) @ p
    rho /= np.trace(rho).real
    out = evolve(g, rho, t)
    assert np.linalg.norm(out - p @ out @ p, 2) <= 1e-10


def test_decaying_part_empties():
    g = load("decay-two-basins").generator
    rep = analyze(g)
    gap = rep.spectrum.gap()
    q = np.eye(g.dim) - rep.p0
    out = evolve(g, q / np.trace(q).real, 100.0 / gap)
    assert np.linalg.norm(q @ out @ q, 2) <= 1e-6


@settings(max_examples=15, deadline=None)
@given(seeds, st.sampled_from([2, 3, 4]))
def test_rank_bound_holds(seed, d):
    rng = np.random.default_rng(seed)
    g = random_structured_generator(rng, d)
    traj = trajectory(g, random_density(rng, d), 2.0, 20)
    rep = check_rank_bound(g, traj)
    assert rep.ok, rep.violations


def test_rank_bound_detects_doctored_trajectory(dissipation):
    traj = trajectory(dissipation, np.diag([0.5, 0.5]), 1.0, 4)
    traj.states[-1] = np.diag([1.0, 0.0]).astype(complex)
    assert not check_rank_bound(dissipation, traj).ok


def test_trajectory_monitors_block_leakage():
    g = load("dephasing-enclosures").generator
    p1, p2 = np.diag([1, 1, 0, 0]), np.diag([0, 0, 1, 1])
    rho = np.full((4, 4), 0.25, dtype=complex)
    traj = trajectory(g, rho, 3.0, 6, blocks=[p1, p2])
    leak = [m["block_0_1"] for m in traj.monitors]
    assert leak[0] > leak[-1]
    assert all(m["trace_defect"] <= 1e-12 for m in traj.monitors)


def test_peripheral_projection_of_undamped():
    g = load("undamped-oscillation").generator
    lams = [lam for lam, _ in peripheral_projection(g)]
    assert len(lams) == 3
    assert sorted(round(x.imag) for x in lams) == [-1, 0, 1]
    for _, p in peripheral_projection(g):
        assert np.linalg.norm(p @ p - p) <= 1e-8


def test_asymptotic_state_tracks_evolution():
    g = load("undamped-oscillation").generator
    rep = analyze(g)
    rng = np.random.default_rng(7)
    rho = random_density(rng, g.dim)
    form = asymptotic_state(g, rho, rep)
    assert form.decomposition_defect <= 1e-8
    assert form.check_residual <= 1e-6
    assert sum(c.weight for c in form.classes) == pytest.approx(1.0, abs=1e-8)
    t = form.check_time + 2.1
    assert np.linalg.norm(evolve(g, rho, t) - form.at(t), 2) <= 1e-6


def test_csv_and_json(dissipation):
    traj = trajectory(dissipation, np.diag([0.0, 1.0]), 1.0, 3)
    text = trajectory_csv(traj)
    lines = text.strip().split("\n")
    assert len(lines) == 5
    header = lines[0].split(",")
    assert header[0] == "t" and "min_eigenvalue" in header
    last = dict(zip(header, lines[-1].split(",")))
    assert float(last["re_1_1"]) == pytest.approx(0.5 + 0.5 * np.exp(-2.0), abs=1e-12)
    obj = json.loads(json.dumps(trajectory_to_json(traj)))
    assert obj["times"] == [0.0, 1 / 3, 2 / 3, 1.0]
    assert len(obj["states"]) == 4


def test_invalid_inputs(dissipation):
    with pytest.raises(ValueError):
        evolve(dissipation, np.eye(2) / 2, -1.0)
    with pytest.raises(ValueError):
        evolve(dissipation, np.eye(2) / 2, float("nan"))
    with pytest.raises(ValueError):
        trajectory(dissipation, np.eye(2) / 2, 1.0, 0)
    with pytest.raises(ValueError):
        trajectory(dissipation, np.eye(2) / 2, 0.0, 3)
    with pytest.raises(DimensionError):
        evolve(dissipation, np.eye(3) / 3, 1.0)
