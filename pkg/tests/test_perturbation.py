import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lindstruct.corpus import load
from lindstruct.errors import DegenerateBaseError, DegenerateBeyondOrderError, DimensionError, NotInRangeError
from lindstruct.generator import LindbladGenerator
from lindstruct.linop import dag
from lindstruct.perturbation import (
    PerturbedGenerator,
    brute_force_state,
    build_E,
    build_F,
    constrained_inverse,
    expand,
    expand_degenerate,
    expand_unique,
    merge_alpha,
    perturbation_from_json,
    perturbation_to_json,
    perturbed_superoperator,
    series_to_json,
    structure_continuity_probe,
)
from lindstruct.randgen import random_generator, random_hermitian
from lindstruct.spectral import decompose, stationary_states

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def direct_action(h, ops, x):
    out = -1j * (h @ x - x @ h)
    for a in ops:
        out += a @ x @ dag(a) - 0.5 * (dag(a) @ a @ x + x @ dag(a) @ a)
    return out


def random_perturbation(rng, d, scale=0.3):
    base = random_generator(rng, d)
    v = scale * random_hermitian(rng, d)
    w = scale * random_hermitian(rng, d)
    ks = [scale * (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) for _ in range(len(base.transfer_ops) + 1)]
    return PerturbedGenerator(base, v, w, tuple(ks))


@pytest.mark.parametrize("lam", [0.1, 1.0])
def test_expansion_of_generator_is_exact(rng, lam):
    pg = random_perturbation(rng, 3, scale=1.0)
    s = perturbed_superoperator(pg, lam)
    h = pg.base.hamiltonian + lam * pg.v + lam**2 * pg.w
    ops = [a + lam * k for a, k in zip(pg.base_ops, pg.k_ops)]
    for i in range(3):
        for j in range(3):
            x = np.zeros((3, 3), dtype=complex)
            x[i, j] = 1
            assert np.linalg.norm(s.apply(x) - direct_action(h, ops, x)) <= 1e-12


def test_first_and_second_order_parts(rng):
    pg = random_perturbation(rng, 2, scale=1.0)
    x = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    # central differences recover E and F from the exact generator
    eps = 1e-3
    plus = pg.at(eps).superoperator.apply(x)
    minus = pg.at(-eps).superoperator.apply(x)
    zero = pg.base.superoperator.apply(x)
    assert np.linalg.norm((plus - minus) / (2 * eps) - build_E(pg).apply(x)) <= 1e-9
    assert np.linalg.norm((plus + minus - 2 * zero) / (2 * eps**2) - build_F(pg).apply(x)) <= 1e-6


def test_perturbed_generator_checks_inputs(dissipation):
    with pytest.raises(ValueError):
        PerturbedGenerator(dissipation, v=np.array([[0, 1], [0, 0]]))
    with pytest.raises(DimensionError):
        PerturbedGenerator(dissipation, k_ops=(np.eye(3),))
    pg = PerturbedGenerator(dissipation, k_ops=(np.eye(2),) * 3)
    assert len(pg.base_ops) == 3 and np.all(pg.base_ops[2] == 0)
    assert pg.v.flags.writeable is False


@pytest.mark.parametrize("n", [2, 3])
def test_residual_order(n):
    pg = random_perturbation(np.random.default_rng(n), 3)
    series = expand_unique(pg, order=n)
    lams = np.geomspace(1e-3, 1e-1, 7)
    res = [series.residual(x) for x in lams]
    slope = np.polyfit(np.log(lams), np.log(res), 1)[0]
    assert slope >= n + 0.5


@settings(max_examples=20, deadline=None)
@given(seeds, st.sampled_from([2, 3, 4]))
def test_series_matches_brute_force(seed, d):
    pg = random_perturbation(np.random.default_rng(seed), d)
    series = expand_unique(pg, order=8)
    for s in series.sigmas:
        assert np.linalg.norm(s - dag(s)) <= 1e-9
    for s in series.sigmas[1:]:
        assert abs(np.trace(s)) <= 1e-10
    exact = brute_force_state(pg.at(0.05))
    assert np.linalg.norm(series.partial_sum(0.05) - exact, 2) <= 1e-6


def test_unique_closed_form():
    fx = load("perturb-unique")
    series = expand(fx.system, order=20)
    sx = np.array([[0, 1], [1, 0]])
    for n in range(10):
        expect = sx / 2 * (-2.0) ** (-(n // 2)) if n % 2 else None
        if expect is not None:
            assert np.linalg.norm(series.sigmas[n] - expect) <= 1e-12
    assert series.radius_estimate() == pytest.approx(math.sqrt(2), rel=1e-9)
    assert series.diverges_at(1.5) and not series.diverges_at(0.5)


def test_constrained_inverse(e):
    fx = load("perturb-unique")
    g = fx.system.base
    ss = stationary_states(decompose(g))
    inv = constrained_inverse(g.superoperator, ss)
    tau = np.array([[0, -0.5], [-0.5, 0]], dtype=complex)
    x = inv(tau)
    assert np.linalg.norm(g.superoperator.apply(x) - tau) <= 1e-12
    assert np.all(np.abs(inv.overlaps(x)) <= 1e-12)
    with pytest.raises(NotInRangeError):
        inv(ss.basis_states[0])


def test_merge_weight_and_series():
    fx = load("merge-enclosures")
    pg = fx.system
    series = expand_degenerate(pg, order=4)
    d = pg.dim
    q1 = np.diag([1, 1, 0, 0]).astype(complex)
    q2 = np.eye(d) - q1
    a0 = np.trace(q1 @ series.sigmas[0]).real
    assert 0 < a0 <= 1
    rho1 = q1 @ series.sigmas[0] @ q1 / a0
    rho2 = q2 @ series.sigmas[0] @ q2 / (1 - a0)
    k = pg.k_ops[-1]
    assert a0 == pytest.approx(merge_alpha(q1, q2, rho1, rho2, k), abs=1e-9)
    assert a0 == pytest.approx(8 / 9, abs=1e-9)
    exact = brute_force_state(pg.at(0.05))
    assert np.linalg.norm(series.partial_sum(0.05) - exact, 2) <= 1e-8


def test_expand_rejects_wrong_route():
    fx = load("merge-enclosures")
    with pytest.raises(DegenerateBaseError):
        expand_unique(fx.system)
    with pytest.raises(ValueError):
        expand_unique(load("perturb-unique").system, order=-1)


def test_uncoupled_enclosures_never_resolve():
    base = load("dephasing-enclosures").generator
    pg = PerturbedGenerator(base)
    with pytest.raises(DegenerateBeyondOrderError):
        expand_degenerate(pg, order=2, max_lookahead=3)


def test_degenerate_route_agrees_with_unique_route():
    pg = load("perturb-unique").system
    a = expand_unique(pg, order=6)
    b = expand_degenerate(pg, order=6)
    for x, y in zip(a.sigmas, b.sigmas):
        assert np.linalg.norm(x - y) <= 1e-10


def test_continuity_probe(e):
    base = load("decay-two-basins").generator
    pg = PerturbedGenerator(base, k_ops=(np.zeros((3, 3)),) * len(base.transfer_ops) + (e(1, 2, 3), -e(1, 2, 3)))
    rep = structure_continuity_probe(pg, [0.1])
    assert rep.violations == []
    assert rep.trajectory("kernel_dim") == [2, 1]

    cas = load("cascade").generator
    n = len(cas.transfer_ops)
    pg = PerturbedGenerator(cas, k_ops=(np.zeros((4, 4)),) * n + (e(3, 1, 4), -e(3, 1, 4)))
    rep = structure_continuity_probe(pg, [0.1])
    assert rep.violations == []
    assert len(rep.merges[0.1]) == 1


def test_json_round_trip():
    pg = load("merge-enclosures").system
    again = perturbation_from_json(json.loads(json.dumps(perturbation_to_json(pg))))
    assert np.allclose(perturbed_superoperator(again, 0.3).matrix, perturbed_superoperator(pg, 0.3).matrix)
    obj = json.loads(json.dumps(series_to_json(expand(pg, order=3))))
    assert obj["order"] == 3 and len(obj["sigmas"]) == 4
    with pytest.raises(ValueError):
        perturbation_from_json({"v": None})


def test_no_coupling_gives_constant_series(dissipation):
    pg = PerturbedGenerator(dissipation)
    series = expand(pg, order=3)
    assert all(np.linalg.norm(s) == 0 for s in series.sigmas[1:])
    assert math.isinf(series.radius_estimate())
    assert isinstance(pg.at(0.5), LindbladGenerator)


def test_zero_perturbation_keeps_the_structure():
    pg = PerturbedGenerator(load("cascade").generator)
    rep = structure_continuity_probe(pg, [0.1, 1.0])
    assert rep.violations == [] and all(m == [] for m in rep.merges.values())
    for attr in ("kernel_dim", "peripheral_dim", "commutant_dim", "level_ranks"):
        assert len({str(x) for x in rep.trajectory(attr)}) == 1
    with pytest.raises(ValueError):
        structure_continuity_probe(pg, [float("inf")])
