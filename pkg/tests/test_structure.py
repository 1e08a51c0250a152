import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lindstruct.corpus import load
from lindstruct.dynamics import evolve, evolve_observable
from lindstruct.errors import NotUnitaryError
from lindstruct.generator import LindbladGenerator
from lindstruct.linop import dag, range_basis
from lindstruct.randgen import random_density, random_generator, random_structured_generator
from lindstruct.structure import (
    analyze,
    cascade,
    certify_decay,
    commutant,
    detect_max_symmetry,
    find_intertwiners,
    is_collecting,
    is_enclosure,
    is_lazy,
    minimal_conserved_projectors,
    verify_symmetry,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def quiet_analyze(g, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return analyze(g, **kw)


@pytest.mark.parametrize("name,dim", [("dissipation", 1), ("dephasing-enclosures", 2),
                                      ("stationary-phase", 4), ("decay-two-basins", 1)])
def test_commutant_dimension(name, dim):
    assert commutant(load(name).generator).dim == dim


def test_commutant_elements_commute(rng):
    g = random_structured_generator(rng, 5, n_enclosures=2, rotate=True)
    for x in commutant(g).elements:
        for a in (g.hamiltonian, *g.transfer_ops):
            assert np.linalg.norm(a @ x - x @ a) <= 1e-9


@settings(max_examples=25, deadline=None)
@given(seeds, st.sampled_from([3, 4, 6]))
def test_enclosures_split_the_evolution(seed, d):
    rng = np.random.default_rng(seed)
    g = random_structured_generator(rng, d, rotate=True)
    projs = minimal_conserved_projectors(commutant(g))
    assert np.allclose(sum(projs), np.eye(d), atol=1e-9)
    rho = random_density(rng, d)
    out = evolve(g, rho, 0.7)
    for q in projs:
        assert np.linalg.norm(g.superoperator.adjoint().apply(q)) <= 1e-10
        for r in projs:
            blk = evolve(g, q @ rho @ r, 0.7)
            assert np.linalg.norm(blk - q @ out @ r, 2) <= 1e-8


def test_lazy_and_collecting(e):
    g = load("cascade").generator
    assert is_collecting(g, e(1, 1, 4)).passed
    assert not is_lazy(g, e(2, 2, 4)).passed
    # lazy without transfer operators, but the Hamiltonian leaks
    h = LindbladGenerator(e(1, 2, 2) + e(2, 1, 2), ())
    assert is_lazy(h, e(1, 1, 2)).passed
    assert not is_collecting(h, e(1, 1, 2)).passed
    assert is_enclosure(load("dephasing-enclosures").generator, np.diag([1, 1, 0, 0])).passed


def test_cascade_levels(e):
    levels, p0, _ = cascade(load("cascade").generator)
    assert [[b.rank for b in lev] for lev in levels] == [[1], [1, 1], [1]]
    assert np.allclose(p0, e(1, 1, 4))
    g = load("cascade").generator
    gap = 1.0
    for lev in levels[1:]:
        for b in lev:
            assert certify_decay(g, b, p0, gap) <= 1e-6


@settings(max_examples=15, deadline=None)
@given(seeds, st.sampled_from([2, 3, 4, 6]), st.booleans())
def test_basin_ranks_do_not_depend_on_seed(seed, d, structured):
    rng = np.random.default_rng(seed)
    g = random_structured_generator(rng, d) if structured else random_generator(rng, d)
    ranks = {tuple(quiet_analyze(g, seed=s).basin_ranks) for s in (1, 2, 3)}
    assert len(ranks) == 1


@settings(max_examples=20, deadline=None)
@given(seeds, st.sampled_from([3, 4, 6]))
def test_basin_states_and_confinement(seed, d):
    rng = np.random.default_rng(seed)
    g = random_structured_generator(rng, d)
    rep = quiet_analyze(g)
    for b, rho in zip(rep.levels[0], rep.stationary.basis_states):
        # full rank inside the basin
        inner = dag(b.basis) @ rho @ b.basis
        assert np.min(np.linalg.eigvalsh(inner)) >= 1e-8
        # support of a stationary state is collecting or an enclosure
        p = b.basis @ dag(b.basis)
        assert is_collecting(g, p).passed or is_enclosure(g, p).passed
        # nothing comes in: P T^t+(F) P depends only on P F P
        f = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        for t in (0.5, 5.0):
            lhs = p @ evolve_observable(g, f, t) @ p
            rhs = p @ evolve_observable(g, p @ f @ p, t) @ p
            assert np.linalg.norm(lhs - rhs, 2) <= 1e-8
    assert rep.invariant_count_matches


def test_intertwiners_and_dephasing_classes():
    und = quiet_analyze(load("undamped-oscillation").generator)
    assert len(und.intertwiners) == 1
    it = und.intertwiners[0]
    assert abs(abs(it.energy_shift) - 1) < 1e-9 and it.defect < 1e-9
    assert abs(abs(it.eigenvalue.imag) - 1) < 1e-8
    [cls] = und.dephasing_classes
    assert cls.multiplicity == 2 and cls.inner_dim == 2
    w = cls.tensor_basis()
    assert np.allclose(dag(w) @ w, np.eye(4), atol=1e-10)

    st_ = quiet_analyze(load("stationary-phase").generator)
    assert [abs(i.energy_shift) < 1e-9 for i in st_.intertwiners] == [True]
    deph = quiet_analyze(load("dephasing-enclosures").generator)
    assert deph.intertwiners == [] and len(deph.dephasing_classes) == 2


def test_block_states_are_stationary_up_to_rotation():
    g = load("stationary-phase").generator
    [cls] = quiet_analyze(g).dephasing_classes
    for m in range(2):
        for n in range(2):
            assert np.linalg.norm(g.superoperator.apply(cls.block_state(m, n))) <= 1e-10


def test_find_intertwiners_accepts_projectors():
    g = load("stationary-phase").generator
    its = find_intertwiners(g, [np.diag([1, 1, 0, 0]), np.diag([0, 0, 1, 1])])
    assert len(its) == 1


def test_symmetries_of_dissipation(dissipation):
    phi = 0.3
    rot = np.diag([1, np.exp(1j * phi)])
    assert verify_symmetry(dissipation, rot).dynamical
    sx = np.array([[0, 1], [1, 0]])
    assert verify_symmetry(dissipation, sx).dynamical
    assert verify_symmetry(dissipation, np.eye(2), antiunitary=True).dynamical
    with pytest.raises(NotUnitaryError):
        verify_symmetry(dissipation, 2 * np.eye(2))


def test_symmetry_of_stationarity_only():
    g = load("decay-two-basins").generator
    swap = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]])
    cert = verify_symmetry(g, swap)
    assert cert.stationarity and not cert.dynamical


def test_max_symmetry_detection(dissipation):
    assert not detect_max_symmetry(dissipation).is_maximal
    for d in (2, 3, 4):
        ops = [np.outer(np.eye(d)[i], np.eye(d)[j]) for i in range(d) for j in range(d)]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            ms = detect_max_symmetry(LindbladGenerator(np.zeros((d, d)), tuple(ops)))
        assert ms.is_maximal and ms.rate == pytest.approx(d)


def test_analyze_report_fields():
    rep = quiet_analyze(load("cascade").generator)
    assert rep.basin_ranks == [1, 1, 1, 1]
    assert len(rep.collecting_basins) == 1
    assert all(v <= 1e-6 for v in rep.defects.values())
    b = range_basis(rep.p0)
    assert b.shape[1] == 1
