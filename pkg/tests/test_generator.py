import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lindstruct.errors import DimensionError
from lindstruct.generator import (
    LindbladGenerator,
    apply_heisenberg,
    apply_schrodinger,
    choi_matrix,
    generator_from_json,
    generator_to_json,
    has_adjoint_closed_ops,
    is_density_matrix,
    is_self_adjoint,
    restrict,
    validate,
)
from lindstruct.linop import dag, expm
from lindstruct.randgen import random_generator, random_hermitian

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.sampled_from([2, 3, 4, 6])


def oracle_action(H, ops, x):
    """Textbook Lindblad action, written out independently of the package."""
    out = -1j * (H @ x - x @ H)
    for h in ops:
        hh = h.conj().T @ h
        out = out + h @ x @ h.conj().T - 0.5 * (hh @ x + x @ hh)
    return out


@settings(max_examples=100)
@given(seeds, dims)
def test_trace_preservation(seed, d):
    g = random_generator(np.random.default_rng(seed), d)
    assert np.linalg.norm(apply_heisenberg(g, np.eye(d)), 2) <= 1e-12


@settings(max_examples=50)
@given(seeds, dims)
def test_superoperator_matches_oracle_and_preserves_hermiticity(seed, d):
    rng = np.random.default_rng(seed)
    g = random_generator(rng, d)
    x = random_hermitian(rng, d)
    y = g.superoperator.apply(x)
    assert np.allclose(y, oracle_action(g.hamiltonian, g.transfer_ops, x), atol=1e-12)
    assert np.allclose(apply_schrodinger(g, x), y, atol=1e-12)
    assert np.linalg.norm(y - dag(y), 2) <= 1e-12


@settings(max_examples=50)
@given(seeds, dims)
def test_duality(seed, d):
    rng = np.random.default_rng(seed)
    g = random_generator(rng, d)
    f = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    lhs = np.trace(f @ apply_schrodinger(g, x))
    rhs = np.trace(apply_heisenberg(g, f) @ x)
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))


def test_self_adjoint_with_adjoint_closed_ops(dissipation, e):
    assert has_adjoint_closed_ops(dissipation)
    assert is_self_adjoint(dissipation)
    s = 1 / np.sqrt(2)
    cascade = LindbladGenerator(np.zeros((4, 4)), (s * e(1, 2, 4) + e(1, 3, 4) + s * e(3, 4, 4),
                                                   s * e(1, 2, 4) - e(1, 3, 4) + s * e(3, 4, 4)))
    assert not has_adjoint_closed_ops(cascade)
    assert not is_self_adjoint(cascade)


def test_self_adjoint_needs_zero_hamiltonian(e):
    g = LindbladGenerator(np.diag([1.0, 0.0]), (e(1, 2, 2), e(2, 1, 2)))
    assert not is_self_adjoint(g)


def test_choi_of_identity_is_maximally_entangled_projector():
    d = 2
    c = choi_matrix(expm(LindbladGenerator(np.zeros((d, d)), ()).superoperator, 0.0))
    phi = np.eye(d).reshape(-1)
    assert np.allclose(c, np.outer(phi, phi))


def test_validate_accepts_lindblad_form(rng):
    r = validate(random_generator(rng, 3))
    assert r.ok and r.cp_ok and r.choi_min_eigenvalue >= -1e-8
    assert set(r.to_dict()) >= {"ok", "hermiticity_defect", "trace_defect", "choi_min_eigenvalue"}


def test_validate_flags_non_hermitian_hamiltonian():
    g = LindbladGenerator(np.array([[0, 1], [0, 0]]), ())
    r = validate(g)
    assert not r.hermitian_ok and not r.ok


def test_inputs_are_frozen_copies():
    H = np.zeros((2, 2))
    g = LindbladGenerator(H, (np.eye(2),))
    H[0, 0] = 5.0
    assert g.hamiltonian[0, 0] == 0
    with pytest.raises(ValueError):
        g.hamiltonian[0, 0] = 1.0


def test_shape_errors():
    with pytest.raises(DimensionError):
        LindbladGenerator(np.zeros((2, 2)), (np.zeros((3, 3)),))
    with pytest.raises(DimensionError):
        LindbladGenerator(np.zeros((2, 3)), ())


def test_too_many_ops_warns():
    with pytest.warns(UserWarning):
        LindbladGenerator(np.zeros((1, 1)), (np.eye(1), np.eye(1)))


def test_json_roundtrip(rng):
    g = random_generator(rng, 3, 2)
    g2 = generator_from_json(generator_to_json(g))
    assert np.array_equal(g2.superoperator.matrix, g.superoperator.matrix)


def test_json_errors():
    with pytest.raises(ValueError):
        generator_from_json([1, 2])
    with pytest.raises(ValueError):
        generator_from_json({"transfer_ops": []})
    with pytest.raises(DimensionError):
        generator_from_json({"dim": 2, "transfer_ops": [[[1, 0, 0], [0, 1, 0], [0, 0, 1]]]})
    g = generator_from_json({"dim": 2, "transfer_ops": [[[0, 1], [0, 0]]]})
    assert np.array_equal(g.hamiltonian, np.zeros((2, 2)))


def test_restrict_to_enclosure(e):
    g = LindbladGenerator(np.zeros((4, 4)), (e(1, 2, 4) + e(3, 4, 4), e(2, 1, 4) - e(4, 3, 4)))
    r = restrict(g, np.diag([1, 1, 0, 0]))
    assert r.dim == 2
    w = np.sort(np.linalg.eigvals(r.superoperator.matrix).real)
    assert np.allclose(w, [-2, -1, -1, 0])


def test_density_check():
    assert is_density_matrix(np.eye(2) / 2)
    assert not is_density_matrix(np.diag([1.5, -0.5]))
