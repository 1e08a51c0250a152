"""Per-generator invariant checks shared by the property and acceptance suites."""
import warnings

import numpy as np

from lindstruct.dynamics import check_rank_bound, evolve, trajectory
from lindstruct.linop import dag
from lindstruct.randgen import random_density, random_generator, random_structured_generator
from lindstruct.spectral import decompose
from lindstruct.structure import analyze, is_collecting, is_enclosure

DIMS = (2, 3, 4, 6)


def build(seed, d, structured):
    rng = np.random.default_rng(seed)
    g = random_structured_generator(rng, d) if structured else random_generator(rng, d)
    return g, rng


def population(n=200, base_seed=1000):
    """Deterministic mix: half generic, half with planted basins, dimensions cycled."""
    return [(base_seed + i, DIMS[i % len(DIMS)], i % 2 == 1) for i in range(n)]


def _quiet(fn, *a, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return fn(*a, **kw)


def check_generator(g, rng):
    """Raise AssertionError naming the first broken invariant."""
    d = g.dim
    rho = random_density(rng, d)
    for t in (0.3, 3.0):
        out = evolve(g, rho, t)
        assert abs(np.trace(out) - 1) <= 1e-12, "trace"
        assert np.min(np.linalg.eigvalsh(0.5 * (out + dag(out)))) >= -1e-8, "positivity"

    sd = decompose(g)
    assert np.max(sd.eigenvalues.real) <= 1e-8, "eigenvalue in right half-plane"
    assert sd.defect_of(0.0) == 0, "Jordan block at zero"

    rep = _quiet(analyze, g)
    assert len(rep.stationary.basis_states) >= 1, "no stationary state"
    for rho_k in rep.stationary.basis_states:
        w, v = np.linalg.eigh(0.5 * (rho_k + dag(rho_k)))
        keep = v[:, w > 1e-9 * max(w)]
        p = keep @ dag(keep)
        assert is_collecting(g, p).passed or is_enclosure(g, p).passed, "support neither collecting nor enclosure"

    # the grid must resolve the rate for branch pairing to be meaningful
    rate = sum(np.linalg.norm(h, 2) ** 2 for h in g.transfer_ops)
    span = min(1.0, 3.0 / rate) if rate > 0 else 1.0
    assert check_rank_bound(g, trajectory(g, rho, span, 30)).ok, "rank bound"

    ranks = {tuple(_quiet(analyze, g, seed=s).basin_ranks) for s in (11, 22, 33)}
    assert ranks == {tuple(rep.basin_ranks)}, "basin ranks depend on seed"
