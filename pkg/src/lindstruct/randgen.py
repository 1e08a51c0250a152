"""Random generators for property tests and benchmarks."""
from __future__ import annotations

import numpy as np

from .generator import LindbladGenerator
from .linop import dag


def random_hermitian(rng: np.random.Generator, d: int, scale: float = 1.0) -> np.ndarray:
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (a + dag(a)) / (2.0 * np.sqrt(d))


def random_complex(rng: np.random.Generator, d: int, scale: float = 1.0, rows: int | None = None) -> np.ndarray:
    rows = d if rows is None else rows
    return scale * (rng.normal(size=(rows, d)) + 1j * rng.normal(size=(rows, d))) / np.sqrt(2.0 * d)


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_generator(rng: np.random.Generator, d: int, n_ops: int | None = None) -> LindbladGenerator:
    """Generic generator: random Hermitian H and ``n_ops`` Gaussian transfer operators."""
    if n_ops is None:
        n_ops = int(rng.integers(1, 4))
    return LindbladGenerator(random_hermitian(rng, d), tuple(random_complex(rng, d) for _ in range(n_ops)))


def random_density(rng: np.random.Generator, d: int, rank: int | None = None) -> np.ndarray:
    rank = d if rank is None else rank
    a = random_complex(rng, d, rows=rank).T
    rho = a @ dag(a)
    return rho / np.trace(rho).real


def random_structured_generator(rng: np.random.Generator, d: int, n_enclosures: int | None = None,
                                n_ops: int | None = None, rotate: bool = True) -> LindbladGenerator:
    """Generator with a known collecting top block that splits into independent enclosures.

    The first ``top`` coordinates are collecting: every transfer operator is
    block upper triangular and the off-diagonal Hamiltonian block cancels the
    outflow term.  The top block is itself a direct sum of ``n_enclosures``
    blocks that do not talk to each other.  A random unitary rotation hides the
    coordinate structure.
    """
    if d < 2:
        return random_generator(rng, d, n_ops)
    top = int(rng.integers(1, d))
    if n_enclosures is None:
        n_enclosures = int(rng.integers(1, min(top, 2) + 1))
    n_enclosures = max(1, min(n_enclosures, top))
    if n_ops is None:
        n_ops = int(rng.integers(1, 4))
    cuts = np.sort(rng.choice(np.arange(1, top), size=n_enclosures - 1, replace=False)) if n_enclosures > 1 else []
    edges = [0, *[int(c) for c in cuts], top]
    bot = d - top

    def block_diag_top(gen):
        m = np.zeros((top, top), dtype=complex)
        for lo, hi in zip(edges[:-1], edges[1:]):
            m[lo:hi, lo:hi] = gen(hi - lo)
        return m

    ops = []
    cross = np.zeros((top, bot), dtype=complex)
    for _ in range(n_ops):
        a = block_diag_top(lambda k: random_complex(rng, k))
        b = random_complex(rng, bot, rows=top)
        c = random_complex(rng, bot)
        h = np.zeros((d, d), dtype=complex)
        h[:top, :top] = a
        h[:top, top:] = b
        h[top:, top:] = c
        ops.append(h)
        cross += dag(a) @ b
    H = np.zeros((d, d), dtype=complex)
    H[:top, :top] = block_diag_top(lambda k: random_hermitian(rng, k))
    H[top:, top:] = random_hermitian(rng, bot)
    H[:top, top:] = -0.5j * cross
    H[top:, :top] = dag(H[:top, top:])
    if rotate:
        w = random_unitary(rng, d)
        H = w @ H @ dag(w)
        ops = [w @ h @ dag(w) for h in ops]
    return LindbladGenerator(H, tuple(ops))
