"""Shared fixtures: canonical small expectations and random inclusions."""

import numpy as np
import pytest

from qindex.algebra import (MultiMatrixAlgebra, StarHomomorphism, TraceWeights,
                            identity_homomorphism)
from qindex.expectation import canonical_expectation


def random_unitary(n, rng):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def ad_homomorphism(u, algebra, block=0):
    """Ad(u) on a single-block algebra (u unitary on that block)."""
    cols = []
    for e in algebra.basis():
        mats = [np.array(m) for m in e.data]
        mats[block] = u @ mats[block] @ u.conj().T
        cols.append(algebra.element(mats).to_vector())
    return StarHomomorphism(algebra, algebra, np.stack(cols, axis=1))


def diagonal_inclusion(n=2):
    """diag_n inside M_n."""
    sub = MultiMatrixAlgebra((1,) * n)
    big = MultiMatrixAlgebra((n,))
    cols = []
    for i in range(n):
        m = np.zeros((n, n))
        m[i, i] = 1.0
        cols.append(big.element([m]).to_vector())
    return StarHomomorphism(sub, big, np.stack(cols, axis=1))


def scalars_inclusion(n=2):
    """C inside M_n."""
    sub = MultiMatrixAlgebra((1,))
    big = MultiMatrixAlgebra((n,))
    return StarHomomorphism(sub, big, big.identity().to_vector().reshape(-1, 1))


def pinching_expectation(n=2):
    big = MultiMatrixAlgebra((n,))
    tau = TraceWeights(big, (1.0 / n,))
    return canonical_expectation(diagonal_inclusion(n), tau), tau


def trace_expectation(n=2):
    big = MultiMatrixAlgebra((n,))
    tau = TraceWeights(big, (1.0 / n,))
    return canonical_expectation(scalars_inclusion(n), tau), tau


def identity_expectation(n=2):
    big = MultiMatrixAlgebra((n,))
    tau = TraceWeights(big, (1.0 / n,))
    return canonical_expectation(identity_homomorphism(big), tau), tau


def inclusion_from_multiplicities(a_blocks, k, rng):
    """Unital inclusion determined by an inclusion matrix k[t, p].

    B block t carries k[t, p] copies of A block p, conjugated by a random
    unitary; every row and column of k must be nonzero so the embedding is
    unital and injective.
    """
    sub = MultiMatrixAlgebra(tuple(a_blocks))
    b_blocks = tuple(int(sum(k[t, p] * a_blocks[p] for p in range(len(a_blocks))))
                     for t in range(k.shape[0]))
    big = MultiMatrixAlgebra(b_blocks)
    unitaries = [random_unitary(m, rng) for m in b_blocks]
    cols = []
    for e in sub.basis():
        mats = []
        for t, m in enumerate(b_blocks):
            block = np.zeros((m, m), dtype=complex)
            ofs = 0
            for p, a_size in enumerate(a_blocks):
                for _ in range(int(k[t, p])):
                    block[ofs:ofs + a_size, ofs:ofs + a_size] = e.data[p]
                    ofs += a_size
            mats.append(unitaries[t] @ block @ unitaries[t].conj().T)
        cols.append(big.element(mats).to_vector())
    return StarHomomorphism(sub, big, np.stack(cols, axis=1))


def _random_multiplicities(rng, max_a_blocks, max_a_size, max_b_blocks, max_mult):
    while True:
        a_blocks = tuple(int(rng.integers(1, max_a_size + 1))
                         for _ in range(int(rng.integers(1, max_a_blocks + 1))))
        nb = int(rng.integers(1, max_b_blocks + 1))
        k = rng.integers(0, max_mult + 1, size=(nb, len(a_blocks)))
        if all(k[t].sum() > 0 for t in range(nb)) and \
                all(k[:, p].sum() > 0 for p in range(len(a_blocks))):
            return a_blocks, k


def random_multimatrix_inclusion(rng, max_a_blocks=2, max_a_size=2,
                                 max_b_blocks=2, max_mult=2):
    """Random unital inclusion with random positive trace weights."""
    a_blocks, k = _random_multiplicities(rng, max_a_blocks, max_a_size,
                                         max_b_blocks, max_mult)
    inclusion = inclusion_from_multiplicities(a_blocks, k, rng)
    tau = TraceWeights(inclusion.target,
                       tuple(float(rng.uniform(0.2, 2.0))
                             for _ in inclusion.target.blocks))
    return inclusion, tau


def random_connected_inclusion(rng, max_a_blocks=2, max_a_size=2,
                               max_b_blocks=2, max_mult=2):
    """Random inclusion with an irreducible k k^T (connected Bratteli graph).

    Returns (inclusion, k); connectivity makes the Perron-Frobenius data
    of k k^T meaningful.
    """
    while True:
        a_blocks, k = _random_multiplicities(rng, max_a_blocks, max_a_size,
                                             max_b_blocks, max_mult)
        nb = k.shape[0]
        gram = k @ k.T
        power = np.linalg.matrix_power(np.eye(nb, dtype=np.int64) + gram, nb)
        if np.all(power > 0):
            return inclusion_from_multiplicities(a_blocks, k, rng), k


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
