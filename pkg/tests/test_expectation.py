import math

import numpy as np
import pytest

from qindex.algebra import (MultiMatrixAlgebra, StarHomomorphism, TraceWeights,
                            choi_blocks, group_algebra_inclusion,
                            identity_homomorphism)
from qindex.expectation import (ConditionalExpectation, QuasiBasis,
                                canonical_expectation, compute_index_report,
                                equivariantize, find_quasi_basis,
                                probabilistic_index_bounds, quasi_basis_report,
                                qsystem_comultiplication_check,
                                restrict_to_intermediate, scalar_index,
                                validate_expectation, watatani_index)

from conftest import (ad_homomorphism, diagonal_inclusion, identity_expectation,
                      pinching_expectation, random_connected_inclusion,
                      random_multimatrix_inclusion, random_unitary,
                      scalars_inclusion, trace_expectation)


def state_expectation(n, rho):
    """E(x) = tr(rho x) 1 onto the scalars of M_n."""
    big = MultiMatrixAlgebra((n,))
    one_vec = big.identity().to_vector()
    row = np.array([np.trace(rho @ e.data[0]) for e in big.basis()])
    return ConditionalExpectation(scalars_inclusion(n), np.outer(one_vec, row))


def scalar_index_bisect(expectation, hi_cap=1e7):
    """Independent oracle: bisection on c with a Choi PSD test of cE - id."""
    big = expectation.algebra

    def is_cp(c):
        def phi(x):
            return big.embed_block_diagonal(c * expectation(x) - x)
        return all(np.linalg.eigvalsh(blk)[0] >= -1e-11
                   for blk in choi_blocks(phi, big))

    lo, hi = 1.0, 2.0
    while not is_cp(hi):
        hi *= 2.0
        if hi > hi_cap:
            return math.inf
    for _ in range(60):
        mid = (lo + hi) / 2
        if is_cp(mid):
            hi = mid
        else:
            lo = mid
    return hi


# -- validation --------------------------------------------------------------

def test_validate_identity_expectation():
    expectation, _ = identity_expectation(2)
    assert validate_expectation(expectation).ok


def test_validate_pinching():
    expectation, _ = pinching_expectation(2)
    report = validate_expectation(expectation)
    assert report.ok and report.failures == ()


def test_validate_rejects_corner_compression():
    # x -> e_11 x e_11 fails unitality
    big = MultiMatrixAlgebra((2,))
    p = big.matrix_unit(0, 0, 0)
    cols = [(p * x * p).to_vector() for x in big.basis()]
    bad = ConditionalExpectation(identity_homomorphism(big),
                                 np.stack(cols, axis=1))
    report = validate_expectation(bad)
    assert not report.ok
    assert "unitality" in report.failures


def test_validate_rejects_non_idempotent():
    big = MultiMatrixAlgebra((2,))
    half = 0.5 * np.eye(4) + 0.5 * np.eye(4)[::-1]
    bad = ConditionalExpectation(identity_homomorphism(big), half)
    report = validate_expectation(bad)
    assert not report.ok


# -- canonical construction ---------------------------------------------------

def test_canonical_trace_onto_scalars():
    expectation, _ = trace_expectation(2)
    big = expectation.algebra
    for e in big.basis():
        want = np.trace(e.data[0]) / 2.0 * np.eye(2)
        assert np.allclose(expectation(e).data[0], want, atol=1e-12)


def test_canonical_pinching_kills_offdiagonal():
    expectation, _ = pinching_expectation(2)
    x = expectation.algebra.element([np.array([[1.0, 5.0], [7.0, 2.0]])])
    assert np.allclose(expectation(x).data[0], np.diag([1.0, 2.0]), atol=1e-12)


def test_canonical_identity_when_a_equals_b():
    expectation, _ = identity_expectation(3)
    assert np.allclose(expectation.matrix, np.eye(9), atol=1e-12)


# -- quasi-basis -------------------------------------------------------------

def test_quasi_basis_identity_after_pruning():
    expectation, tau = identity_expectation(3)
    result = quasi_basis_report(expectation, tau)
    assert result.basis is not None
    assert len(result.basis) == 1
    assert (result.basis.elements[0] - expectation.algebra.identity()).norm() <= 1e-9


def test_quasi_basis_pinching_and_hand_checked_family():
    expectation, tau = pinching_expectation(2)
    result = quasi_basis_report(expectation, tau)
    assert result.basis is not None
    assert result.basis.defect(expectation) <= 1e-9
    # a 2-element quasi-basis exists: {1, e_12 + e_21} reproduces
    # diag(x) + offdiag(x) = x
    big = expectation.algebra
    family = QuasiBasis((big.identity(),
                         big.matrix_unit(0, 0, 1) + big.matrix_unit(0, 1, 0)))
    assert family.defect(expectation) <= 1e-12


def test_quasi_basis_trace_case():
    expectation, tau = trace_expectation(2)
    result = quasi_basis_report(expectation, tau)
    assert result.basis is not None
    assert len(result.basis) == 4
    # hand-checked family sqrt(2) e_ij: sum 2 e_ij tr(e_ji x)/2 = x
    big = expectation.algebra
    family = QuasiBasis(tuple(np.sqrt(2.0) * big.matrix_unit(0, i, j)
                              for i in range(2) for j in range(2)))
    assert family.defect(expectation) <= 1e-12


def test_quasi_basis_none_for_non_faithful():
    rho = np.diag([1.0, 0.0])
    expectation = state_expectation(2, rho)
    assert validate_expectation(expectation).ok
    tau = TraceWeights(expectation.algebra, (0.5,))
    result = quasi_basis_report(expectation, tau)
    assert result.basis is None
    assert result.min_eigenvalue < 1e-10


def test_quasi_basis_custom_spanning_sets_agree(rng):
    expectation, tau = pinching_expectation(2)
    big = expectation.algebra
    indices = []
    for _ in range(2):
        spanning = [big.random_element(rng) for _ in range(big.total_dim + 2)]
        basis = find_quasi_basis(expectation, tau, spanning=spanning)
        assert basis is not None
        indices.append(watatani_index(expectation, basis))
    assert (indices[0] - indices[1]).norm() <= 1e-8


# -- index element -----------------------------------------------------------

def test_watatani_index_values():
    expectation, tau = identity_expectation(2)
    idx = watatani_index(expectation, find_quasi_basis(expectation, tau))
    assert (idx - expectation.algebra.identity()).norm() <= 1e-9

    expectation, tau = pinching_expectation(2)
    idx = watatani_index(expectation, find_quasi_basis(expectation, tau))
    assert (idx - 2.0 * expectation.algebra.identity()).norm() <= 1e-9

    expectation, tau = trace_expectation(2)
    idx = watatani_index(expectation, find_quasi_basis(expectation, tau))
    assert (idx - 4.0 * expectation.algebra.identity()).norm() <= 1e-9


def test_watatani_warns_on_invalid_family():
    expectation, tau = pinching_expectation(2)
    big = expectation.algebra
    bogus = QuasiBasis((big.identity(), big.matrix_unit(0, 0, 1)))
    with pytest.warns(UserWarning):
        watatani_index(expectation, bogus)


# -- scalar index ------------------------------------------------------------

def test_scalar_index_examples():
    expectation, _ = pinching_expectation(2)
    assert abs(scalar_index(expectation) - 2.0) <= 1e-10
    expectation, _ = trace_expectation(2)
    assert abs(scalar_index(expectation) - 4.0) <= 1e-10
    expectation, _ = identity_expectation(2)
    assert abs(scalar_index(expectation) - 1.0) <= 1e-12


def test_scalar_index_against_bisection_oracle(rng):
    for _ in range(6):
        inclusion, tau = random_multimatrix_inclusion(rng)
        expectation = canonical_expectation(inclusion, tau)
        assert abs(scalar_index(expectation) - scalar_index_bisect(expectation)) <= 1e-7


def test_scalar_index_infinite_for_rank_deficient():
    expectation = state_expectation(2, np.diag([1.0, 0.0]))
    assert math.isinf(scalar_index(expectation))


# -- probabilistic index -----------------------------------------------------

def test_probabilistic_bounds_pinching():
    expectation, _ = pinching_expectation(2)
    lower, upper = probabilistic_index_bounds(expectation, budget=400)
    # oracle: v = (1,1)/sqrt(2) gives E(vv*) = diag(1/2, 1/2) and value 2
    v = np.array([1.0, 1.0]) / np.sqrt(2.0)
    image = expectation(expectation.algebra.element([np.outer(v, v)])).data[0]
    oracle = float(np.real(v @ np.linalg.pinv(image) @ v))
    assert abs(oracle - 2.0) <= 1e-12
    assert abs(lower - 2.0) <= 1e-9
    assert abs(upper - 2.0) <= 1e-9


def test_probabilistic_bounds_trace_gap():
    for n in (2, 3):
        expectation, _ = trace_expectation(n)
        lower, upper = probabilistic_index_bounds(expectation, budget=400)
        assert abs(lower - n) <= 1e-9
        assert abs(upper - n * n) <= 1e-9


def test_probabilistic_bounds_identity():
    expectation, _ = identity_expectation(2)
    assert probabilistic_index_bounds(expectation, budget=100) == (1.0, 1.0)


def test_fk00_shadow_infinite_both_ways():
    expectation = state_expectation(2, np.diag([1.0, 0.0]))
    lower, upper = probabilistic_index_bounds(expectation, budget=100)
    assert math.isinf(lower) and math.isinf(upper)
    assert math.isinf(scalar_index(expectation))


def test_probabilistic_ascent_climbs_rotated_state(rng):
    # E(x) = tr(rho x) 1 with rotated non-uniform rho: the objective
    # 1/(v* rho v) peaks at the smallest eigenvector, away from every
    # deterministic start, so the gradient ascent has to move
    for _ in range(3):
        u = random_unitary(3, rng)
        evals = np.sort(rng.uniform(0.1, 1.0, size=3))
        rho = u @ np.diag(evals) @ u.conj().T
        rho = rho / np.trace(rho)
        lam = np.linalg.eigvalsh(rho)
        expectation = state_expectation(3, rho)
        lower, upper = probabilistic_index_bounds(expectation, budget=2000)
        assert abs(lower - 1.0 / lam[0]) <= 1e-6 * (1.0 / lam[0])
        # analytic scalar index of a state expectation: sum of 1/lambda_i
        assert abs(upper - np.sum(1.0 / lam)) <= 1e-8 * np.sum(1.0 / lam)
        assert abs(scalar_index(expectation) - np.sum(1.0 / lam)) <= 1e-8


# -- ordering chain and randomized invariants --------------------------------

def test_index_report_ordering_chain(rng):
    for _ in range(5):
        inclusion, tau = random_multimatrix_inclusion(rng)
        expectation = canonical_expectation(inclusion, tau)
        report = compute_index_report(expectation, tau, budget=300)
        assert report.prob_lower <= report.prob_upper + 1e-9
        assert report.prob_upper <= report.scalar_index + 1e-9
        assert report.scalar_index <= report.index_norm + 1e-7
        assert abs(report.scalar_index - report.index_norm) <= 1e-7


def test_index_element_location_report():
    # scalar index element lies in the image of A; a two-block index
    # element with distinct block scalars does not
    from qindex.expectation import index_in_subalgebra
    expectation, tau = pinching_expectation(2)
    report = compute_index_report(expectation, tau, budget=100)
    assert report.index_in_subalgebra is True

    big = MultiMatrixAlgebra((1, 1))
    sub = MultiMatrixAlgebra((1,))
    incl = StarHomomorphism(sub, big, np.array([[1.0], [1.0]]))
    expectation2 = canonical_expectation(incl, TraceWeights(big, (0.5, 0.5)))
    skew = big.element([np.array([[1.0]]), np.array([[2.0]])])
    assert not index_in_subalgebra(expectation2, skew)
    assert index_in_subalgebra(expectation2, big.identity())


def test_tower_multiplicativity():
    # C in diag in M_2: canonical indices multiply, 2 x 2 = 4
    big = MultiMatrixAlgebra((2,))
    tau = TraceWeights(big, (0.5,))
    e_diag = canonical_expectation(diagonal_inclusion(2), tau)
    diag_alg = e_diag.subalgebra
    tau_diag = TraceWeights(diag_alg, (0.5, 0.5))
    scalars_in_diag = StarHomomorphism(
        MultiMatrixAlgebra((1,)), diag_alg,
        diag_alg.identity().to_vector().reshape(-1, 1))
    e_scalars = canonical_expectation(scalars_in_diag, tau_diag)
    e_comp = canonical_expectation(scalars_inclusion(2), tau)

    n1 = watatani_index(e_diag, find_quasi_basis(e_diag, tau)).norm()
    n2 = watatani_index(e_scalars, find_quasi_basis(e_scalars, tau_diag)).norm()
    n3 = watatani_index(e_comp, find_quasi_basis(e_comp, tau)).norm()
    assert abs(n1 * n2 - n3) <= 1e-9
    assert abs(n3 - 4.0) <= 1e-9


def test_group_algebra_integer_index():
    for n in range(1, 13):
        for d in range(1, n + 1):
            if n % d:
                continue
            inclusion, tau = group_algebra_inclusion(n, d)
            expectation = canonical_expectation(inclusion, tau)
            norm = watatani_index(
                expectation, find_quasi_basis(expectation, tau)).norm()
            assert abs(norm - round(norm)) <= 1e-9
            assert abs(norm - n / d) <= 1e-9


def test_perron_frobenius_trace_gives_scalar_index(rng):
    # oracle from classical multimatrix index theory: weighting B by the
    # Perron-Frobenius eigenvector of k k^T makes the index element the
    # scalar lambda_max(k k^T) 1, computable from the integer inclusion
    # matrix alone
    for _ in range(10):
        inclusion, k = random_connected_inclusion(rng)
        gram = (k @ k.T).astype(float)
        evals, evecs = np.linalg.eigh(gram)
        beta = float(evals[-1])
        weights = np.abs(evecs[:, -1])
        weights = weights / np.dot(weights, inclusion.target.blocks)
        tau = TraceWeights(inclusion.target, tuple(map(float, weights)))
        expectation = canonical_expectation(inclusion, tau)
        index = watatani_index(expectation, find_quasi_basis(expectation, tau))
        assert (index - beta * inclusion.target.identity()).norm() <= 1e-8
        assert abs(scalar_index(expectation) - beta) <= 1e-8


# -- equivariantization ------------------------------------------------------

def test_equivariantize_trivial_group():
    expectation, _ = pinching_expectation(2)
    big = expectation.algebra
    averaged = equivariantize(expectation, [identity_homomorphism(big)])
    assert np.allclose(averaged.matrix, expectation.matrix, atol=1e-12)


def test_equivariantize_swap_recovers_trace():
    big = MultiMatrixAlgebra((2,))
    expectation = state_expectation(2, np.diag([1.0, 0.0]))
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])
    action = [identity_homomorphism(big), ad_homomorphism(swap, big)]
    averaged = equivariantize(expectation, action)
    want = state_expectation(2, np.eye(2) / 2.0)
    assert np.allclose(averaged.matrix, want.matrix, atol=1e-12)
    assert validate_expectation(averaged).ok


def test_equivariantize_fixes_equivariant_input():
    expectation, _ = pinching_expectation(2)
    big = expectation.algebra
    gz = ad_homomorphism(np.diag([1.0, -1.0]), big)
    averaged = equivariantize(expectation, [identity_homomorphism(big), gz])
    assert np.allclose(averaged.matrix, expectation.matrix, atol=1e-12)


def test_equivariantize_rejects_bad_action():
    expectation, _ = pinching_expectation(2)
    big = expectation.algebra
    not_auto = StarHomomorphism(big, big, np.diag([1.0, 0.0, 0.0, 1.0]))
    with pytest.raises(ValueError):
        equivariantize(expectation, [not_auto])


def test_equivariantize_monotone_scalar_index(rng):
    big = MultiMatrixAlgebra((2,))
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])
    action = [identity_homomorphism(big), ad_homomorphism(swap, big)]
    for _ in range(6):
        z = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        rho = z @ z.conj().T
        rho = rho / np.trace(rho)
        expectation = state_expectation(2, rho)
        averaged = equivariantize(expectation, action)
        assert scalar_index(averaged) <= scalar_index(expectation) + 1e-9


# -- restriction -------------------------------------------------------------

def test_restrict_to_diagonal_gives_index_two():
    expectation, tau = trace_expectation(2)
    big = expectation.algebra
    span = [big.identity(), big.matrix_unit(0, 0, 0), big.matrix_unit(0, 1, 1)]
    restricted = restrict_to_intermediate(expectation, span)
    assert restricted.algebra.blocks == (1, 1)
    tau_c = TraceWeights(restricted.algebra, (0.5, 0.5))
    basis = find_quasi_basis(restricted, tau_c)
    assert basis is not None
    assert abs(watatani_index(restricted, basis).norm() - 2.0) <= 1e-9


def test_restrict_to_full_algebra_is_identity_case():
    expectation, tau = trace_expectation(2)
    big = expectation.algebra
    restricted = restrict_to_intermediate(expectation, [big.identity()] + big.basis())
    assert restricted.algebra.blocks == (2,)
    assert abs(scalar_index(restricted) - 4.0) <= 1e-9


def test_restrict_to_subalgebra_itself():
    expectation, tau = trace_expectation(2)
    big = expectation.algebra
    restricted = restrict_to_intermediate(expectation, [big.identity()])
    assert restricted.algebra.blocks == (1,)
    assert abs(scalar_index(restricted) - 1.0) <= 1e-9


def test_restrict_rejects_non_subalgebra():
    expectation, _ = trace_expectation(2)
    big = expectation.algebra
    with pytest.raises(ValueError):
        restrict_to_intermediate(expectation,
                                 [big.identity(), big.matrix_unit(0, 0, 1)])


def test_restrict_preserves_quasi_basis_existence(rng):
    # if E has a quasi-basis, the restriction does too
    inclusion, tau = random_multimatrix_inclusion(rng)
    expectation = canonical_expectation(inclusion, tau)
    big = expectation.algebra
    restricted = restrict_to_intermediate(
        expectation, [big.identity()] + expectation.inclusion.image_basis())
    tau_c = TraceWeights(restricted.algebra,
                         (1.0,) * len(restricted.algebra.blocks))
    assert find_quasi_basis(restricted, tau_c) is not None


# -- q-system bookkeeping ----------------------------------------------------

def test_qsystem_comultiplication_check():
    for make in (identity_expectation, pinching_expectation, trace_expectation):
        expectation, tau = make(2)
        basis = find_quasi_basis(expectation, tau)
        assert qsystem_comultiplication_check(expectation, basis)
