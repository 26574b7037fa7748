import numpy as np
import pytest

from qindex import io as qio
from qindex.algebra import MultiMatrixAlgebra, TraceWeights
from qindex.expectation import canonical_expectation
from qindex.fusion import validate_fusion, validate_module
from qindex.generators import gen_pointed, gen_regular_module, gen_tlj

from conftest import diagonal_inclusion, random_multimatrix_inclusion


def test_algebra_round_trip():
    alg = MultiMatrixAlgebra((2, 3))
    assert qio.algebra_from_json(qio.algebra_to_json(alg)).blocks == alg.blocks


def test_element_round_trip(rng):
    alg = MultiMatrixAlgebra((2, 1))
    x = alg.random_element(rng)
    back = qio.element_from_json(qio.element_to_json(x), alg)
    assert (back - x).norm() <= 1e-15


def test_homomorphism_round_trip(rng):
    incl, _ = random_multimatrix_inclusion(rng)
    back = qio.homomorphism_from_json(qio.homomorphism_to_json(incl))
    assert back.source.blocks == incl.source.blocks
    assert back.target.blocks == incl.target.blocks
    assert np.allclose(back.matrix, incl.matrix)


def test_expectation_round_trip():
    big = MultiMatrixAlgebra((2,))
    tau = TraceWeights(big, (0.5,))
    expectation = canonical_expectation(diagonal_inclusion(2), tau)
    data = qio.expectation_to_json(expectation, tau)
    inclusion, mat, tau2 = qio.expectation_spec_from_json(data)
    assert np.allclose(mat, expectation.matrix)
    assert tau2.weights == tau.weights


def test_expectation_spec_defaults():
    big = MultiMatrixAlgebra((2,))
    tau = TraceWeights(big, (0.5,))
    expectation = canonical_expectation(diagonal_inclusion(2), tau)
    data = qio.expectation_to_json(expectation)
    del data["map"]
    inclusion, mat, tau2 = qio.expectation_spec_from_json(data)
    assert mat is None
    assert tau2.weights == (0.5,)  # normalized trace on M_2


def test_ring_and_module_round_trip():
    for make in (lambda: gen_tlj(5)[0], lambda: gen_pointed([2, 2])):
        ring = make()
        back = qio.ring_from_json(qio.ring_to_json(ring))
        assert back.labels == ring.labels
        assert back.unit == ring.unit
        assert dict(back.dual) == dict(ring.dual)
        assert np.array_equal(back.tensor, ring.tensor)
        assert validate_fusion(back) == []

        module = gen_regular_module(ring)
        back_m = qio.module_from_json(qio.module_to_json(module))
        assert back_m.labels == module.labels
        assert np.array_equal(back_m.action, module.action)
        assert validate_module(back_m) == []


def test_schema_errors_carry_paths():
    with pytest.raises(qio.SchemaError) as err:
        qio.algebra_from_json({"blocks": [0]})
    assert "blocks" in str(err.value)
    with pytest.raises(qio.SchemaError):
        qio.ring_from_json({"irr": ["a"], "unit": "b", "dual": {"a": "a"}, "N": {}})
    with pytest.raises(qio.SchemaError):
        qio.ring_from_json({"irr": ["a,b"], "unit": "a,b",
                            "dual": {"a,b": "a,b"}, "N": {}})
    with pytest.raises(qio.SchemaError):
        qio.element_from_json({"blocks": [[[1, 2], [3, 4]]]},
                              MultiMatrixAlgebra((2,)))
