import numpy as np
import pytest

from dyqg.algebra import AlgebraPresentation, EvaluationModule, check_relations, qbinom
from dyqg.params import sample_params


@pytest.mark.parametrize("n", [2, 3, 4])
def test_evaluation_module_relations(n):
    rep = check_relations(EvaluationModule(sample_params(n, n=n)), 1e-12)
    assert rep.passed, rep.residuals


@pytest.mark.parametrize("kind,i", [("E", 0), ("F", 1)])
def test_zeroed_generator_breaks_relations(kind, i):
    V = EvaluationModule(sample_params(0))
    rep = check_relations(V.with_zeroed(kind, i), 1e-12)
    assert not rep.passed
    assert rep.residuals["commutator"] > 0.1


def test_qbinom_pascal_rule():
    p = sample_params(1)
    qp = p.qpow
    for m in range(1, 6):
        for r in range(1, m):
            rhs = qp(-r) * qbinom(p, m - 1, r) + qp(m - r) * qbinom(p, m - 1, r - 1)
            assert qbinom(p, m, r) == pytest.approx(rhs, rel=1e-12)


def test_affine_twist():
    p = sample_params(0, n=3)
    V = EvaluationModule(p)
    z = 0.3 + 0.8j
    assert np.allclose(V.matrix("E", 0, z), z * V.matrix("E", 0))
    assert np.allclose(V.matrix("F", 0, z), V.matrix("F", 0) / z)
    assert np.allclose(V.matrix("E", 1, z), V.matrix("E", 1))
    # K_0 K_1 ... K_{n-1} = q^c = 1 on a level-zero module
    prod = np.eye(3)
    for i in range(3):
        prod = prod @ V.matrix("K", i)
    assert np.allclose(prod, np.eye(3))


def test_presentation_labels():
    assert AlgebraPresentation(3).labels[:3] == ["E0", "F0", "K0"]
    assert AlgebraPresentation(2).cartan.tolist() == [[2, -2], [-2, 2]]
