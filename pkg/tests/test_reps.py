import dataclasses

import numpy as np
import pytest

from dyqg.exchange import default_samples
from dyqg.intertwine import VermaCache
from dyqg.mixed import highest_weight_module, sample_central_charge
from dyqg.params import sample_params
from dyqg.reps import (DomainError, ExchangeFamily, RepMorphism, bound_defect, check_morphism, functor_F,
                       functor_Fl, homogeneity_defect, identity_morphism, morphism_residual, rll_residual,
                       tensor_morphisms, tensor_product, trivial_representation, verify_representation,
                       weight_zero_defect, zero_morphism)

S2 = default_samples(0, 2)


@pytest.fixture(scope="module")
def depth2():
    p, level, X = sample_central_charge(0, depth=2)
    return p, functor_Fl(p, X, cache=VermaCache()), ExchangeFamily(p, 3)


@pytest.fixture(scope="module")
def depth1():
    p, level, X = sample_central_charge(0, depth=1, k_range=(13.0, 14.0))
    cache = VermaCache()
    rng = np.random.default_rng(7)
    nu = (complex(rng.uniform(0.1, 0.7), rng.uniform(-0.3, 0.3)),)
    Y = highest_weight_module(p, nu, 0.41 - 0.07j, 1)
    return p, functor_Fl(p, X, cache=cache), functor_Fl(p, Y, cache=cache), ExchangeFamily(p, 3)


def test_evaluation_module_gives_a_representation():
    p = sample_params(0)
    fam = ExchangeFamily(p, 3)
    rep = functor_F(p, fam)
    assert rep.level == 0 and rep.graded_dims() == {0: 2}
    for u, u2, *_ in S2:
        assert rll_residual(rep, fam, u, u2) < 1e-8
    assert weight_zero_defect(rep, 0.1) < 1e-12


def test_highest_weight_module_gives_a_representation(depth2):
    p, rep, fam = depth2
    reports = verify_representation(rep, fam, S2)
    assert all(r.passed for r in reports), [r.to_json() for r in reports]
    assert {r.name for r in reports} == {"weight-zero", "homogeneity", "per-vector-bound",
                                         "rll-definition", "smoothness"}


def test_bound_zero_is_violated(depth2):
    _, rep, _ = depth2
    strict = dataclasses.replace(rep, bound=0)
    assert bound_defect(strict, 0.1) > 1e-3


def test_wrong_exponents_break_homogeneity(depth2):
    _, rep, _ = depth2
    shifted = dataclasses.replace(rep, exponents=lambda lam, k: rep.exponents(lam, k) + 0.5)
    assert homogeneity_defect(shifted, 0.1) > 1e-2


def test_level_is_required_in_rll(depth2):
    _, rep, fam = depth2
    u, u2, *_ = S2[0]
    assert rll_residual(dataclasses.replace(rep, level=0.0), fam, u, u2) > 1e-4


def test_depth_zero_module_is_diagonal():
    p, level, X = sample_central_charge(0, depth=0)
    rep = functor_Fl(p, X)
    assert rep.graded_dims() == {0: X.dim}
    assert bound_defect(dataclasses.replace(rep, bound=0), 0.1) == 0
    assert weight_zero_defect(rep, 0.1) < 1e-12


def test_tensor_product(depth1):
    p, A, B, fam = depth1
    AB = tensor_product(A, B)
    assert AB.level == A.level + B.level
    assert AB.bound == 2
    for u, u2, *_ in S2:
        assert rll_residual(AB, fam, u, u2) < 1e-8
    assert homogeneity_defect(AB, 0.1) < 1e-10
    assert weight_zero_defect(AB, 0.1) < 1e-12


def test_unit_object(depth1):
    p, A, _, _ = depth1
    one = trivial_representation(p)
    for T in (tensor_product(A, one), tensor_product(one, A)):
        assert np.allclose(T(0.13 + 0.01j), A(0.13 + 0.01j))


def test_associativity(depth1):
    p, A, _, fam = depth1
    F = functor_F(p, fam)
    B0 = functor_Fl(p, highest_weight_module(p, (0.27 + 0.1j,), 0.33 - 0.05j, 0))
    left = tensor_product(tensor_product(A, B0), F)
    right = tensor_product(A, tensor_product(B0, F))
    u = 0.21 - 0.02j
    L, R = left(u), right(u)
    assert np.abs(L - R).max() < 1e-12 * np.abs(L).max()


def test_domain_is_enforced():
    p = sample_params(0)
    rep = functor_F(p)
    with pytest.raises(DomainError):
        rep(0.1, k=-1.5)


def test_empty_windows_are_rejected():
    p = sample_params(0)
    X = highest_weight_module(p, (0.3,), 0.5, 0, margin=0)
    with pytest.raises(ValueError, match="empty window"):
        functor_Fl(p, X, width=-1)
    A = trivial_representation(p)
    B = dataclasses.replace(A, window=np.zeros(1, dtype=bool))
    with pytest.raises(ValueError, match="no common window"):
        tensor_product(A, B)


def test_morphisms(depth2):
    p, rep, _ = depth2
    assert check_morphism(identity_morphism(rep), S2).passed
    assert check_morphism(zero_morphism(rep, rep), S2).passed
    scaled = RepMorphism(rep, rep, lambda lam, k: (2.5 - 1j) * np.eye(rep.dim))
    assert check_morphism(scaled, S2).passed
    rng = np.random.default_rng(0)
    M = rng.normal(size=(rep.dim, rep.dim))
    assert not check_morphism(RepMorphism(rep, rep, lambda lam, k: M), S2).passed


def test_tensor_of_morphisms(depth1):
    p, A, B, _ = depth1
    f = tensor_morphisms(identity_morphism(A), identity_morphism(B))
    assert morphism_residual(f, 0.17) < 1e-12
    assert np.allclose(f.phi(np.asarray(p.lam), p.k), np.eye(A.dim * B.dim))


def test_scalar_renormalisation_of_R_changes_nothing(depth2):
    # a lam- and k-independent scalar factor cancels between the two sides
    p, rep, fam = depth2
    psi = lambda u: np.exp(0.7 * u) * (1.3 + 0.4j)  # noqa: E731
    scaled = lambda u, lam, k: psi(u) * fam(u, lam, k)  # noqa: E731
    u, u2, *_ = S2[0]
    assert rll_residual(rep, scaled, u, u2) == pytest.approx(rll_residual(rep, fam, u, u2), rel=1e-3, abs=1e-13)
