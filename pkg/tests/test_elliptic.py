import cmath

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dyqg.elliptic import (FelderRMatrix, PoleError, constant_gauge, default_samples, exponential_gauge,
                           felder_R, felder_dictionary, felder_trig_limit, gauge_fit, gl_coordinates,
                           period_residual, tau_residual, unitarity_residual, verify_qdybe_numeric)
from dyqg.exchange import ExchangeFactory
from dyqg.params import sample_params

F2 = FelderRMatrix(2, 0.1 + 1.1j, 0.07 - 0.02j)
LAM2 = np.array([0.31 + 0.05j, -0.31 - 0.05j])


@pytest.mark.parametrize("n", [2, 3])
def test_dynamical_yang_baxter(n):
    F = FelderRMatrix(n, 0.2 + 0.9j, 0.05 + 0.01j)
    lam = gl_coordinates(np.linspace(0.3, 0.7, n - 1) + 0.05j, n)
    assert verify_qdybe_numeric(F, n, lam, default_samples(1, 6), 1e-9, shift=F.shifted).passed


def test_flipped_off_diagonal_sign_breaks_yang_baxter():
    tp = F2.tp
    bad = lambda u, lam: felder_R(u, lam, tp, F2.eta, 2, beta_sign=-1)  # noqa: E731
    rep = verify_qdybe_numeric(bad, 2, LAM2, default_samples(0, 3), 1e-9, shift=F2.shifted)
    assert not rep.passed


def test_yang_baxter_needs_the_shift():
    wrong = lambda lam, a: np.asarray(lam) - F2.eta * np.eye(2)[a]  # noqa: E731
    assert not verify_qdybe_numeric(F2, 2, LAM2, default_samples(2, 3), 1e-9, shift=wrong).passed


def test_unitarity_and_periods():
    us = [s[0] for s in default_samples(3, 10)]
    assert unitarity_residual(F2, 2, LAM2, us) < 1e-10
    assert period_residual(F2, LAM2, us) < 1e-12
    assert tau_residual(F2, LAM2, us) < 1e-9


@given(st.builds(complex, st.floats(-0.45, 0.45), st.floats(-0.1, 0.1)))
def test_trigonometric_limit(u):
    eta = 0.11 + 0.02j
    F = FelderRMatrix(2, 8j, eta)
    assert np.allclose(F(u, LAM2), felder_trig_limit(u, LAM2, eta), atol=1e-9)


def test_pole_is_reported():
    with pytest.raises(PoleError):
        F2(-F2.eta, LAM2)
    with pytest.raises(PoleError):
        F2(0.2, np.zeros(2))


def test_constant_gauge_preserves_yang_baxter_and_lambda_dependent_does_not():
    S = default_samples(4, 3)
    good = constant_gauge({(0, 1): 0.8 - 0.3j}).apply(F2, 2)
    bad = exponential_gauge(1.5).apply(F2, 2)
    assert verify_qdybe_numeric(good, 2, LAM2, S, 1e-9, shift=F2.shifted).passed
    assert not verify_qdybe_numeric(bad, 2, LAM2, S, 1e-9, shift=F2.shifted).passed


def test_gl_coordinates():
    assert np.allclose(gl_coordinates([1.0], 2), [0.5, -0.5])
    assert np.allclose(gl_coordinates([1.0, 0.0], 3), [2 / 3, -1 / 3, -1 / 3])


def test_dictionary_is_affine_in_level():
    p = sample_params(0)
    d = felder_dictionary(p)
    assert d["tau"] == pytest.approx(d["a"] * p.k + d["b"])
    assert cmath.exp(-2j * cmath.pi * d["tau"]) == pytest.approx(p.p)


@pytest.mark.parametrize("seed", [0, 1])
def test_exchange_matrix_is_a_gauge_of_felder(seed):
    fit = gauge_fit(ExchangeFactory(sample_params(seed), 3).at())
    assert fit.passed, fit.to_json()
    for ab, eps in fit.exponents.items():
        assert eps == pytest.approx(fit.expected_exponents[ab], abs=1e-8)

