import cmath

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dyqg.params import (ParameterError, Params, delta_k, pairing, sample_params, simple_root,
                         vector_weights)


def test_delta_k_hand_values():
    # (lam, lam + 2 rho) / (2 (k + n)) with (w, w) = 1/2 for sl_2
    assert delta_k((1,), 1, 2) == pytest.approx(0.25)
    assert delta_k((0,), 3.7, 2) == 0
    # sl_3, lam = w_1: (w1, w1) = 2/3, (w1, 2 rho) = 2, k = 1
    assert delta_k((1, 0), 1, 3) == pytest.approx(1 / 3)


def test_pairing_of_simple_roots_is_cartan():
    for n in (2, 3, 4):
        for i in range(1, n):
            for j in range(1, n):
                expected = 2 if i == j else (-1 if abs(i - j) == 1 else 0)
                assert pairing(simple_root(i, n), simple_root(j, n), n) == pytest.approx(expected)


def test_vector_weights_sum_to_zero():
    for n in (2, 3, 5):
        assert np.allclose(np.sum(vector_weights(n), axis=0), 0)


def test_critical_level_rejected():
    with pytest.raises(ParameterError, match="critical level"):
        Params(k=-2.0)
    with pytest.raises(ParameterError, match="critical level"):
        delta_k((0.3,), -2, 2)


def test_root_of_unity_rejected():
    with pytest.raises(ParameterError, match="root of unity"):
        Params(q=(1 - 1e-13) * cmath.exp(2j * cmath.pi / 5))


def test_q_modulus_and_lambda_length():
    with pytest.raises(ParameterError):
        Params(q=1.2)
    with pytest.raises(ParameterError):
        Params(lam=(0.1, 0.2))


def test_logp_is_not_principal_branch():
    p = sample_params(0, k=40.3 + 0.2j)
    assert p.logp == pytest.approx(-2 * (p.k + 2) * p.logq)
    # the principal log of p would differ by a multiple of 2 pi i here
    assert abs(p.logp.imag) > cmath.pi
    assert abs(cmath.exp(p.logp) - p.p) < 1e-12 * abs(p.p)
    assert p.ppow(0.5) ** 2 == pytest.approx(p.p)


def test_with_q_recomputes_log():
    p = sample_params(1)
    p2 = p.with_(q=0.5 + 0.1j)
    assert cmath.exp(p2.logq) == pytest.approx(0.5 + 0.1j)


def test_sampler_reproducible():
    assert sample_params(3) == sample_params(3)
    assert sample_params(3) != sample_params(4)


@given(st.integers(0, 10_000))
def test_params_json_roundtrip(seed):
    p = sample_params(seed)
    assert Params.from_json(p.to_json()) == p
    assert Params.from_json(p.to_json()).config_hash() == p.config_hash()
