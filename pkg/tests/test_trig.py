import numpy as np
import pytest
from hypothesis import given, strategies as st

from dyqg.algebra import EvaluationModule
from dyqg.params import sample_params
from dyqg.trig import (coproduct, flip, rmatrix21, rmatrix21_series, rmatrix_closed, rmatrix_nullspace,
                       universal_scalar, universal_scalar_series)

points = st.builds(complex, st.floats(-0.9, 0.9), st.floats(-0.9, 0.9)).filter(lambda y: abs(y) > 0.05)


@given(st.integers(0, 500), points)
def test_closed_form_matches_nullspace(seed, y):
    p = sample_params(seed)
    assert np.allclose(rmatrix_closed(p, y), rmatrix_nullspace(p, y), atol=1e-9)


@pytest.mark.parametrize("n", [2, 3])
def test_intertwines_coproducts(n):
    p = sample_params(7, n=n)
    V = EvaluationModule(p)
    z1, z2 = 0.9 * np.exp(0.3j), 0.4 * np.exp(-1.1j)
    R = rmatrix_nullspace(p, z2, z1)
    P = flip(n)
    for kind in "EFK":
        for i in range(n):
            lhs = R @ coproduct(V, kind, i, z2, z1)
            rhs = P @ coproduct(V, kind, i, z1, z2) @ P @ R
            assert np.allclose(lhs, rhs, atol=1e-10)


def test_flip_is_involution():
    assert np.array_equal(flip(3) @ flip(3), np.eye(9))
    v, w = np.arange(3.0), np.arange(2.0) + 5
    assert np.array_equal(flip(3, 2) @ np.kron(v, w), np.kron(w, v))


@pytest.mark.parametrize("n", [2, 3])
def test_taylor_coefficients_resum(n):
    p = sample_params(2, n=n)
    order = 30
    c = rmatrix21_series(p, order)
    y = 0.05 + 0.02j
    approx = sum(c[m] * y ** m for m in range(order + 1))
    assert np.allclose(approx, rmatrix21(p, y), atol=1e-10)


def test_pole_is_reported():
    p = sample_params(0)
    with pytest.raises(ZeroDivisionError):
        rmatrix_closed(p, p.qpow(2))


def test_universal_scalar_vanishes_at_one():
    assert abs(universal_scalar(sample_params(0), 1.0)) < 1e-15


@given(st.integers(0, 500))
def test_universal_scalar_series_against_product(seed):
    p = sample_params(seed)
    order = 60
    c = universal_scalar_series(p, order)
    y = 0.3 * np.exp(0.7j)
    assert abs(np.polyval(c[::-1], y) - universal_scalar(p, y)) < 1e-12 * max(1.0, abs(universal_scalar(p, y)))


def test_universal_scalar_product_identity():
    # phi(q^4 y) / phi(y) = (1 - q^2 y)^2 / ((1 - y)(1 - q^4 y)), straight from the products
    p = sample_params(3)
    y = 0.21 - 0.4j
    q2, q4 = p.qpow(2), p.qpow(4)
    ratio = universal_scalar(p, q4 * y) / universal_scalar(p, y)
    assert ratio == pytest.approx((1 - q2 * y) ** 2 / ((1 - y) * (1 - q4 * y)), rel=1e-12)
