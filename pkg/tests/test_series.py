import numpy as np
import pytest
from hypothesis import given, strategies as st

from dyqg.series import MatrixSeries, SingularLeadingCoefficient, WindowError, series_invert, series_mul


def _random_series(rng, lo, terms, d=2):
    c = rng.normal(size=(terms, d, d)) + 1j * rng.normal(size=(terms, d, d))
    return MatrixSeries(c, lo, 0)


def _brute_product(a, b):
    """Full convolution of the coefficient lists, indexed by absolute power."""
    out = {}
    for i in range(a.lo, a.hi + 1):
        for j in range(b.lo, b.hi + 1):
            out[i + j] = out.get(i + j, 0) + a[i] @ b[j]
    return out


@given(st.integers(0, 2**31), st.integers(-3, 3), st.integers(-3, 3), st.integers(1, 6))
def test_product_matches_brute_force_on_exact_window(seed, lo_a, lo_b, terms):
    rng = np.random.default_rng(seed)
    a, b = _random_series(rng, lo_a, terms), _random_series(rng, lo_b, terms)
    prod = series_mul(a, b)
    brute = _brute_product(a, b)
    for m in range(prod.lo, prod.hi + 1):
        assert np.allclose(prod[m], brute[m], atol=1e-12)


def test_product_window_error():
    rng = np.random.default_rng(0)
    a, b = _random_series(rng, 0, 3), _random_series(rng, 0, 3)
    with pytest.raises(WindowError):
        series_mul(a, b, window=(0, 3))


@given(st.integers(0, 2**31), st.integers(-2, 2), st.integers(1, 8))
def test_inverse_is_two_sided(seed, lo, terms):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=(terms, 2, 2)) + 1j * rng.normal(size=(terms, 2, 2))
    c[0] += 3 * np.eye(2)
    a = MatrixSeries(c, lo, 0)  # keep the leading coefficient invertible
    inv = series_invert(a)
    one = MatrixSeries.identity(2, 0, terms - 1)
    assert series_mul(a, inv).max_abs_diff(one) < 1e-10
    assert series_mul(inv, a).max_abs_diff(one) < 1e-10


def test_singular_leading_coefficient():
    c = np.zeros((2, 2, 2), dtype=complex)
    c[0] = [[1, 1], [1, 1]]
    with pytest.raises(SingularLeadingCoefficient):
        series_invert(MatrixSeries(c, 0, 0))


def test_evaluate_against_direct_sum():
    rng = np.random.default_rng(1)
    a = _random_series(rng, -2, 5)
    z = 0.7 * np.exp(0.4j)
    direct = sum(a[m] * z ** m for m in range(a.lo, a.hi + 1))
    assert np.allclose(a.evaluate(z), direct)


@given(st.integers(0, 2**31))
def test_json_roundtrip(seed):
    rng = np.random.default_rng(seed)
    a = _random_series(rng, int(rng.integers(-3, 3)), 4)
    b = MatrixSeries.from_json(a.to_json())
    assert b.lo == a.lo and np.array_equal(b.coeffs, a.coeffs)
