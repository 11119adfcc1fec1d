import cmath

import pytest
from hypothesis import given, strategies as st

from dyqg.theta import ThetaParams, theta, theta_direct

taus = st.builds(complex, st.floats(-0.5, 0.5), st.floats(0.4, 2.0))
args = st.builds(complex, st.floats(-1, 1), st.floats(-0.5, 0.5))


@given(args, taus)
def test_matches_200_term_sum(u, tau):
    ref = theta_direct(u, tau, 200)
    assert abs(theta(u, ThetaParams(tau)) - ref) <= 1e-12 * max(1.0, abs(ref))


@given(args, taus)
def test_quasi_periodicity(u, tau):
    tp = ThetaParams(tau)
    assert theta(u + 1, tp) == pytest.approx(-theta(u, tp), rel=1e-11, abs=1e-13)
    lhs = theta(u + tau, tp)
    rhs = -cmath.exp(-1j * cmath.pi * tau - 2j * cmath.pi * u) * theta(u, tp)
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(rhs))


def test_odd_with_zero_at_origin():
    tp = ThetaParams(0.3 + 0.9j)
    assert abs(theta(0, tp)) < 1e-15
    assert theta(-0.21 + 0.1j, tp) == pytest.approx(-theta(0.21 - 0.1j, tp))


def test_far_argument_is_reduced():
    tp = ThetaParams(0.1 + 0.8j)
    u = 0.2 + 3.5j
    ref = theta_direct(u, tp.tau, 400)
    assert abs(theta(u, tp) - ref) <= 1e-9 * abs(ref)


def test_rejects_lower_half_plane():
    with pytest.raises(ValueError):
        ThetaParams(0.5 - 0.1j)
