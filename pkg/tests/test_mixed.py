import numpy as np
import pytest

from dyqg.exchange import ExchangeFactory, default_samples
from dyqg.intertwine import VermaCache
from dyqg.mixed import (MixedFactory, highest_weight_module, mixed_twists, qdybe_cc, safe_window,
                        sample_central_charge, universal_r, verify_qdybe_cc)
from dyqg.params import sample_params


@pytest.fixture(scope="module")
def depth2():
    p, level, X = sample_central_charge(0, depth=2)
    cache = VermaCache()
    return p, level, X, MixedFactory(p, X, cache), ExchangeFactory(p, 3, cache=cache)


def test_universal_R_intertwines_and_is_triangular(depth2):
    p, level, X, mixed, _ = depth2
    U = universal_r(p, X)
    assert U.e_residual < 1e-10
    assert U.triangular_defect == 0
    assert U.shift == pytest.approx(p.qpow(level))


def test_mixed_intertwiner_equations(depth2):
    p, level, X, _, _ = depth2
    assert mixed_twists(p, X, level).residual < 1e-9


def test_exchange_is_homogeneous_in_z(depth2):
    _, _, _, mixed, _ = depth2
    L = mixed.at()
    E = L.exponents()
    L0 = L(0)
    for u in (0.17 + 0.03j, -0.29 - 0.02j):
        assert np.allclose(L(u), L0 * np.exp(2j * np.pi * u * E), atol=1e-10 * np.abs(L0).max())


def test_exchange_lowers_x_grade_by_at_most_one(depth2):
    _, _, X, mixed, _ = depth2
    L0 = mixed.at()(0)
    g = np.tile(X.grade, 2)
    drop = g[None, :] - g[:, None]  # input grade minus output grade
    big = np.abs(L0).max()
    # zero up to the truncation error of the depth-two module
    assert np.abs(L0[drop > 1]).max(initial=0) < 1e-6 * big
    assert np.abs(L0[drop == 1]).max() > 1e-6 * big


def test_yang_baxter_with_central_charge(depth2):
    _, _, _, mixed, finite = depth2
    S = default_samples(0, 2)
    assert verify_qdybe_cc(mixed, finite, S, 1e-8).passed


def test_central_charge_shift_is_required(depth2):
    _, _, _, mixed, finite = depth2
    S = default_samples(0, 1)
    assert verify_qdybe_cc(mixed, finite, S, 1e-8, low_level=False).residual > 1e-4


def test_truncation_error_decays_with_level():
    # the defect of a depth-one module shrinks by orders of magnitude as Re k grows
    res = []
    for k_range in ((7.0, 8.0), (13.0, 14.0)):
        p, level, X = sample_central_charge(0, depth=1, k_range=k_range)
        cache = VermaCache()
        c = qdybe_cc(MixedFactory(p, X, cache), ExchangeFactory(p, 3, cache=cache), 0.13 + 0.02j, -0.21 + 0.01j)
        res.append(c.residual())
    assert res[1] < 1e-8
    assert res[0] > 100 * res[1]


def test_safe_window_is_grade_zero():
    p = sample_params(0)
    X = highest_weight_module(p, (0.4,), 0.5, 2)
    w = safe_window(X, 1)
    assert np.all(X.grade[w] == 0)
    assert w.sum() == 2  # x_nu and F_1 x_nu
