import numpy as np
import pytest

import dyqg.intertwine as itw
from dyqg.intertwine import (IntertwinerError, VermaCache, correlation_series, dense_intertwiner_oracle,
                             factorization_check, fusion_matrix, intertwiner_for, solve_intertwiner)
from dyqg.params import ParameterError, sample_params, vector_weights


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_annihilation_through_order_four(seed, verma_cache):
    p = sample_params(seed)
    for a in range(2):
        phi = intertwiner_for(p, np.eye(2)[a], 4, verma_cache)
        assert max(phi.annihilation_residuals().values()) < 1e-9
        assert np.allclose(phi.leading(), np.eye(2)[a])


def test_annihilation_sl3(verma_cache):
    p = sample_params(4, n=3)
    phi = intertwiner_for(p, np.eye(3)[1], 2, verma_cache)
    assert max(phi.annihilation_residuals().values()) < 1e-9


def test_recursion_agrees_with_dense_solve(verma_cache):
    p = sample_params(5)
    v = np.eye(2)[1]
    phi = intertwiner_for(p, v, 3, verma_cache)
    dense = dense_intertwiner_oracle(p, phi.target, v, 3)
    for g in range(4):
        for a, (key, vec) in phi.coeffs[g].items():
            k2, vec2 = dense[g][a]
            assert k2 == key
            assert np.allclose(vec, vec2, atol=1e-6 * max(1.0, np.abs(vec).max()))


def test_requires_deep_enough_target():
    p = sample_params(0)
    target = VermaCache().get(p.shifted(vector_weights(2)[0]), 1, 1)
    with pytest.raises(IntertwinerError):
        solve_intertwiner(p, target, np.eye(2)[0], 2)


def test_rejects_non_weight_vector():
    p = sample_params(0)
    target = VermaCache().get(p.shifted(vector_weights(2)[0]), 2, 1)
    with pytest.raises(ParameterError):
        solve_intertwiner(p, target, np.array([1.0, 1.0]), 2)


@pytest.mark.parametrize("a,b", [(0, 0), (0, 1), (1, 0)])
def test_correlation_function_is_a_power_series_in_ratio(a, b, verma_cache):
    c = factorization_check(sample_params(1), np.eye(2)[a], np.eye(2)[b], 3, cache=verma_cache)
    assert c.off_diagonal < 1e-10
    assert c.negative_powers < 1e-10
    assert c.series_defect < 1e-10


def test_factorization_detects_missing_spectral_dependence(monkeypatch, verma_cache):
    real = itw.top_projection
    monkeypatch.setattr(itw, "top_projection", lambda m, h, v, N, z=None: real(m, h, v, N))
    c = factorization_check(sample_params(1), np.eye(2)[0], np.eye(2)[1], 3, cache=verma_cache)
    assert max(c.off_diagonal, c.negative_powers) > 1e-3


def test_leading_term_has_unit_diagonal_component(verma_cache):
    p = sample_params(2)
    psi = correlation_series(p, np.eye(2)[0], np.eye(2)[1], 2, verma_cache)
    lead = psi.series[0][:, 0]
    assert lead[1] == pytest.approx(1)
    # only the weight space of e_1 (x) e_2 is reached
    assert lead[0] == 0 and lead[3] == 0


def test_fusion_matrix_is_unipotent_weight_map(verma_cache):
    J = fusion_matrix(sample_params(3), 3, verma_cache)
    J0 = J.series[0]
    assert np.allclose(np.diag(J0), 1)
    assert np.allclose(np.triu(J0, 1), 0)
    assert J.weight_defect() < 1e-12 * np.abs(J.series.coeffs).max()
