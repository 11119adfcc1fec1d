"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are collected in ``RESULTS`` and repeated in the terminal summary
(see conftest.py), so they show up without ``-s``.
"""

import time

import numpy as np
import pytest

from dyqg.algebra import EvaluationModule, check_relations
from dyqg.checks import CHECKS, RunConfig, check_felder, check_unitarity, run_checks
from dyqg.elliptic import gauge_fit
from dyqg.exchange import ExchangeFactory
from dyqg.intertwine import intertwiner_for
from dyqg.params import sample_params
from dyqg.verma import build_verma

RESULTS: list[str] = []
T0 = time.perf_counter()


def record(number, title, passed, detail):
    line = f"{'PASS' if passed else 'FAIL'}  criterion {number:>2}  {title}: {detail}"
    RESULTS.append(line)
    print(line)
    return passed


def worst(reports):
    return max(r.residual for r in reports)


def test_01_algebra_relations():
    t = time.perf_counter()
    res = [check_relations(EvaluationModule(sample_params(0)), 1e-10).max_residual]
    for seed in range(5):
        res.append(check_relations(build_verma(sample_params(seed), 4), 1e-10).max_residual)
    dt = time.perf_counter() - t
    ok = max(res) < 1e-10 and dt < 10
    assert record(1, "algebra relations, depth 4, 5 seeds", ok, f"max residual {max(res):.2e}, {dt:.1f} s")


def test_02_intertwiner_annihilation():
    res, margins = [], []
    for seed in range(10):
        p = sample_params(seed)
        for a in range(p.n):
            phi = intertwiner_for(p, np.eye(p.n)[a], 4)
            res.append(max(phi.annihilation_residuals().values()))
            margins.append(phi.rank_margin)
    ok = max(res) < 1e-9 and min(margins) > 0
    assert record(2, "intertwiners through grade 4, 10 seeds", ok,
                  f"max residual {max(res):.2e}, min rank margin {min(margins):.2e}")


def test_03_factorization():
    reps = run_checks(["factorization"], RunConfig(seed=0, depth=4))
    ok = all(r.passed for r in reps)
    assert record(3, "correlation function is a power series in z2/z1, N = 4", ok, f"max defect {worst(reps):.2e}")


def test_04_qkz():
    reps = run_checks(["qkz"], RunConfig(seed=0, depth=4))
    ok = all(r.passed for r in reps)
    detail = ", ".join(f"{r.details.get('property', 'second equation')} {r.residual:.2e}" for r in reps)
    assert record(4, "qKZ pair through order 4", ok, detail)


def test_05_qdybe():
    t = time.perf_counter()
    reps = [r for seed in range(3) for r in run_checks(["qdybe"], RunConfig(seed=seed, N=3))]
    dt = time.perf_counter() - t
    ok = all(r.passed for r in reps) and dt < 120
    assert record(5, "dynamical Yang-Baxter, 3 seeds", ok, f"max residual {worst(reps):.2e}, {dt:.1f} s")


def test_06_qdybe_central_charge():
    reps = [r for seed in (0, 1) for r in run_checks(["qdybe-cc"], RunConfig(seed=seed, depth=2))]
    ok = all(r.passed for r in reps)
    assert record(6, "Yang-Baxter with central charge, depth 2, 2 seeds", ok, f"max residual {worst(reps):.2e}")


def test_07_bounded_representation():
    reps = run_checks(["rll-definition"], RunConfig(seed=0, depth=2))
    ok = all(r.passed for r in reps)
    detail = ", ".join(f"{r.name.split('/')[1]} {r.residual:.1e}" for r in reps)
    assert record(7, "image of a depth-2 module is a bounded representation", ok, detail)


def test_08_tensor_closure():
    reps = run_checks(["tensor-closure"], RunConfig(seed=0))
    ok = all(r.passed for r in reps)
    detail = ", ".join(f"{r.details['property']} {r.residual:.1e}" for r in reps)
    assert record(8, "tensor products and unit object", ok, detail)


def test_09_felder():
    cfg = RunConfig(seed=0)
    reps = check_felder(cfg) + [r for r in check_unitarity(cfg) if r.details["matrix"] == "felder"]
    ok = all(r.passed for r in reps)
    detail = ", ".join(f"{r.name} {r.residual:.1e}" for r in reps)
    assert record(9, "Felder R-matrix at 20 sample points", ok, detail)


def test_10_periodicity():
    reps = run_checks(["periodicity-1", "periodicity-2"], RunConfig(seed=0))
    ok = all(r.passed for r in reps)
    detail = ", ".join(f"{r.name} {r.residual:.1e}" for r in reps)
    assert record(10, "unit and modular shifts of u", ok, detail)


def test_11_gauge_fit_stretch():
    p = sample_params(0)
    R = ExchangeFactory(p, 3).at()
    fit = gauge_fit(R, tol=1e-6, order=3)
    if fit.passed:
        record(11, "(stretch) gauge fit against Felder through order 3", True,
               f"residual {max(fit.residual, fit.coefficient_residual):.2e}")
        return
    # not gating: the report must say where the fit first breaks
    ok = fit.first_mismatch is not None
    record(11, "(stretch) gauge fit against Felder through order 3", False,
           f"first disagreeing coefficient {fit.first_mismatch}, residual {fit.coefficient_residual:.2e}")
    assert ok
    pytest.xfail("stretch criterion not met")


def test_12_reproducibility_and_runtime():
    names = list(CHECKS)
    a = run_checks(names, RunConfig(seed=3))
    b = run_checks(names, RunConfig(seed=3))
    drift = max(abs(x.residual - y.residual) for x, y in zip(a, b))
    elapsed = time.perf_counter() - T0
    ok = drift <= 1e-12 and elapsed < 900
    assert record(12, "reproducibility and runtime", ok, f"max drift {drift:.1e}, suite time {elapsed:.0f} s")
