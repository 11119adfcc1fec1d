import pytest
from hypothesis import given, strategies as st

from dyqg.checks import CHECKS, RUNNERS, RunConfig, report_document, run_checks, with_seed
from dyqg.exchange import Report

cx = st.builds(complex, st.floats(-5, 5), st.floats(-5, 5))


@given(st.integers(0, 10**6), st.one_of(st.none(), cx), st.one_of(st.none(), st.tuples(cx)),
       st.one_of(st.none(), st.integers(0, 4)))
def test_config_json_roundtrip(seed, k, lam, depth):
    cfg = RunConfig(seed=seed, k=k, lam=lam, depth=depth)
    back = RunConfig.from_json(cfg.to_json())
    assert back == cfg
    assert back.config_hash() == cfg.config_hash()


def test_hash_depends_on_seed():
    cfg = RunConfig(seed=1)
    assert with_seed(cfg, 2).config_hash() != cfg.config_hash()


def test_every_check_has_a_runner():
    assert set(CHECKS) == set(RUNNERS)


def test_unknown_check():
    with pytest.raises(KeyError):
        run_checks(["nope"], RunConfig())


def test_report_document_passes_only_if_all_do():
    cfg = RunConfig()
    good, bad = Report("a", 0.0, 1.0), Report("b", 2.0, 1.0)
    assert report_document("verify", cfg, [good])["passed"]
    assert not report_document("verify", cfg, [good, bad])["passed"]


def test_override_of_central_charge_data():
    cfg = RunConfig(seed=0, level=0.5 + 0.1j, nu=(0.3 + 0.1j,))
    p, level, X = cfg.central_charge(0)
    assert level == 0.5 + 0.1j
    assert X.module.level == level and X.module.lam == (0.3 + 0.1j,)
