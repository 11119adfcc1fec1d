"""The identity suite: named checks, each returning a list of reports."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .algebra import EvaluationModule, check_relations
from .elliptic import (FelderRMatrix, default_samples as felder_samples, felder_dictionary, gauge_fit,
                       period_residual, tau_residual, unitarity_residual, verify_qdybe_numeric)
from .exchange import (ExchangeFactory, Report, default_samples, extract_R_from_qkz, qkz2_residual,
                       periodicity_phases, unitarity_product, verify_modular_shift, verify_qdybe, verify_unit_shift, weight_defect)
from .intertwine import VermaCache, factorization_check, fusion_matrix, intertwiner_for
from .mixed import MixedFactory, highest_weight_module, sample_central_charge, verify_qdybe_cc
from .params import Params, sample_params
from .reps import (ExchangeFamily, functor_F, functor_Fl, rll_residual, tensor_product, trivial_representation,
                   verify_representation)
from .verma import build_verma

SCHEMA_VERSION = 1

CHECKS = ("relations", "intertwiner-annihilation", "factorization", "qkz", "qdybe", "category-C", "qdybe-cc",
          "unitarity", "periodicity-1", "periodicity-2", "rll-definition", "tensor-closure", "gauge-fit")


@dataclass
class RunConfig:
    """Everything a check needs; ``params`` is None until resolved from the seed."""

    seed: int = 0
    n: int = 2
    N: int = 3
    depth: int | None = None
    tol: float | None = None
    q: complex | None = None
    k: complex | None = None
    lam: tuple | None = None
    level: complex | None = None
    nu: tuple | None = None
    samples: int = 3
    digits: int | None = None  # extended precision for Verma construction
    extra: dict = field(default_factory=dict)

    def params(self) -> Params:
        fixed = {key: val for key, val in (("q", self.q), ("k", self.k), ("lam", self.lam)) if val is not None}
        return sample_params(self.seed, n=self.n, N=self.N, **fixed)

    def central_charge(self, depth: int, k_range=(7.0, 8.0)):
        """(params, level, X): the seeded large-Re k draw unless k, level or nu are given."""
        p, level, X = sample_central_charge(self.seed, self.n, depth=depth, k_range=k_range)
        over = {key: val for key, val in (("q", self.q), ("k", self.k), ("lam", self.lam)) if val is not None}
        if not over and self.level is None and self.nu is None:
            return p, level, X
        p = p.with_(**over)
        level = level if self.level is None else self.level
        nu = X.module.lam if self.nu is None else self.nu
        return p, level, highest_weight_module(p, nu, level, depth, 1)

    def to_json(self) -> dict:
        cx = lambda z: None if z is None else [complex(z).real, complex(z).imag]  # noqa: E731
        d = asdict(self)
        for key in ("q", "k", "level"):
            d[key] = cx(d[key])
        for key in ("lam", "nu"):
            d[key] = None if d[key] is None else [cx(x) for x in d[key]]
        return d

    @classmethod
    def from_json(cls, d: dict) -> RunConfig:
        kw = dict(d)
        for key in ("q", "k", "level"):
            if kw.get(key) is not None:
                kw[key] = complex(*kw[key])
        for key in ("lam", "nu"):
            if kw.get(key) is not None:
                kw[key] = tuple(complex(*x) for x in kw[key])
        return cls(**kw)

    def config_hash(self) -> str:
        return hashlib.sha256(json.dumps(self.to_json(), sort_keys=True).encode()).hexdigest()[:16]


def _tol(cfg: RunConfig, default: float) -> float:
    return default if cfg.tol is None else cfg.tol


def check_relations_suite(cfg: RunConfig) -> list[Report]:
    p = cfg.params()
    depth = 4 if cfg.depth is None else cfg.depth
    out = []
    for label, module in (("evaluation", EvaluationModule(p)), ("verma", build_verma(p, depth))):
        rep = check_relations(module, _tol(cfg, 1e-10))
        out.append(Report("relations", rep.max_residual, rep.tol, {"module": label, "residuals": rep.residuals}))
    return out


def check_annihilation(cfg: RunConfig) -> list[Report]:
    p = cfg.params()
    N = 4 if cfg.depth is None else cfg.depth
    out = []
    for a in range(p.n):
        phi = intertwiner_for(p, np.eye(p.n)[a], N)
        res = phi.annihilation_residuals()
        out.append(Report("intertwiner-annihilation", max(res.values()), _tol(cfg, 1e-9),
                          {"vector": a, "per_grade": {str(g): r for g, r in res.items()},
                           "rank_margin": phi.rank_margin}))
    return out


def check_factorization(cfg: RunConfig) -> list[Report]:
    p = cfg.params()
    N = 4 if cfg.depth is None else cfg.depth
    out = []
    for a in range(p.n):
        for b in range(p.n):
            c = factorization_check(p, np.eye(p.n)[a], np.eye(p.n)[b], N)
            out.append(Report("factorization", max(c.off_diagonal, c.negative_powers, c.series_defect),
                              _tol(cfg, 1e-10), {"pair": [a, b], "off_diagonal": c.off_diagonal,
                                                 "negative_powers": c.negative_powers,
                                                 "series_defect": c.series_defect}))
    return out


def check_qkz(cfg: RunConfig) -> list[Report]:
    p = cfg.params()
    N = 4 if cfg.depth is None else cfg.depth
    tol = _tol(cfg, 1e-9)
    # order-N coefficients inherit the Gram conditioning of grade N, so the
    # modules are built in extended precision unless told otherwise
    digits = 30 if cfg.digits is None else (cfg.digits or None)
    J = fusion_matrix(p, N, VermaCache(digits))
    R = extract_R_from_qkz(J)
    scale = max(float(np.abs(R[m]).max()) for m in range(R.lo, R.hi + 1))
    wz = max(weight_defect(R[m], p.n) for m in range(R.lo, R.hi + 1)) / scale
    # a second, independent lam: the extracted R must not depend on it
    p2 = p.with_(lam=tuple(np.asarray(p.lam) + 0.137 - 0.061j))
    R2 = extract_R_from_qkz(fusion_matrix(p2, N, VermaCache(digits)))
    two = R.max_abs_diff(R2, 0, min(R.hi, R2.hi)) / scale
    return [Report("qkz", qkz2_residual(J, R), tol, {"equation": "second, with R read off from the first",
                                                      "order": N, "digits": digits}),
            Report("qkz", wz, tol, {"property": "weight-zero"}),
            Report("qkz", two, tol, {"property": "lambda-independence", "lambda2": [[x.real, x.imag]
                                                                                   for x in p2.lam]})]


def check_qdybe(cfg: RunConfig) -> list[Report]:
    p = cfg.params()
    f = ExchangeFactory(p, cfg.N)
    return [verify_qdybe(f, default_samples(cfg.seed, cfg.samples), _tol(cfg, 1e-8))]


def check_category_C(cfg: RunConfig) -> list[Report]:
    p = cfg.params()
    fam = ExchangeFamily(p, cfg.N)
    rep = functor_F(p, fam)
    res = [rll_residual(rep, fam, u, u2) for u, u2, *_ in default_samples(cfg.seed, cfg.samples)]
    return [Report("category-C", max(res), _tol(cfg, 1e-8), {"module": "C^n", "per_sample": res})]


def check_qdybe_cc(cfg: RunConfig) -> list[Report]:
    depth = 2 if cfg.depth is None else cfg.depth
    p, level, X = cfg.central_charge(depth)
    mixed = MixedFactory(p, X)
    finite = ExchangeFactory(p, cfg.N)
    S = default_samples(cfg.seed, cfg.samples)
    rep = verify_qdybe_cc(mixed, finite, S, _tol(cfg, 1e-8))
    rep.details.update({"k": [p.k.real, p.k.imag], "depth": depth})
    return [rep]


def _felder(cfg: RunConfig):
    p = cfg.params()
    dic = felder_dictionary(p)
    return FelderRMatrix(p.n, dic["tau"], dic["eta"]), dic["lam"]


def check_unitarity(cfg: RunConfig) -> list[Report]:
    F, lam = _felder(cfg)
    S = felder_samples(cfg.seed, 20)
    us = [s[0] for s in S]
    tol = _tol(cfg, 1e-9)
    out = [Report("unitarity", unitarity_residual(F, F.n, lam, us), tol, {"matrix": "felder"})]
    # the exchange matrix is unitary up to a scalar function chi(u)
    R = ExchangeFactory(cfg.params(), cfg.N).at()
    worst = 0.0
    for u in us[:cfg.samples]:
        prod = unitarity_product(R, u)
        worst = max(worst, float(np.abs(prod - prod[0, 0] * np.eye(len(prod))).max() / abs(prod[0, 0])))
    out.append(Report("unitarity", worst, tol, {"matrix": "exchange", "up_to": "scalar chi(u)"}))
    return out


def check_periodicity_1(cfg: RunConfig) -> list[Report]:
    R = ExchangeFactory(cfg.params(), cfg.N).at()
    us = [s[0] for s in felder_samples(cfg.seed, 10)]
    return [verify_modular_shift(R, us, _tol(cfg, 1e-8))]


def check_periodicity_2(cfg: RunConfig) -> list[Report]:
    R = ExchangeFactory(cfg.params(), cfg.N).at()
    us = [s[0] for s in felder_samples(cfg.seed, 10)]
    rep = verify_unit_shift(R, us, _tol(cfg, 1e-10))
    # per coefficient: every entry's exponent agrees with the conformal-weight phases mod 1
    left, right = periodicity_phases(R.params)
    E = R.row_exponents()[:, None] - R.col_exponents()[None, :]
    phase = left[:, None] - right[None, :]
    diff = E - phase
    mask = np.abs(R(0.13 + 0.02j)) > 1e-14
    coeff = float(np.abs(diff[mask] - np.round(diff[mask].real)).max())
    return [rep, Report("periodicity-2", coeff, _tol(cfg, 1e-10), {"property": "exponents mod 1 per entry"})]


def check_rll_definition(cfg: RunConfig) -> list[Report]:
    depth = 2 if cfg.depth is None else cfg.depth
    p, level, X = cfg.central_charge(depth)
    rep = functor_Fl(p, X)
    fam = ExchangeFamily(p, cfg.N)
    out = verify_representation(rep, fam, default_samples(cfg.seed, min(cfg.samples, 2)), _tol(cfg, 1e-8))
    dims_ok = rep.graded_dims() == {int(g): d for g, d in zip(*np.unique(X.grade, return_counts=True))}
    out.append(Report("character", 0.0 if dims_ok else 1.0, 0.5, {"graded_dims": rep.graded_dims()}))
    for r in out:
        r.name = f"rll-definition/{r.name}"
    return out


def check_tensor_closure(cfg: RunConfig) -> list[Report]:
    """Two depth-1 images tensored; unit object; strict associativity."""
    depth = 1 if cfg.depth is None else cfg.depth
    p, l1, X = cfg.central_charge(depth, k_range=(13.0, 14.0))
    _, l2, X2 = sample_central_charge(cfg.seed + 100, cfg.n, depth=depth, k_range=(13.0, 14.0))
    Y = highest_weight_module(p, X2.module.lam, l2, depth, 1)
    fam = ExchangeFamily(p, cfg.N)
    A, B = functor_Fl(p, X), functor_Fl(p, Y)
    AB = tensor_product(A, B)
    S = default_samples(cfg.seed, min(cfg.samples, 2))
    tol = _tol(cfg, 1e-8)
    rll = [rll_residual(AB, fam, u, u2) for u, u2, *_ in S]
    u = S[0][0]
    one = trivial_representation(p)
    LA = A(u)
    unit = max(np.abs(tensor_product(A, one)(u) - LA).max(), np.abs(tensor_product(one, A)(u) - LA).max())
    C = functor_F(p, fam)
    X0 = highest_weight_module(p, X2.module.lam, l2, 0, 0)
    B0 = functor_Fl(p, X0)
    L1 = tensor_product(tensor_product(A, B0), C)(u)
    L2 = tensor_product(A, tensor_product(B0, C))(u)
    return [
        Report("tensor-closure", max(rll), tol, {"property": "rll", "per_sample": rll,
                                                 "k": [p.k.real, p.k.imag], "depth": depth}),
        Report("tensor-closure", abs(AB.level - (l1 + l2)), 1e-15, {"property": "central charge"}),
        Report("tensor-closure", float(unit / np.abs(LA).max()), 1e-10, {"property": "unit object"}),
        Report("tensor-closure", float(np.abs(L1 - L2).max() / np.abs(L1).max()), 1e-10,
               {"property": "associativity"}),
    ]


def check_gauge_fit(cfg: RunConfig) -> list[Report]:
    fit = gauge_fit(ExchangeFactory(cfg.params(), cfg.N).at(), tol=_tol(cfg, 1e-6))
    d = fit.to_json()
    return [Report("gauge-fit", max(fit.residual, fit.coefficient_residual), fit.tol,
                   {key: val for key, val in d.items() if key not in ("check", "max_residual", "tol", "passed")})]


def check_felder(cfg: RunConfig) -> list[Report]:
    """QDYBE, unitarity, period 1 and tau quasi-periodicity of the Felder R-matrix."""
    F, lam = _felder(cfg)
    S = felder_samples(cfg.seed, 20)
    us = [s[0] for s in S]
    q = verify_qdybe_numeric(F, F.n, lam, S, _tol(cfg, 1e-9), shift=F.shifted)
    q.name = "felder-qdybe"
    return [q,
            Report("felder-unitarity", unitarity_residual(F, F.n, lam, us), _tol(cfg, 1e-9)),
            Report("felder-period-1", period_residual(F, lam, us), 1e-12),
            Report("felder-period-tau", tau_residual(F, lam, us), _tol(cfg, 1e-8))]


RUNNERS = {
    "relations": check_relations_suite,
    "intertwiner-annihilation": check_annihilation,
    "factorization": check_factorization,
    "qkz": check_qkz,
    "qdybe": check_qdybe,
    "category-C": check_category_C,
    "qdybe-cc": check_qdybe_cc,
    "unitarity": check_unitarity,
    "periodicity-1": check_periodicity_1,
    "periodicity-2": check_periodicity_2,
    "rll-definition": check_rll_definition,
    "tensor-closure": check_tensor_closure,
    "gauge-fit": check_gauge_fit,
}


def run_checks(names, cfg: RunConfig) -> list[Report]:
    out = []
    for name in names:
        if name not in RUNNERS:
            raise KeyError(f"unknown check {name!r}; known: {', '.join(CHECKS)}")
        out.extend(RUNNERS[name](cfg))
    return out


def report_document(command: str, cfg: RunConfig, reports: list[Report], **extra) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": cfg.to_json(),
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        "checks": [r.to_json() for r in reports],
        "passed": all(r.passed for r in reports),
        **extra,
    }


def with_seed(cfg: RunConfig, seed: int) -> RunConfig:
    return replace(cfg, seed=seed)
