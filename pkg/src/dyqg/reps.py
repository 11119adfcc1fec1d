"""Bounded representations of the elliptic quantum group and functors into them.

A representation is a graded space W with finite weights, a central charge l
and an operator L(u, lam, k) on C^n (x) W satisfying the RLL relation

    R^{12}(u - u', lam - h3, k - l) L^{13}(u, lam, k) L^{23}(u', lam - h1, k)
        = L^{23}(u', lam, k) L^{13}(u, lam - h2, k) R^{12}(u - u', lam, k)

with R the dynamical R-matrix on C^n (x) C^n.  Spaces coming from Verma
modules are truncated, so every check is restricted to a window of basis
vectors that the truncation does not reach.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .exchange import ExchangeFactory, Report
from .mixed import FlatModule, MixedFactory, rll_sides, safe_window
from .params import Params, vector_weights
from .intertwine import VermaCache

LFunction = Callable[[complex, np.ndarray, complex], np.ndarray]


class DomainError(ValueError):
    """Raised when k leaves the half-plane on which a representation is defined."""


class ExchangeFamily:
    """R(u, lam, k) on C^n (x) C^n for varying lam and k (same q, n)."""

    def __init__(self, params: Params, N: int = 3, order: int = 60):
        self.params = params
        self.N = N
        self.order = order
        self._factories: dict = {}

    def factory(self, k: complex) -> ExchangeFactory:
        key = complex(np.round(k, 13))
        if key not in self._factories:
            self._factories[key] = ExchangeFactory(self.params.with_(k=k), self.N, self.order)
        return self._factories[key]

    def __call__(self, u: complex, lam, k: complex) -> np.ndarray:
        return self.factory(k).at(tuple(np.atleast_1d(lam)))(u)


@dataclass
class BoundedRepresentation:
    params: Params  # base point (lam, k, q, n)
    level: complex
    weights: np.ndarray  # (dim, n - 1) finite weights of the basis
    grades: np.ndarray  # X-grade of each basis vector (degree is minus the grade)
    L: LFunction
    window: np.ndarray  # basis vectors untouched by truncation
    exponents: Callable[[np.ndarray, complex], np.ndarray] | None = None
    bound: int | None = None  # L[m] v = 0 for m > bound
    domain: float | None = None  # defined for Re k > domain
    label: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def dim(self) -> int:
        return len(self.grades)

    def graded_dims(self) -> dict[int, int]:
        g, c = np.unique(self.grades, return_counts=True)
        return {int(a): int(b) for a, b in zip(g, c)}

    def check_domain(self, k: complex) -> None:
        if self.domain is not None and not complex(k).real > self.domain:
            raise DomainError(f"Re k = {complex(k).real:g} outside Re k > {self.domain:g} for {self.label}")

    def __call__(self, u: complex, lam=None, k: complex | None = None) -> np.ndarray:
        lam = np.asarray(self.params.lam if lam is None else np.atleast_1d(lam), dtype=complex)
        k = self.params.k if k is None else k
        self.check_domain(k)
        return self.L(u, lam, k)

    def full_window(self) -> np.ndarray:
        return np.tile(self.window, self.n)

    def to_json(self) -> dict:
        M = self(0.0)
        return {
            "label": self.label,
            "dim": self.dim,
            "level": [complex(self.level).real, complex(self.level).imag],
            "graded_dims": {str(a): b for a, b in self.graded_dims().items()},
            "bound": self.bound,
            "domain": self.domain,
            "coefficients_at_z1": {"re": M.real.tolist(), "im": M.imag.tolist()},
        }


def _default_domain(n: int) -> float:
    return 1.0 - n


def functor_F(params: Params, family: ExchangeFamily | None = None) -> BoundedRepresentation:
    """Image of the evaluation module C^n(z): L is the dynamical R-matrix itself."""
    family = family or ExchangeFamily(params)
    n = params.n
    return BoundedRepresentation(
        params=params, level=0.0, weights=np.asarray(vector_weights(n), dtype=float),
        grades=np.zeros(n, dtype=int), L=family, window=np.ones(n, dtype=bool),
        domain=_default_domain(n), label="F(C^n)")


def functor_Fl(params: Params, X: FlatModule, width: int = 1, cache: VermaCache | None = None,
               domain: float | None = None) -> BoundedRepresentation:
    """Image of a truncated highest-weight module X of level l.

    L(u, lam, k) is the exchange matrix R_{C^n,X}.  ``width`` sets the window of
    grades on which the truncation is invisible to the RLL relation.
    """
    cache = cache or VermaCache()
    factories: dict = {}

    def factory(k: complex) -> MixedFactory:
        key = complex(np.round(k, 13))
        if key not in factories:
            factories[key] = MixedFactory(params.with_(k=k), X, cache)
        return factories[key]

    def L(u, lam, k):
        return factory(k).at(tuple(lam))(u)

    def exponents(lam, k):
        return factory(k).at(tuple(lam)).exponents()

    window = safe_window(X, width)
    if not window.any():
        raise ValueError(f"empty window for width {width}")
    return BoundedRepresentation(
        params=params, level=X.module.level, weights=np.asarray(X.weight, dtype=complex),
        grades=np.asarray(X.grade, dtype=int), L=L, window=window, exponents=exponents, bound=1,
        domain=_default_domain(params.n) if domain is None else domain,
        label=f"F^l(M_nu,l depth {X.module.depth})", meta={"depth": X.module.depth})


def trivial_representation(params: Params) -> BoundedRepresentation:
    """The unit object: one weight-zero vector of grade zero, level 0, L = identity."""
    n = params.n
    return BoundedRepresentation(
        params=params, level=0.0, weights=np.zeros((1, n - 1)), grades=np.zeros(1, dtype=int),
        L=lambda u, lam, k: np.eye(n, dtype=complex), window=np.ones(1, dtype=bool),
        exponents=lambda lam, k: np.zeros((n, n)), bound=0, label="1")


def _weight_index(n: int, target) -> int:
    wts = np.asarray(vector_weights(n), dtype=complex)
    d = np.abs(wts - np.asarray(target)[None, :]).max(axis=1)
    j = int(np.argmin(d))
    return j if d[j] < 1e-9 else -1


def tensor_product(A: BoundedRepresentation, B: BoundedRepresentation) -> BoundedRepresentation:
    """A (x) B with L = L_A^{12}(u, lam - h3, k - l_B) L_B^{13}(u, lam, k)."""
    if A.n != B.n:
        raise ValueError("tensor factors have different rank")
    n, dA, dB = A.n, A.dim, B.dim
    lB = B.level

    def L(u, lam, k):
        out_A = np.zeros((n * dA * dB, n * dA * dB), dtype=complex)
        for w in range(dB):
            LA = A(u, lam - B.weights[w], k - lB)
            idx = (np.arange(n * dA) * dB + w)
            out_A[np.ix_(idx, idx)] = LA
        LB = B(u, lam, k)
        out_B = np.zeros_like(out_A)
        for v in range(dA):
            idx = ((np.arange(n)[:, None] * dA + v) * dB + np.arange(dB)[None, :]).ravel()
            out_B[np.ix_(idx, idx)] = LB
        return out_A @ out_B

    exponents = None
    if A.exponents is not None and B.exponents is not None:
        def exponents(lam, k):
            # weight zero makes every entry of the product a single monomial
            EB = B.exponents(lam, k)
            E = np.zeros((n * dA * dB,) * 2, dtype=complex)
            wA = np.asarray(A.weights, dtype=complex)
            EAs = [A.exponents(lam - B.weights[w2], k - lB) for w2 in range(dB)]
            for w in range(dB):
                for w2 in range(dB):
                    EA = EAs[w2]
                    for v in range(dA):
                        for v2 in range(dA):
                            for a in range(n):
                                for a2 in range(n):
                                    mid = _weight_index(n, np.asarray(vector_weights(n)[a2]) + wA[v2] - wA[v])
                                    if mid < 0:
                                        continue
                                    r = (a2 * dA + v2) * dB + w2
                                    c = (a * dA + v) * dB + w
                                    E[r, c] = EA[a2 * dA + v2, mid * dA + v] + EB[mid * dB + w2, a * dB + w]
            return E

    weights = (np.asarray(A.weights)[:, None, :] + np.asarray(B.weights)[None, :, :]).reshape(dA * dB, -1)
    grades = (A.grades[:, None] + B.grades[None, :]).ravel()
    window = (A.window[:, None] & B.window[None, :]).ravel()
    if not window.any():
        raise ValueError("tensor factors have no common window")
    domains = [d for d in (A.domain, B.domain) if d is not None]
    return BoundedRepresentation(
        params=A.params, level=A.level + B.level, weights=weights, grades=grades, L=L, window=window,
        exponents=exponents,
        bound=None if A.bound is None or B.bound is None else A.bound + B.bound,
        domain=max(domains) if domains else None, label=f"({A.label} (x) {B.label})")


# ---------------------------------------------------------------------------
# morphisms


@dataclass
class RepMorphism:
    """phi(lam, k): source -> target, commuting with L up to the dynamical shift."""

    source: BoundedRepresentation
    target: BoundedRepresentation
    phi: Callable[[np.ndarray, complex], np.ndarray]


def identity_morphism(rep: BoundedRepresentation) -> RepMorphism:
    return RepMorphism(rep, rep, lambda lam, k: np.eye(rep.dim, dtype=complex))


def zero_morphism(A: BoundedRepresentation, B: BoundedRepresentation) -> RepMorphism:
    return RepMorphism(A, B, lambda lam, k: np.zeros((B.dim, A.dim), dtype=complex))


def tensor_morphisms(f: RepMorphism, g: RepMorphism) -> RepMorphism:
    """(f (x) g)(lam, k) = f(lam - h2, k - l2) (x) g(lam, k)."""
    src = tensor_product(f.source, g.source)
    tgt = tensor_product(f.target, g.target)
    l2 = g.source.level

    def phi(lam, k):
        G = g.phi(lam, k)
        out = np.zeros((tgt.dim, src.dim), dtype=complex)
        for w in range(g.source.dim):
            F = f.phi(lam - g.source.weights[w], k - l2)
            out[:, w::g.source.dim] += np.kron(F, G[:, w:w + 1])
        return out

    return RepMorphism(src, tgt, phi)


def morphism_residual(f: RepMorphism, u: complex, lam=None, k: complex | None = None) -> float:
    """Relative defect of L_W(u) (1 (x) phi(lam - h1)) = (1 (x) phi(lam)) L_V(u) on the windows."""
    V, W = f.source, f.target
    n = V.n
    lam = np.asarray(V.params.lam if lam is None else np.atleast_1d(lam), dtype=complex)
    k = V.params.k if k is None else k
    wts = np.asarray(vector_weights(n), dtype=complex)
    shifted = np.zeros((n * W.dim, n * V.dim), dtype=complex)
    for a in range(n):
        shifted[a * W.dim:(a + 1) * W.dim, a * V.dim:(a + 1) * V.dim] = f.phi(lam - wts[a], k)
    lhs = W(u, lam, k) @ shifted
    rhs = np.kron(np.eye(n), f.phi(lam, k)) @ V(u, lam, k)
    rows, cols = W.full_window(), V.full_window()
    diff = np.abs(lhs - rhs)[np.ix_(rows, cols)]
    scale = max(np.abs(W(u, lam, k)).max() * max(np.abs(f.phi(lam, k)).max(), 1.0), 1e-300)
    # weight-zero condition on phi itself
    ph = f.phi(lam, k)
    mism = np.abs(np.asarray(W.weights)[:, None, :] - np.asarray(V.weights)[None, :, :]).max(axis=2) > 1e-9
    wz = np.abs(ph[mism]).max() if mism.any() else 0.0
    return float(max(diff.max() if diff.size else 0.0, wz) / scale)


def check_morphism(f: RepMorphism, samples, tol: float = 1e-8) -> Report:
    res = [morphism_residual(f, u) for u, *_ in samples]
    return Report("morphism", max(res), tol, {"per_sample": res})


# ---------------------------------------------------------------------------
# defining properties


def rll_residual(rep: BoundedRepresentation, R: LFunction, u: complex, u2: complex,
                 lam=None, k: complex | None = None) -> float:
    n = rep.n
    lam = np.asarray(rep.params.lam if lam is None else np.atleast_1d(lam), dtype=complex)
    k = rep.params.k if k is None else k
    rep.check_domain(k)
    lhs, rhs = rll_sides(R, rep.L, n, np.asarray(rep.weights), rep.level, lam, k, u, u2)
    w = np.tile(rep.window, n * n)
    scale = max(np.abs(lhs[np.ix_(w, w)]).max(), 1e-300)
    return float(np.abs(lhs - rhs)[np.ix_(w, w)].max() / scale)


def weight_zero_defect(rep: BoundedRepresentation, u: complex) -> float:
    """Largest entry of L joining basis vectors of different total weight, relative."""
    n = rep.n
    total = (np.asarray(vector_weights(n), dtype=complex)[:, None, :]
             + np.asarray(rep.weights, dtype=complex)[None, :, :]).reshape(n * rep.dim, -1)
    L = rep(u)
    mism = np.abs(total[:, None, :] - total[None, :, :]).max(axis=2) > 1e-9
    return float(np.abs(L[mism]).max() / np.abs(L).max()) if mism.any() else 0.0


def homogeneity_defect(rep: BoundedRepresentation, u: complex, t: complex = 0.37) -> float:
    """Defect of L(u + t) = L(u) * z_t^E entrywise, i.e. each coefficient has a fixed degree."""
    if rep.exponents is None:
        raise ValueError(f"{rep.label} carries no homogeneous structure")
    E = rep.exponents(np.asarray(rep.params.lam, dtype=complex), rep.params.k)
    L0, L1 = rep(u), rep(u + t)
    pred = L0 * np.exp(2j * np.pi * t * E)
    return float(np.abs(L1 - pred).max() / np.abs(L1).max())


def bound_defect(rep: BoundedRepresentation, u: complex) -> float:
    """Relative size of the entries lowering the grade by more than ``rep.bound``.

    Coefficient L[m] changes the degree by m = g_in - g_out; the bound says
    L[m] v = 0 for m > bound on every vector v.
    """
    if rep.bound is None:
        raise ValueError(f"{rep.label} has no per-vector bound")
    n = rep.n
    g = np.tile(rep.grades, n)
    L = rep(u)
    drop = g[None, :] - g[:, None]
    bad = drop > rep.bound
    return float(np.abs(L[bad]).max() / np.abs(L).max()) if bad.any() else 0.0


def _difference_ratio(rep: BoundedRepresentation, u: complex, lam, k, dl, dk, L0) -> float:
    Lp = rep(u, lam + dl, k + dk)
    Lm = rep(u, lam - dl, k - dk)
    return float(np.abs(Lp + Lm - 2 * L0).max() / max(np.abs(Lp - Lm).max(), 1e-300))


def smoothness_defect(rep: BoundedRepresentation, u: complex, h: float = 1e-3) -> float:
    """Witness of smooth dependence on lam and k from re-solves at nearby parameters.

    For a smooth L the central second difference over the first difference is
    r(h) = c h + O(h^2), so 2 r(h/2) / r(h) -> 1; returns the worst deviation over
    every lam coordinate and k.
    """
    lam = np.asarray(rep.params.lam, dtype=complex)
    k = rep.params.k
    L0 = rep(u, lam, k)
    worst = 0.0
    dirs = [(np.eye(len(lam))[i], 0.0) for i in range(len(lam))] + [(np.zeros(len(lam)), 1.0)]
    for dl, dk in dirs:
        r1 = _difference_ratio(rep, u, lam, k, dl * h, dk * h, L0)
        r2 = _difference_ratio(rep, u, lam, k, dl * h / 2, dk * h / 2, L0)
        if r1 < 1e-9:  # locally linear to working precision
            continue
        worst = max(worst, abs(2 * r2 / r1 - 1))
    return float(worst)


def verify_representation(rep: BoundedRepresentation, R: LFunction, samples, tol: float = 1e-8,
                          smooth_tol: float = 1e-3) -> list[Report]:
    """Weight zero and homogeneity, per-vector bound, RLL on the window, smoothness."""
    us = [s[0] for s in samples]
    reports = [Report("weight-zero", max(weight_zero_defect(rep, u) for u in us), 1e-12, {})]
    if rep.exponents is not None:
        reports.append(Report("homogeneity", max(homogeneity_defect(rep, u) for u in us), 1e-10, {}))
    if rep.bound is not None:
        reports.append(Report("per-vector-bound", max(bound_defect(rep, u) for u in us), 1e-6,
                              {"bound": rep.bound}))
    rll = [rll_residual(rep, R, u, u2) for u, u2, *_ in samples]
    reports.append(Report("rll-definition", max(rll), tol, {"per_sample": rll, "label": rep.label}))
    reports.append(Report("smoothness", smoothness_defect(rep, us[0]), smooth_tol,
                          {"h": 1e-3, "witness": "|2 r(h/2) / r(h) - 1|"}))
    return reports
