"""Exchange matrices of the fusion matrix and the identities they satisfy.

The fusion matrix F(x) is a power series in x = z2/z1 while the exchange
matrix J^{-1} R^{21} J^{21} also needs F at 1/x, so it is never a formal
series. It is evaluated pointwise instead: the Taylor series of F is carried
to high order by the qKZ recursion and continued outside its disc by

    F(x) = R(x) D1 F(x / p) P2^{-1},      |p| > 1,

with R the trigonometric R-matrix of the vector representation.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field

import numpy as np

from .intertwine import FusionMatrix, VermaCache, fusion_matrix, tensor_weights
from .params import Params, ParameterError, delta_k, pairing, rho, vector_weights
from .series import MatrixSeries, series_invert, series_mul
from .trig import flip, rmatrix21, rmatrix21_series, universal_rmatrix21, universal_rmatrix21_series


class ExchangeError(ArithmeticError):
    """The exchange matrix cannot be evaluated at the requested point."""


def qkz_factor_w(params: Params) -> np.ndarray:
    """D1 = q^{2 lam - nu - mu + 2 rho} acting on the second factor (diagonal, row-indexed)."""
    return _qkz_factor(params, slot=1)


def qkz_factor_v(params: Params) -> np.ndarray:
    """D2 = q^{2 lam - nu - mu + 2 rho} acting on the first factor."""
    return _qkz_factor(params, slot=0)


def _qkz_factor(params: Params, slot: int) -> np.ndarray:
    n = params.n
    lam = np.asarray(params.lam)
    wts = vector_weights(n)
    tw = tensor_weights(n)
    vals = []
    for r in range(n * n):
        a, b = divmod(r, n)
        w = wts[b] if slot == 1 else wts[a]
        vals.append(params.qpow(pairing(2 * lam + 2 * rho(n) - np.asarray(tw[r]), w, n)))
    return np.diag(vals)


def extract_R_from_qkz(J: FusionMatrix) -> MatrixSeries:
    """R^{21}(y) = F(y) P2 F(y/p)^{-1} D1^{-1}, read off from the first qKZ equation.

    ``P2 = diag p^{-delta2}`` comes from the z2-power of the columns.
    """
    params = J.params
    p = params.p
    P2 = np.diag(params.ppow(-J.delta2))
    d1inv = np.linalg.inv(qkz_factor_w(params))
    F = J.series
    Fp = F.rescale_variable(1 / p)
    return series_mul(F.map(lambda a: a @ P2), series_invert(Fp)).map(lambda a: a @ d1inv)


def qkz2_residual(J: FusionMatrix, R: MatrixSeries) -> float:
    """Relative residual of the second qKZ equation with an extracted R.

    F(x/p) P1 = D2 R(x)^{-1} F(x) is checked as R(x) D2^{-1} F(x/p) P1 - F(x).
    """
    params = J.params
    P1 = np.diag(params.ppow(-J.delta1))
    d2inv = np.linalg.inv(qkz_factor_v(params))
    F = J.series
    lhs = series_mul(R.map(lambda a: a @ d2inv), F.rescale_variable(1 / params.p).map(lambda a: a @ P1))
    scale = max(float(np.max(np.abs(F[m]))) for m in range(F.lo, lhs.hi + 1))
    return lhs.max_abs_diff(F, 0, lhs.hi) / scale


def weight_defect(mat: np.ndarray, n: int) -> float:
    tw = tensor_weights(n)
    worst = 0.0
    for r in range(mat.shape[0]):
        for c in range(mat.shape[1]):
            if tw[r] != tw[c]:
                worst = max(worst, abs(mat[r, c]))
    return worst


def scalar_ratio(R: MatrixSeries, Rtrig: np.ndarray) -> tuple[MatrixSeries, float]:
    """phi(y) with R = phi Rtrig as series, plus the defect of R - phi Rtrig.

    ``Rtrig`` holds Taylor coefficients (terms, d, d). The ratio is read off
    from the e_1 (x) e_1 entry, where Rtrig = 1.
    """
    T = MatrixSeries(Rtrig[: R.hi + 1], 0)
    phi = R.map(lambda a: a[:1, :1])
    d = R.shape[0]
    recon = series_mul(phi.map(lambda a: a[0, 0] * np.eye(d)), T)
    scale = max(float(np.max(np.abs(R[m]))) for m in range(R.lo, R.hi + 1))
    return phi, recon.max_abs_diff(R) / scale


@dataclass
class ContinuedFusion:
    """High-order Taylor series of the fusion matrix with its qKZ continuation.

    ``coeffs`` satisfy F(p y) P2 = c0 Rtrig(p y) D1 F(y) exactly, with F_0
    taken from the intertwiners. With ``normalization="universal"`` Rtrig
    carries the scalar of the universal R-matrix, c0 = 1, and the result is
    the intertwiner fusion matrix itself. With ``"fitted"`` only the plain
    R-matrix is used and c0 is fitted, so the result agrees with the
    intertwiner one up to a scalar series. :meth:`scalar_defect` measures the
    non-scalar part of the ratio, :meth:`defect` the full difference.
    """

    params: Params
    coeffs: np.ndarray
    delta1: np.ndarray
    delta2: np.ndarray
    c0: complex
    radius: float
    consistency: float  # residual of the order-0 equation
    source: FusionMatrix | None = None
    normalization: str = "fitted"

    def trig(self, y: complex) -> np.ndarray:
        if self.normalization == "universal":
            return universal_rmatrix21(self.params, y)
        return self.c0 * rmatrix21(self.params, y)

    @property
    def dim(self) -> int:
        return self.coeffs.shape[1]

    def _series(self, x: complex) -> np.ndarray:
        acc = np.zeros((self.dim, self.dim), dtype=complex)
        for a in self.coeffs[::-1]:
            acc = acc * x + a
        return acc

    def __call__(self, x: complex) -> np.ndarray:
        p = self.params.p
        d1 = qkz_factor_w(self.params)
        p2inv = np.diag(self.params.ppow(self.delta2))
        steps = 0
        y = x
        while abs(y) > self.radius:
            y = y / p
            steps += 1
            if steps > 200:
                raise ExchangeError("qKZ continuation does not reach the convergence disc")
        out = self._series(y)
        for _ in range(steps):
            y = y * p
            out = self.trig(y) @ d1 @ out @ p2inv
        return out

    def scalar_defect(self) -> float:
        """How far F_cont(y) F_intertwiner(y)^{-1} is from a scalar series."""
        if self.source is None:
            return 0.0
        F = self.source.series
        mine = MatrixSeries(self.coeffs[: F.hi + 1], 0)
        ratio = series_mul(mine, series_invert(F))
        worst = 0.0
        for m in range(ratio.hi + 1):
            a = ratio[m]
            worst = max(worst, float(np.max(np.abs(a - a[0, 0] * np.eye(len(a))))))
        scale = max(float(np.max(np.abs(mine[m]))) for m in range(mine.hi + 1))
        return worst / scale

    def defect(self) -> float:
        """Relative difference to the intertwiner fusion matrix over its known orders."""
        if self.source is None:
            return 0.0
        F = self.source.series
        diff = max(float(np.max(np.abs(self.coeffs[m] - F[m]))) for m in range(F.hi + 1))
        return diff / max(float(np.max(np.abs(F[m]))) for m in range(F.hi + 1))


def continue_fusion(J: FusionMatrix, order: int = 60, normalization: str | None = None) -> ContinuedFusion:
    """Solve F_m P2 - p^{-m} c0 r_0 D1 F_m = c0 sum_{j>=1} p^{j-m} r_j D1 F_{m-j} for m <= order."""
    params = J.params
    p = params.p
    if abs(p) <= 1:
        raise ParameterError("the qKZ continuation needs |p| > 1 (Re(k + n) > 0 with |q| < 1)")
    d1 = qkz_factor_w(params)
    P2 = params.ppow(-J.delta2)
    if normalization is None:
        normalization = "universal" if params.n == 2 else "fitted"
    F0 = J.series[0]
    if normalization == "universal":
        r = universal_rmatrix21_series(params, order)
        c0 = 1.0 + 0j
        base = r[0] @ d1 @ F0
    elif normalization == "fitted":
        r = rmatrix21_series(params, order)
        base = r[0] @ d1 @ F0
        c0 = complex(np.vdot(base.ravel(), (F0 * P2[None, :]).ravel()) / np.vdot(base.ravel(), base.ravel()))
    else:
        raise ValueError(f"unknown normalization {normalization!r}")
    consistency = float(np.max(np.abs(c0 * base - F0 * P2[None, :])))
    d = len(F0)
    out = np.zeros((order + 1, d, d), dtype=complex)
    out[0] = F0
    B = [c0 * r[j] @ d1 for j in range(order + 1)]
    logp = params.logp

    def pinv(m):  # p^{-m}, flushed to zero below the double range
        e = -m * logp
        return 0.0 if e.real < -700 else cmath.exp(e)

    # divided by p^m so only non-positive powers of p appear
    for m in range(1, order + 1):
        rhs = sum(pinv(m - j) * (B[j] @ out[m - j]) for j in range(1, m + 1))
        for c in range(d):
            mat = P2[c] * np.eye(d) - pinv(m) * B[0]
            out[m][:, c] = np.linalg.solve(mat, rhs[:, c])
    radius = 0.5 * abs(params.q) ** 2
    return ContinuedFusion(params, out, J.delta1, J.delta2, c0, radius, consistency, J, normalization)


@dataclass
class DynamicalRMatrix:
    """R_{V,W}(u, lam, k) = J^{-1} R^{21} J^{21} for V = W = C^n, evaluated pointwise.

    ``R(u) = e^{2 pi i u D1} G(e^{2 pi i u}) e^{-2 pi i u D2'}`` with G
    single valued; ``exponents`` holds D1(row) - D2'(col).
    """

    params: Params
    fusion: object  # callable x -> matrix (the continued fusion matrix)
    delta1: np.ndarray
    delta2: np.ndarray
    level_shift: complex = 0
    meta: dict = field(default_factory=dict)
    trig: object = None  # callable y -> R^{21}(y); defaults to the vector representation

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def lam(self):
        return self.params.lam

    def row_exponents(self) -> np.ndarray:
        return np.asarray(self.delta1)

    def col_exponents(self) -> np.ndarray:
        P = flip(self.n)
        return P @ np.asarray(self.delta2)

    def G(self, z: complex) -> np.ndarray:
        P = flip(self.n)
        trig = self.trig or (lambda y: rmatrix21(self.params, y))
        Finv = np.linalg.inv(self.fusion(1 / z))
        return Finv @ trig(1 / z) @ P @ self.fusion(z) @ P

    def __call__(self, u: complex) -> np.ndarray:
        z = cmath.exp(2j * cmath.pi * u)
        left = np.exp(2j * np.pi * u * self.row_exponents())
        right = np.exp(-2j * np.pi * u * self.col_exponents())
        return left[:, None] * self.G(z) * right[None, :]

    def two_point(self, u1: complex, u2: complex) -> np.ndarray:
        """J(u1, u2)^{-1} R^{21}(e^{2 pi i(u2 - u1)}) J^{21}(u2, u1) without using u = u1 - u2."""
        P = flip(self.n)
        z1 = cmath.exp(2j * cmath.pi * u1)
        z2 = cmath.exp(2j * cmath.pi * u2)
        trig = self.trig or (lambda y: rmatrix21(self.params, y))
        d1, d2 = np.asarray(self.delta1), np.asarray(self.delta2)
        J = self.fusion(z2 / z1) * np.exp(-2j * np.pi * (d1 * u1 + d2 * u2))[None, :]
        Jrev = self.fusion(z1 / z2) * np.exp(-2j * np.pi * (d1 * u2 + d2 * u1))[None, :]
        return np.linalg.solve(J, trig(z2 / z1) @ P @ Jrev @ P)

    def laurent(self, radius: float = 1.0, terms: int = 64) -> MatrixSeries:
        """Laurent coefficients of G on |z| = radius (window [-terms/2, terms/2 - 1])."""
        zs = radius * np.exp(2j * np.pi * np.arange(terms) / terms)
        vals = np.array([self.G(z) for z in zs])
        c = np.fft.fft(vals, axis=0) / terms
        half = terms // 2
        ms = list(range(-half, half))
        out = np.array([c[m % terms] / radius ** m for m in ms])
        return MatrixSeries(out, -half, 0)


def identity_fusion(n: int):
    d = n * n
    return lambda x: np.eye(d, dtype=complex)


class ExchangeFactory:
    """Builds exchange matrices at shifted weights, sharing Verma modules."""

    def __init__(self, params: Params, N: int = 3, order: int = 60, cache: VermaCache | None = None):
        self.params = params
        self.N = N
        self.order = order
        self.cache = cache or VermaCache()
        self._store = {}

    def at(self, lam=None, level_shift: complex = 0) -> DynamicalRMatrix:
        lam = self.params.lam if lam is None else tuple(complex(x) for x in np.atleast_1d(lam))
        key = (tuple(np.round(lam, 13)), level_shift)
        if key not in self._store:
            p = self.params.with_(lam=lam, k=self.params.k - level_shift)
            self._store[key] = exchange_matrix(fusion_matrix(p, self.N, self.cache), order=self.order)
        return self._store[key]


def exchange_matrix(J: FusionMatrix, order: int = 60, fusion=None) -> DynamicalRMatrix:
    """R_{V,W} from a fusion matrix; ``fusion`` overrides the continued one (plumbing checks)."""
    params = J.params
    if fusion is None:
        cont = continue_fusion(J, order)
        meta = {"c0": cont.c0, "consistency": cont.consistency, "scalar_defect": cont.scalar_defect(),
                "defect": cont.defect(), "normalization": cont.normalization}
        # the continuation and the middle factor must share one scalar normalization
        return DynamicalRMatrix(params, cont, J.delta1, J.delta2, meta=meta, trig=cont.trig)
    return DynamicalRMatrix(params, fusion, J.delta1, J.delta2)


def shifted_lambda(lam, weight) -> tuple:
    return tuple(complex(x) for x in np.asarray(lam) - np.asarray(weight))


def _slot_weights(n: int, slots: int, pos: int) -> list:
    """Weight of the ``pos``-th tensor factor for every basis vector of (C^n)^{(x) slots}."""
    wts = vector_weights(n)
    out = []
    for idx in range(n ** slots):
        digits = np.unravel_index(idx, (n,) * slots)
        out.append(wts[digits[pos]])
    return out


def _embed(mat: np.ndarray, n: int, i: int, j: int) -> np.ndarray:
    """Place a two-site operator on sites (i, j) of (C^n)^{(x)3}."""
    d = n ** 3
    out = np.zeros((d, d), dtype=complex)
    for r in range(d):
        rr = np.unravel_index(r, (n,) * 3)
        for c in range(d):
            cc = np.unravel_index(c, (n,) * 3)
            k = 3 - i - j
            if rr[k] != cc[k]:
                continue
            out[r, c] = mat[rr[i] * n + rr[j], cc[i] * n + cc[j]]
    return out


def _dynamical(factory_at, n: int, u: complex, pair: tuple, shift_slot: int | None) -> np.ndarray:
    """R^{ij}(u, lam - h^{(s)}) on (C^n)^{(x)3}: block-wise in the basis vector e_a of slot s.

    ``factory_at(a)`` returns R as a function of u at the weight shifted by
    e_a (``a = None``: unshifted).
    """
    i, j = pair
    d = n ** 3
    if shift_slot is None:
        return _embed(factory_at(None)(u), n, i, j)
    out = np.zeros((d, d), dtype=complex)
    for a in range(n):
        proj = np.zeros((d, d))
        for idx in range(d):
            if np.unravel_index(idx, (n,) * 3)[shift_slot] == a:
                proj[idx, idx] = 1
        out += proj @ _embed(factory_at(a)(u), n, i, j)
    return out


@dataclass
class Report:
    name: str
    residual: float
    tol: float
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.residual < self.tol)

    def to_json(self) -> dict:
        return {"check": self.name, "max_residual": self.residual, "tol": self.tol,
                "passed": self.passed, **self.details}


def qdybe_residual(Rat, n: int, u1: complex, u2: complex, u3: complex) -> float:
    """Relative QDYBE residual; ``Rat(a)`` is R(., lam - h) for h the weight of e_a."""
    lhs = (_dynamical(Rat, n, u1 - u2, (0, 1), 2) @ _dynamical(Rat, n, u1 - u3, (0, 2), None)
           @ _dynamical(Rat, n, u2 - u3, (1, 2), 0))
    rhs = (_dynamical(Rat, n, u2 - u3, (1, 2), None) @ _dynamical(Rat, n, u1 - u3, (0, 2), 1)
           @ _dynamical(Rat, n, u1 - u2, (0, 1), None))
    return float(np.max(np.abs(lhs - rhs)) / max(np.max(np.abs(lhs)), 1e-300))


def default_samples(seed: int, count: int = 6) -> list:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        re = rng.uniform(-0.5, 0.5, 3)
        im = rng.uniform(-0.08, 0.08, 3)
        out.append(tuple(complex(a, b) for a, b in zip(re, im)))
    return out


def verify_qdybe(factory: ExchangeFactory, samples=None, tol: float = 1e-8) -> Report:
    """Quantum dynamical Yang-Baxter equation for R_k(u, lam) at sampled (u1, u2, u3)."""
    lam = factory.params.lam
    samples = samples or default_samples(factory.params.seed)

    wts = vector_weights(factory.params.n)

    def Rat(a):
        return factory.at(None if a is None else shifted_lambda(lam, wts[a]))

    res = [qdybe_residual(Rat, factory.params.n, *s) for s in samples]
    return Report("qdybe", max(res), tol, {"samples": len(samples), "per_sample": res})


def unitarity_product(R: DynamicalRMatrix, u: complex) -> np.ndarray:
    P = flip(R.n)
    return R(u) @ P @ R(-u) @ P


def unitarity_factor(R: DynamicalRMatrix, u: complex, tol: float = 1e-9) -> complex:
    """chi(u) with R(u) R^{21}(-u) = chi(u); raises if the product is not scalar."""
    prod = unitarity_product(R, u)
    chi = prod[0, 0]
    defect = np.max(np.abs(prod - chi * np.eye(len(prod)))) / max(abs(chi), 1e-300)
    if defect > tol:
        raise ExchangeError(f"R(u) R^21(-u) is not scalar (defect {defect:.3e})")
    return complex(chi)


def periodicity_phases(params: Params) -> tuple[np.ndarray, np.ndarray]:
    """Left and right exponents of the u -> u + 1 law, from conformal weights alone.

    Left (row a (x) b): Delta(lam - h2) - Delta(lam - h1 - h2); right (column
    a (x) b): Delta(lam) - Delta(lam - h1).
    """
    n = params.n
    lam = np.asarray(params.lam)
    wts = vector_weights(n)
    left, right = [], []
    for a in range(n):
        for b in range(n):
            h1, h2 = np.asarray(wts[a]), np.asarray(wts[b])
            left.append(delta_k(lam - h2, params.k, n) - delta_k(lam - h1 - h2, params.k, n))
            right.append(delta_k(lam, params.k, n) - delta_k(lam - h1, params.k, n))
    return np.array(left), np.array(right)


def verify_unit_shift(R: DynamicalRMatrix, samples, tol: float = 1e-10) -> Report:
    left, right = periodicity_phases(R.params)
    worst = 0.0
    for u in samples:
        lhs = R(u + 1)
        rhs = np.exp(2j * np.pi * left)[:, None] * R(u) * np.exp(-2j * np.pi * right)[None, :]
        worst = max(worst, float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(lhs))))
    return Report("periodicity-2", worst, tol, {"samples": len(samples)})


def modular_shift(params: Params) -> complex:
    """-(i / pi)(k + n) log q: the shift taking z = e^{2 pi i u} to z / p."""
    return -1j / np.pi * (params.k + params.n) * params.logq


def verify_modular_shift(R: DynamicalRMatrix, samples, tol: float = 1e-8) -> Report:
    """R(u + s) = chi(u)^{-1} R(u) with s the modular shift and chi from unitarity."""
    s = modular_shift(R.params)
    worst = 0.0
    chis = []
    for u in samples:
        chi = unitarity_factor(R, u)
        chis.append(chi)
        lhs = R(u + s)
        worst = max(worst, float(np.max(np.abs(lhs - R(u) / chi)) / np.max(np.abs(lhs))))
    return Report("periodicity-1", worst, tol, {"chi": [[c.real, c.imag] for c in chis], "shift": [s.real, s.imag]})
