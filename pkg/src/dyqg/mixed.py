"""Exchange matrices between C^n and a highest weight module X of level l.

X is a truncated Verma module M_{nu,l}. Three pieces enter
``R(u) = J(u)^{-1} P Runiv(u) J*(u + l log q / 2 pi i) P``:

* ``J``: v (x) w -> <x*, Phi^v(z) Phi^w x_lam>. Phi^w: M_{lam,k} -> M_{lam-nu_w,k-l} (x) X
  has a finite singular vector (blocks c <= key(w)), so J lowers the X grade
  and is exact on the truncation.
* ``J*``: w (x) v -> <x*, Phi^w Phi^v(z) x_lam>, built from the level-k
  intertwiner of C^n. It raises the X grade, so this is where the truncation
  depth matters.
* ``Runiv``: the universal R-matrix on X (x) V(z), generated from its value on
  the highest vector by the F-relations. It lowers the X grade and acts on
  functions of z through z -> q^l z.

Every operator is homogeneous: a matrix element from X grade h to h' carries
z^{h' - h} on top of the conformal-weight exponents, so pointwise values are
obtained by conjugating constant matrices with diag(z^grade).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import EvaluationModule
from .exchange import ExchangeFactory, Report
from .intertwine import VermaCache, intertwiner_for, top_projection, verma_top_h
from .params import Params, delta_k, pairing, sample_params, vector_weights
from .trig import flip
from .verma import TruncatedVermaModule, build_verma


class MixedError(ArithmeticError):
    """An equation of the mixed construction is inconsistent beyond tolerance."""


@dataclass
class FlatModule:
    """A truncated Verma module with one global basis index."""

    module: TruncatedVermaModule
    keys: list
    offsets: dict
    dim: int
    grade: np.ndarray
    weight: np.ndarray  # finite weight per basis vector
    h: np.ndarray  # h_0..h_{n-1} eigenvalues per basis vector
    F: list
    E: list

    def block(self, key) -> slice:
        o = self.offsets[key]
        return slice(o, o + self.module.dim(key))

    def weights(self) -> list:
        """Distinct finite weights, as tuples."""
        return sorted({tuple(np.round(w, 12)) for w in self.weight}, key=lambda t: [x.real for x in t])


def flatten(module: TruncatedVermaModule) -> FlatModule:
    n = module.n
    keys = sorted((k for k in module.blocks_ if module.dim(k)), key=lambda c: (sum(c), c))
    offsets = {}
    pos = 0
    for key in keys:
        offsets[key] = pos
        pos += module.dim(key)
    grade = np.zeros(pos, dtype=int)
    weight = np.zeros((pos, n - 1), dtype=complex)
    h = np.zeros((pos, n), dtype=complex)
    for key in keys:
        s = slice(offsets[key], offsets[key] + module.dim(key))
        grade[s] = key[0]
        weight[s] = module.finite_weight(key)
        h[s] = module.block(key).h
    F = [np.zeros((pos, pos), dtype=complex) for _ in range(n)]
    E = [np.zeros((pos, pos), dtype=complex) for _ in range(n)]
    for key in keys:
        for i in range(n):
            tgt = key[:i] + (key[i] + 1,) + key[i + 1:]
            if tgt in offsets and (i, key) in module.F and module.F[(i, key)].size:
                F[i][offsets[tgt]:offsets[tgt] + module.dim(tgt),
                     offsets[key]:offsets[key] + module.dim(key)] = module.F[(i, key)]
            if key[i] > 0:
                src = key[:i] + (key[i] - 1,) + key[i + 1:]
                if src in offsets:
                    E[i][offsets[src]:offsets[src] + module.dim(src),
                         offsets[key]:offsets[key] + module.dim(key)] = module.E[(i, key)]
    return FlatModule(module, keys, offsets, pos, grade, weight, h, F, E)


def highest_weight_module(params: Params, nu, level: complex, depth: int, margin: int = 1) -> FlatModule:
    """Truncated M_{nu, level} (same q and n as ``params``)."""
    p = params.with_(lam=tuple(complex(x) for x in np.atleast_1d(nu)), k=level)
    return flatten(build_verma(p, depth, margin))


# ---------------------------------------------------------------------------
# Phi^w for w in X


@dataclass
class MixedIntertwiner:
    """Singular vectors of Phi^w for all w in one block ``key`` of X.

    ``coeffs[c]`` has shape (dim M'(c), dim X(key - c), dim X(key)); the last
    index runs over w.
    """

    target: TruncatedVermaModule  # M_{lam - nu_w, k - l}
    key: tuple
    coeffs: dict
    residual: float


def _sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def solve_mixed_intertwiner(params: Params, X: FlatModule, key, target: TruncatedVermaModule) -> MixedIntertwiner:
    """Solve Delta(E_i) Y = 0 block by block; Y at the top block is x (x) w."""
    n = params.n
    Xm = X.module
    dw = Xm.dim(key)
    coeffs = {target.top: np.eye(dw, dtype=complex)[None, :, :]}
    worst = 0.0
    cs = [c for c in target.blocks_ if target.dim(c) and all(a <= b for a, b in zip(c, key))]
    for c in sorted(cs, key=lambda c: (sum(c), c)):
        if c == target.top:
            continue
        xk = _sub(key, c)
        dx = Xm.dim(xk)
        if dx == 0:
            continue
        lhs, rhs = [], []
        for i in range(n):
            if c[i] == 0:
                continue
            prev = c[:i] + (c[i] - 1,) + c[i + 1:]
            qh = params.qpow(Xm.block(xk).h[i])
            lhs.append(qh * target.E[(i, c)])
            r = np.zeros((target.dim(prev), dx, dw), dtype=complex)
            up = xk[:i] + (xk[i] + 1,) + xk[i + 1:]
            if prev in coeffs and Xm.dim(up):
                r = -np.einsum("xy,myw->mxw", Xm.E[(i, up)], coeffs[prev])
            rhs.append(r.reshape(r.shape[0], -1))
        A = np.vstack(lhs)
        B = np.vstack(rhs)
        sol, *_ = np.linalg.lstsq(A, B, rcond=None)
        res = np.max(np.abs(A @ sol - B)) if B.size else 0.0
        scale = max(float(np.max(np.abs(B))) if B.size else 0.0, 1e-300)
        worst = max(worst, float(res / scale) if scale > 1e-300 else 0.0)
        coeffs[c] = sol.reshape(target.dim(c), dx, dw)
    return MixedIntertwiner(target, key, coeffs, worst)


# ---------------------------------------------------------------------------
# universal R on X (x) V(z)


@dataclass
class UniversalR:
    """Runiv on X (x) V(z): index x * n + a; entry (out, in) carries z^{grade(out) - grade(in)}.

    Acting on a function of z it also substitutes z -> shift * z (shift = q^l).
    """

    matrix: np.ndarray
    shift: complex
    e_residual: float
    triangular_defect: float


def universal_r(params: Params, X: FlatModule) -> UniversalR:
    n = params.n
    V = EvaluationModule(params)
    Xm = X.module
    d = X.dim * n
    s = params.qpow(Xm.level)
    nu = np.asarray(Xm.lam)
    wts = vector_weights(n)
    R = np.zeros((d, d), dtype=complex)
    Fv = [V.matrix("F", i) for i in range(n)]
    Kv = [np.diag(V.matrix("K", i)) for i in range(n)]
    eye_x = np.eye(X.dim)
    for b in range(n):
        R[b, b] = params.qpow(pairing(nu, wts[b], n))
    for key in X.keys:
        if key == Xm.top:
            continue
        for j, (i, idx, sc) in enumerate(Xm.block(key).basis):
            src = key[:i] + (key[i] - 1,) + key[i + 1:]
            xs = X.offsets[src] + idx
            x = X.offsets[key] + j
            kinv = params.qpow(-Xm.block(src).h[i])
            op = np.kron(eye_x, Fv[i]) + np.kron(X.F[i], np.diag(1 / Kv[i]))
            fshift = s ** (-1) if i == 0 else 1.0
            for a in range(n):
                col = op @ R[:, xs * n + a]
                for a2 in np.nonzero(Fv[i][:, a])[0]:
                    col = col - fshift * kinv * Fv[i][a2, a] * R[:, xs * n + a2]
                R[:, x * n + a] = sc * col
    # checks: E-relations and upper triangularity in the X key
    Ev = [V.matrix("E", i) for i in range(n)]
    worst = 0.0
    for i in range(n):
        es = s if i == 0 else 1.0
        lhs = R @ np.kron(X.E[i], np.diag(Kv[i])) + es * R @ np.kron(eye_x, Ev[i])
        rhs = np.kron(np.diag(np.exp(X.h[:, i] * params.logq)), Ev[i]) @ R \
            + np.kron(X.E[i], np.eye(n)) @ R
        scale = max(np.max(np.abs(lhs)), np.max(np.abs(rhs)), 1e-300)
        worst = max(worst, float(np.max(np.abs(lhs - rhs)) / scale))
    keys = np.zeros((d, n), dtype=int)
    for key in X.keys:
        sl = X.block(key)
        for xi in range(sl.start, sl.stop):
            keys[xi * n:(xi + 1) * n] = key
    tri = 0.0
    big = np.max(np.abs(R))
    for r, c in zip(*np.nonzero(np.abs(R) > 1e-13 * big)):
        if np.any(keys[r] > keys[c]):
            tri = max(tri, abs(R[r, c]) / big)
    return UniversalR(R, s, worst, tri)


# ---------------------------------------------------------------------------
# twists and the exchange matrix


@dataclass
class MixedTwists:
    """Constant parts of J (on V (x) X) and J* (on X (x) V) with their exponents."""

    params: Params
    X: FlatModule
    J0: np.ndarray
    delta_J: np.ndarray  # per column (b, w): J column carries z^{-delta}
    Jstar0: np.ndarray
    delta_Jstar: np.ndarray  # per column (w, b)
    residual: float  # worst mixed-intertwiner equation residual


def mixed_twists(params: Params, X: FlatModule, level: complex, cache: VermaCache | None = None) -> MixedTwists:
    """J_{V,X}(z, lam, k) and J*_{X,V}(z, lam, k) for V = C^n, X of level ``level``."""
    n = params.n
    cache = cache or VermaCache()
    Xm = X.module
    wts = vector_weights(n)
    lam = np.asarray(params.lam, dtype=complex)
    k = params.k
    D = Xm.depth
    dX = X.dim
    J0 = np.zeros((n * dX, n * dX), dtype=complex)
    dJ = np.zeros(n * dX, dtype=complex)
    S0 = np.zeros((n * dX, n * dX), dtype=complex)
    dS = np.zeros(n * dX, dtype=complex)
    worst = 0.0
    phis = [intertwiner_for(params, np.eye(n)[b], D, cache) for b in range(n)]
    for key in X.keys:
        nu_w = np.asarray(Xm.finite_weight(key))
        tp = params.with_(lam=tuple(lam - nu_w), k=k - level)
        target = cache.get(tp, D, Xm.margin)
        mi = solve_mixed_intertwiner(params, X, key, target)
        worst = max(worst, mi.residual)
        wsl = X.block(key)
        for b in range(n):
            mu = np.asarray(wts[b])
            low = lam - nu_w - mu
            T = top_projection(target, verma_top_h(params, low, k - level), np.eye(n)[b], D)
            delta = delta_k(lam - nu_w, k - level, n) - delta_k(low, k - level, n)
            for c, Y in mi.coeffs.items():
                xs = X.block(_sub(key, c))
                vals = np.einsum("am,mxw->axw", T[c], Y)
                for j in range(Y.shape[2]):
                    col = b * dX + wsl.start + j
                    for a in range(n):
                        J0[a * dX + xs.start:a * dX + xs.stop, col] += vals[a, :, j]
            for j in range(wsl.stop - wsl.start):
                dJ[b * dX + wsl.start + j] = delta
            # J*: Phi^w after Phi^v(z); T^w sends M_{lam-mu,k} block c to X block key + c
            phi = phis[b]
            M = phi.target
            low_h = verma_top_h(params, lam - mu - nu_w, k - level)
            Tw = {M.top: np.eye(wsl.stop - wsl.start, dtype=complex)[:, None, :]}
            for c in sorted(M.blocks_, key=lambda c: (sum(c), c)):
                if c == M.top or not M.dim(c):
                    continue
                xk = tuple(a + b2 for a, b2 in zip(key, c))
                if not Xm.dim(xk):
                    continue
                cols = []
                for i, idx, sc in M.block(c).basis:
                    src = c[:i] + (c[i] - 1,) + c[i + 1:]
                    if src not in Tw:
                        cols = None
                        break
                    xsrc = tuple(a + b2 for a, b2 in zip(key, src))
                    fac = sc * params.qpow(-low_h[i])
                    cols.append(fac * np.einsum("yx,xw->yw", Xm.F[(i, xsrc)], Tw[src][:, idx, :]))
                if cols is None:
                    continue
                Tw[c] = np.stack(cols, axis=1)
            dstar = delta_k(lam, k, n) - delta_k(lam - mu, k, n)
            for g in range(len(phi.coeffs)):
                for a, (c, vec) in phi.coeffs[g].items():
                    if c not in Tw:
                        continue  # beyond the X truncation
                    xk = tuple(a2 + b2 for a2, b2 in zip(key, c))
                    xs = X.block(xk)
                    vals = np.einsum("xmw,m->xw", Tw[c], vec)
                    for j in range(vals.shape[1]):
                        col = (wsl.start + j) * n + b
                        S0[np.arange(xs.start, xs.stop) * n + a, col] += vals[:, j]
            for j in range(wsl.stop - wsl.start):
                dS[(wsl.start + j) * n + b] = dstar
    return MixedTwists(params, X, J0, dJ, S0, dS, worst)


@dataclass
class MixedExchange:
    """R_{C^n,X}(u, lam, k) on C^n (x) X, index a * dim X + x."""

    params: Params
    twists: MixedTwists
    runiv: UniversalR
    level: complex

    @property
    def X(self) -> FlatModule:
        return self.twists.X

    def _grades(self, order: str) -> np.ndarray:
        n = self.params.n
        g = self.X.grade
        return np.repeat(g, n) if order == "XV" else np.tile(g, n)

    def J(self, u: complex) -> np.ndarray:
        g = self._grades("VX")
        z = np.exp(2j * np.pi * u * g)
        return (z[:, None] * self.twists.J0 / z[None, :]) * np.exp(-2j * np.pi * u * self.twists.delta_J)[None, :]

    def Jstar(self, u: complex) -> np.ndarray:
        g = self._grades("XV")
        z = np.exp(2j * np.pi * u * g)
        return (z[:, None] * self.twists.Jstar0 / z[None, :]) * np.exp(-2j * np.pi * u * self.twists.delta_Jstar)[None, :]

    def Runiv(self, u: complex) -> np.ndarray:
        g = self._grades("XV")
        z = np.exp(2j * np.pi * u * g)
        return z[:, None] * self.runiv.matrix / z[None, :]

    def exponents(self) -> np.ndarray:
        """E with R(u)[r, c] = R(0)[r, c] * z^{E[r, c]}, z = exp(2 pi i u)."""
        n = self.params.n
        P = flip(self.X.dim, n)
        g = self._grades("VX")
        row = g + self.twists.delta_J
        col = g + P @ self.twists.delta_Jstar
        return row[:, None] - col[None, :]

    def __call__(self, u: complex) -> np.ndarray:
        n = self.params.n
        P = flip(self.X.dim, n)  # X (x) V -> V (x) X
        us = u + self.level * self.params.logq / (2j * np.pi)
        rhs = P @ self.Runiv(u) @ self.Jstar(us) @ P.T
        return np.linalg.solve(self.J(u), rhs)


class MixedFactory:
    """Mixed exchange matrices at shifted lam for one X, sharing Verma modules."""

    def __init__(self, params: Params, X: FlatModule, cache: VermaCache | None = None):
        self.params = params
        self.X = X
        self.level = X.module.level
        self.cache = cache or VermaCache()
        self.runiv = universal_r(params, X)
        self._store = {}

    def at(self, lam=None) -> MixedExchange:
        lam = self.params.lam if lam is None else tuple(complex(x) for x in np.atleast_1d(lam))
        key = tuple(np.round(lam, 13))
        if key not in self._store:
            p = self.params.with_(lam=lam)
            self._store[key] = MixedExchange(p, mixed_twists(p, self.X, self.level, self.cache),
                                             self.runiv, self.level)
        return self._store[key]


# ---------------------------------------------------------------------------
# Yang-Baxter equation with central charge on C^n (x) C^n (x) X


def _lift13(R: np.ndarray, n: int, dX: int, b: int | None = None) -> np.ndarray:
    """R on (a, x) acting on (a, b, x); restricted to one spectator b if given."""
    out = np.zeros((n * n * dX, n * n * dX), dtype=complex)
    for bb in range(n) if b is None else [b]:
        rows = ((np.arange(n)[:, None] * n + bb) * dX + np.arange(dX)[None, :]).ravel()
        out[np.ix_(rows, rows)] = R
    return out


def _lift23(R: np.ndarray, n: int, dX: int, a: int | None = None) -> np.ndarray:
    out = np.zeros((n * n * dX, n * n * dX), dtype=complex)
    for aa in range(n) if a is None else [a]:
        s = slice(aa * n * dX, (aa + 1) * n * dX)
        out[s, s] = R
    return out


def _lift12(Rfun, n: int, weights: np.ndarray) -> np.ndarray:
    """sum_x Rfun(weight of x) (x) E_xx on (a, b, x)."""
    dX = len(weights)
    out = np.zeros((n * n * dX, n * n * dX), dtype=complex)
    cache = {}
    for x in range(dX):
        w = tuple(np.round(weights[x], 12))
        if w not in cache:
            cache[w] = Rfun(np.asarray(weights[x]))
        idx = np.arange(n * n) * dX + x
        out[np.ix_(idx, idx)] = cache[w]
    return out


@dataclass
class CentralChargeCheck:
    lhs: np.ndarray
    rhs: np.ndarray
    window: np.ndarray  # boolean mask of basis vectors in the safe window

    def residual(self) -> float:
        w = self.window
        diff = np.abs(self.lhs - self.rhs)[np.ix_(w, w)]
        scale = max(np.max(np.abs(self.lhs[np.ix_(w, w)])), 1e-300)
        return float(np.max(diff) / scale)


def rll_sides(R, L, n: int, weights: np.ndarray, level: complex, lam, k: complex,
              u: complex, u2: complex) -> tuple[np.ndarray, np.ndarray]:
    """Both sides of the RLL relation with central charge ``level``.

    LHS  R^{12}(u - u2, lam - h3, k - l) L^{13}(u, lam, k) L^{23}(u2, lam - h1, k)
    RHS  L^{23}(u2, lam, k) L^{13}(u, lam - h2, k) R^{12}(u - u2, lam, k)
    ``R(u, lam, k)`` acts on C^n (x) C^n, ``L(u, lam, k)`` on C^n (x) V with
    basis weights ``weights``.
    """
    lam = np.asarray(lam, dtype=complex)
    dX = len(weights)
    wts = vector_weights(n)
    R12_low = _lift12(lambda nu: R(u - u2, lam - nu, k - level), n, weights)
    R12 = _lift12(lambda nu: R(u - u2, lam, k), n, weights)
    L13 = _lift13(L(u, lam, k), n, dX)
    L23 = _lift23(L(u2, lam, k), n, dX)
    L23_shift = sum(_lift23(L(u2, lam - np.asarray(wts[a]), k), n, dX, a) for a in range(n))
    L13_shift = sum(_lift13(L(u, lam - np.asarray(wts[b]), k), n, dX, b) for b in range(n))
    return R12_low @ L13 @ L23_shift, L23 @ L13_shift @ R12


def safe_window(X: FlatModule, width: int = 1) -> np.ndarray:
    """X basis vectors of grade 0 whose finite F-multiplicities are <= ``width``.

    Truncation only enters through J*, which raises the X grade; matrix
    elements between low vectors are the least affected (measured in tests).
    """
    mask = np.zeros(X.dim, dtype=bool)
    for key in X.keys:
        if key[0] == 0 and max(key[1:], default=0) <= width:
            mask[X.block(key)] = True
    return mask


def qdybe_cc(mixed: MixedFactory, finite: ExchangeFactory, u: complex, u2: complex,
             width: int = 1, low_level: bool = True) -> CentralChargeCheck:
    """Both sides of the Yang-Baxter equation with central charge at (u, u2).

    LHS  R_{k-l}^{12}(u - u2, lam - h3) R^{13}(u, lam) R^{23}(u2, lam - h1)
    RHS  R^{23}(u2, lam) R^{13}(u, lam - h2) R_k^{12}(u - u2, lam)
    ``low_level=False`` uses R_k on the left as well (negative control).
    """
    params = mixed.params
    n = params.n
    shift = mixed.level if low_level else 0

    def R(u_, lam, k):
        return finite.at(tuple(lam), level_shift=params.k - k)(u_)

    def L(u_, lam, k):
        return mixed.at(tuple(lam))(u_)

    lhs, rhs = rll_sides(R, L, n, mixed.X.weight, shift, params.lam, params.k, u, u2)
    return CentralChargeCheck(lhs, rhs, np.tile(safe_window(mixed.X, width), n * n))


def sample_central_charge(seed: int, n: int = 2, depth: int = 2, margin: int = 1,
                          k_range: tuple = (7.0, 8.0)) -> tuple[Params, complex, FlatModule]:
    """Seeded (lam, k, q), a level l and X = M_{nu,l} truncated at ``depth``.

    Re k is drawn from ``k_range``: the truncation error of J* decays like a
    power of |q|^{2 Re(k - l + n)} per grade, so the half-plane must be far
    enough to the right for a depth-2 module (see tests for the measured rates).
    """
    rng = np.random.default_rng(1000 + seed)
    base = sample_params(seed, n=n)
    params = base.with_(k=complex(rng.uniform(*k_range), base.k.imag))
    level = complex(rng.uniform(0.3, 0.8), rng.uniform(-0.2, 0.2))
    nu = tuple(complex(rng.uniform(0.1, 0.7), rng.uniform(-0.3, 0.3)) for _ in range(n - 1))
    return params, level, highest_weight_module(params, nu, level, depth, margin)


def verify_qdybe_cc(mixed: MixedFactory, finite: ExchangeFactory, samples, tol: float = 1e-8,
                    width: int = 1, low_level: bool = True) -> Report:
    res = [qdybe_cc(mixed, finite, u, u2, width, low_level).residual() for u, u2, *_ in samples]
    X = mixed.X.module
    return Report("qdybe-cc", max(res), tol,
                  {"samples": len(samples), "per_sample": res, "depth": X.depth, "margin": X.margin,
                   "window_width": width, "level": [mixed.level.real, mixed.level.imag]})
