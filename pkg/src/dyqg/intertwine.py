"""Intertwining operators, quantum correlation functions and fusion matrices.

For ``v`` of weight ``nu`` in C^n the intertwiner
``Phi: M_{lam,k} -> M_{lam - nu,k} (x) z^{-Delta} V[z, 1/z]`` is fixed by the
singular vector ``Phi(x_lam) = sum_g X_g z^{g - Delta}`` with
``X_g in (grade-g part of M_{lam-nu}) (x) V`` and ``X_0 = x_{lam-nu} (x) v + ...``.
Grade by grade, ``Delta(E_i) = E_i (x) K_i + 1 (x) E_i`` must kill it:

    (E_i (x) K_i) X_g + (1 (x) E_i) X_g = 0                (i >= 1)
    (E_0 (x) K_0) X_g + (1 (x) E_0) X_{g-1} = 0            (E_0 carries z)
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import EvaluationModule
from .params import Params, ParameterError, cartan_finite, delta_k, vector_weights
from .series import BiSeries, MatrixSeries
from .verma import TruncatedVermaModule, build_verma


class IntertwinerError(ArithmeticError):
    """The grade-by-grade system is rank deficient or needs a deeper truncation."""


@dataclass
class Intertwiner:
    """Singular-vector data of Phi^v_{lam,k}: coefficient tables per grade.

    ``coeffs[g][a]`` is ``(block key, vector)``: the component of X_g along
    the basis vector e_a of V, in coordinates of the target Verma block.
    """

    params: Params  # source (lam, k)
    target: TruncatedVermaModule
    v: np.ndarray
    weight: tuple
    delta: complex
    N: int
    coeffs: list = field(default_factory=list)
    rank_margin: float = 0.0

    def leading(self) -> np.ndarray:
        """<Phi> = <x*_mu, Phi(x_lam)> as a vector in V."""
        out = np.zeros(len(self.v), dtype=complex)
        for a, (key, vec) in self.coeffs[0].items():
            if key == self.target.top:
                out[a] = vec[0]
        return out

    def annihilation_residuals(self) -> dict:
        """Relative residual of the E_i-annihilation equations per grade."""
        out = {}
        for g in range(self.N + 1):
            terms = [t for i in range(self.params.n) for t in _equation_terms(self, g, i)]
            scale = max((s for _, s in terms), default=1.0)
            worst = max((float(np.max(np.abs(val))) for val, _ in terms), default=0.0)
            out[g] = worst / max(scale, 1e-300)
        return out


def component_block(target: TruncatedVermaModule, weight, a: int, g: int):
    """Block of M_{lam - nu} paired with e_a at grade g, or None if empty."""
    n = target.n
    wts = vector_weights(n)
    diff = np.asarray(wts[a], dtype=float) - np.asarray(weight, dtype=float)
    cfin = np.linalg.solve(cartan_finite(n), diff) + g
    cint = np.rint(cfin).astype(int)
    if np.max(np.abs(cfin - cint)) > 1e-9:
        raise ParameterError("weight of v is not an integral weight of C^n")
    if np.any(cint < 0):
        return None
    return (g,) + tuple(int(c) for c in cint)


def _slots(phi: Intertwiner, g: int, require=True):
    target = phi.target
    slots = []
    for a in range(phi.params.n):
        key = component_block(target, phi.weight, a, g)
        if key is None:
            continue
        if not target.has(key):
            if not require:
                continue
            raise IntertwinerError(f"block {key} needed at grade {g} is outside the truncation "
                                   f"(depth {target.depth}, margin {target.margin})")
        slots.append((a, key))
    return slots


def _equation_terms(phi: Intertwiner, g: int, i: int):
    """(residual, scale) pairs of the grade-g equation for E_i, using stored coefficients."""
    V = EvaluationModule(phi.params)
    target = phi.target
    kv = np.diag(V.matrix("K", i))
    ev = V.matrix("E", i)
    acc = {}
    scale = {}

    def add(a, key, vec):
        if key in acc.get(a, {}):
            acc[a][key] = acc[a][key] + vec
        else:
            acc.setdefault(a, {})[key] = vec
        scale[(a, key)] = max(scale.get((a, key), 0.0), float(np.max(np.abs(vec))))

    for a, (key, vec) in phi.coeffs[g].items():
        if key[i] > 0:
            add(a, key[:i] + (key[i] - 1,) + key[i + 1:], target.E[(i, key)] @ vec * kv[a])
    src = g - 1 if i == 0 else g
    if src >= 0:
        for a, (key, vec) in phi.coeffs[src].items():
            for a2 in np.nonzero(ev[:, a])[0]:
                add(int(a2), key, ev[a2, a] * vec)
    return [(val, scale[(a, key)]) for a, d in acc.items() for key, val in d.items()]


def solve_intertwiner(params: Params, target: TruncatedVermaModule, v, N: int,
                      rank_rtol: float = 1e-11) -> Intertwiner:
    """Solve for Phi^v_{lam,k} with M_{lam - wt(v)} = ``target`` through grade N."""
    n = params.n
    v = np.asarray(v, dtype=complex)
    wts = vector_weights(n)
    support = [a for a in range(n) if abs(v[a]) > 0]
    if not support:
        raise ParameterError("leading vector must be nonzero")
    weight = wts[support[0]]
    if any(wts[a] != weight for a in support):
        raise ParameterError("leading vector must be a weight vector")
    if N > target.depth:
        raise IntertwinerError(f"Verma depth {target.depth} is smaller than series order {N}")
    mu = np.asarray(params.lam) - np.asarray(weight)
    if np.max(np.abs(np.asarray(target.lam) - mu)) > 1e-12 or abs(target.level - params.k) > 1e-12:
        raise ParameterError("target Verma module has the wrong highest weight")
    delta = delta_k(params.lam, params.k, n) - delta_k(mu, params.k, n)
    phi = Intertwiner(params, target, v, weight, delta, N)
    V = EvaluationModule(params)
    margin = np.inf
    for g in range(N + 1):
        slots = _slots(phi, g)
        fixed = {}
        unknown = []
        for a, key in slots:
            if g == 0 and key == target.top:
                fixed[a] = (key, np.array([v[a]]))
            else:
                unknown.append((a, key))
        offsets = {}
        pos = 0
        for a, key in unknown:
            offsets[a] = (pos, target.dim(key))
            pos += target.dim(key)
        # rows: (i, a_out, key_out)
        rows = {}
        mats = []

        def row(i, a, key):
            tag = (i, a, key)
            if tag not in rows:
                rows[tag] = (sum(target.dim(t[2]) for t in rows), target.dim(key))
            return rows[tag]

        entries = []  # (rowtag, column offset or None for constant, block matrix or vector)
        for i in range(n):
            kv = np.diag(V.matrix("K", i))
            ev = V.matrix("E", i)
            for a, key in slots:
                if key[i] > 0:
                    out = key[:i] + (key[i] - 1,) + key[i + 1:]
                    entries.append(((i, a, out), a, target.E[(i, key)] * kv[a]))
            if i == 0:
                for a, (key, vec) in (phi.coeffs[g - 1].items() if g > 0 else []):
                    for a2 in np.nonzero(ev[:, a])[0]:
                        entries.append(((i, int(a2), key), None, ev[a2, a] * vec))
            else:
                for a, key in slots:
                    for a2 in np.nonzero(ev[:, a])[0]:
                        entries.append(((i, int(a2), key), a, ev[a2, a] * np.eye(target.dim(key))))
        for tag, _, _ in entries:
            row(*tag)
        nrows = sum(d for _, d in rows.values())
        A = np.zeros((nrows, pos), dtype=complex)
        b = np.zeros(nrows, dtype=complex)
        for tag, col, blk in entries:
            r0, rd = rows[tag]
            if col is None:
                b[r0:r0 + rd] -= blk
            elif col in fixed:
                b[r0:r0 + rd] -= blk @ fixed[col][1]
            else:
                c0, cd = offsets[col]
                A[r0:r0 + rd, c0:c0 + cd] += blk
        table = dict(fixed)
        if pos:
            sv = np.linalg.svd(A, compute_uv=False)
            ratio = sv[-1] / sv[0] if sv[0] > 0 else 0.0
            if len(sv) < pos or ratio < rank_rtol:
                raise IntertwinerError(f"rank-deficient intertwiner system at grade {g} "
                                       f"(singular value ratio {ratio:.2e}); parameters not generic")
            margin = min(margin, ratio)
            x = np.linalg.lstsq(A, b, rcond=None)[0]
            for a, key in unknown:
                c0, cd = offsets[a]
                table[a] = (key, x[c0:c0 + cd])
        phi.coeffs.append(table)
    phi.rank_margin = float(margin)
    return phi


def dense_intertwiner_oracle(params: Params, target: TruncatedVermaModule, v, N: int) -> list:
    """All grades at once from one dense system (no grade recursion).

    Unknowns are the coordinates of every slot up to grade N; equations are
    all E_i-annihilation conditions plus the normalisation <Phi> = v.
    """
    n = params.n
    v = np.asarray(v, dtype=complex)
    wts = vector_weights(n)
    weight = wts[int(np.argmax(np.abs(v)))]
    V = EvaluationModule(params)
    cols = {}
    pos = 0
    for g in range(N + 1):
        for a in range(n):
            key = component_block(target, weight, a, g)
            if key is not None and target.has(key):
                cols[(g, a)] = (key, pos)
                pos += target.dim(key)
    eqs = []
    for g in range(N + 1):
        for i in range(n):
            kv = np.diag(V.matrix("K", i))
            ev = V.matrix("E", i)
            out = {}
            for (gg, a), (key, c0) in cols.items():
                if gg == g and key[i] > 0:
                    okey = key[:i] + (key[i] - 1,) + key[i + 1:]
                    out.setdefault((a, okey), []).append((c0, target.E[(i, key)] * kv[a]))
                if gg == (g - 1 if i == 0 else g):
                    for a2 in np.nonzero(ev[:, a])[0]:
                        out.setdefault((int(a2), key), []).append(
                            (c0, ev[a2, a] * np.eye(target.dim(key))))
            for (a, okey), blocks in out.items():
                rowblk = np.zeros((target.dim(okey), pos), dtype=complex)
                for c0, blk in blocks:
                    rowblk[:, c0:c0 + blk.shape[1]] += blk
                eqs.append((rowblk, np.zeros(target.dim(okey), dtype=complex)))
    for a in range(n):
        if (0, a) in cols and cols[(0, a)][0] == target.top:
            r = np.zeros((1, pos), dtype=complex)
            r[0, cols[(0, a)][1]] = 1
            eqs.append((r, np.array([v[a]])))
    A = np.vstack([e[0] for e in eqs])
    b = np.concatenate([e[1] for e in eqs])
    x = np.linalg.lstsq(A, b, rcond=None)[0]
    table = [dict() for _ in range(N + 1)]
    for (g, a), (key, c0) in cols.items():
        table[g][a] = (key, x[c0:c0 + target.dim(key)])
    return table


# ---------------------------------------------------------------------------
# correlation functions


def top_projection(module: TruncatedVermaModule, low_top_h, v, N: int, z: complex | None = None) -> dict:
    """T(b) = <x*_low (x) 1, Phi^v(b)> for every basis vector b of ``module``.

    Uses T(F_i u) = q^{-h_i(low top)} F_i^V T(u) and T(x_top) = v. Returns
    block key -> matrix whose columns are T(b). Without ``z`` the z-powers are
    dropped (a block of grade g carries z^{-g}); with ``z`` the generators act
    on V(z) and the powers are included.
    """
    params = module.params
    V = EvaluationModule(params)
    out = {module.top: np.asarray(v, dtype=complex).reshape(-1, 1)}
    for key in sorted(module.blocks_, key=lambda c: (sum(c), c)):
        if key == module.top or key[0] > N:
            continue
        blk = module.block(key)
        cols = []
        for i, idx, sc in blk.basis:
            src = key[:i] + (key[i] - 1,) + key[i + 1:]
            fac = sc * params.qpow(-low_top_h[i])
            cols.append(fac * (V.matrix("F", i, 1.0 if z is None else z) @ out[src][:, idx]))
        out[key] = np.array(cols).T
    return out


def verma_top_h(params: Params, lam, k) -> np.ndarray:
    lam = np.asarray(lam, dtype=complex)
    return np.concatenate([[k - lam.sum()], lam])


@dataclass
class CorrelationFunction:
    """Psi^{v,w}(z1, z2) = z1^{-D1} z2^{-D2} sum_m F_m (z2/z1)^m, values in V (x) W."""

    table: BiSeries  # coefficient of z1^{-i} z2^{j}, i.e. box (i, j)
    series: MatrixSeries  # F(x), x = z2/z1
    delta1: complex
    delta2: complex
    v: np.ndarray
    w: np.ndarray


class VermaCache:
    """Truncated Verma modules keyed by (lam, k, depth, margin).

    ``digits`` selects the extended-precision construction for every module.
    """

    def __init__(self, digits: int | None = None):
        self._store = {}
        self.digits = digits

    def get(self, params: Params, depth: int, margin: int = 1) -> TruncatedVermaModule:
        key = (tuple(np.round(np.asarray(params.lam), 14)), complex(np.round(params.k, 14)),
               params.q, depth, margin)
        if key not in self._store:
            self._store[key] = build_verma(params, depth, margin, digits=self.digits)
        return self._store[key]


_DEFAULT_CACHE = VermaCache()


def intertwiner_for(params: Params, v, N: int, cache: VermaCache | None = None) -> Intertwiner:
    cache = cache or _DEFAULT_CACHE
    v = np.asarray(v, dtype=complex)
    wts = vector_weights(params.n)
    weight = wts[int(np.argmax(np.abs(v)))]
    target = cache.get(params.shifted(weight), N, 1)
    return solve_intertwiner(params, target, v, N)


def correlation_series(params: Params, v, w, N: int, cache: VermaCache | None = None) -> CorrelationFunction:
    """Psi^{v,w}_{lam,k}(z1, z2) for v, w weight vectors of C^n."""
    n = params.n
    v = np.asarray(v, dtype=complex)
    w = np.asarray(w, dtype=complex)
    wts = vector_weights(n)
    mu = wts[int(np.argmax(np.abs(v)))]
    nu = wts[int(np.argmax(np.abs(w)))]
    phi_w = intertwiner_for(params, w, N, cache)
    mid = phi_w.target
    lam = np.asarray(params.lam)
    low = lam - np.asarray(nu) - np.asarray(mu)
    T = top_projection(mid, verma_top_h(params, low, params.k), v, N)
    d1 = delta_k(lam - np.asarray(nu), params.k, n) - delta_k(low, params.k, n)
    d2 = delta_k(lam, params.k, n) - delta_k(lam - np.asarray(nu), params.k, n)
    coeffs = np.zeros((N + 1, N + 1, n * n, 1), dtype=complex)
    for g in range(N + 1):
        acc = np.zeros(n * n, dtype=complex)
        for a, (key, vec) in phi_w.coeffs[g].items():
            ea = np.zeros(n)
            ea[a] = 1
            acc += np.kron(T[key] @ vec, ea)
        coeffs[g, g, :, 0] = acc
    table = BiSeries(coeffs, d1, -d2)
    series = MatrixSeries(coeffs[np.arange(N + 1), np.arange(N + 1)], 0, 0)
    return CorrelationFunction(table, series, d1, d2, v, w)


@dataclass
class FactorizationCheck:
    table: np.ndarray  # coefficient of z1^{-i} z2^{j}, wrapped FFT indices
    off_diagonal: float  # relative size of boxes with i != j
    negative_powers: float  # relative size of boxes with i < 0 or j < 0
    series_defect: float  # diagonal against the stored series


def factorization_check(params: Params, v, w, N: int, points: int | None = None,
                        cache: VermaCache | None = None) -> FactorizationCheck:
    """Two-variable Laurent table of z1^{D1} z2^{D2} Psi by sampling on |z1| = |z2| = 1.

    The first intertwiner is evaluated with the affine generator acting on V(z1)
    at each sample, so the z1-dependence is computed rather than assumed.
    """
    n = params.n
    M = points or 2 * N + 6
    v = np.asarray(v, dtype=complex)
    w = np.asarray(w, dtype=complex)
    wts = vector_weights(n)
    mu = wts[int(np.argmax(np.abs(v)))]
    nu = wts[int(np.argmax(np.abs(w)))]
    phi_w = intertwiner_for(params, w, N, cache)
    low = np.asarray(params.lam) - np.asarray(nu) - np.asarray(mu)
    low_h = verma_top_h(params, low, params.k)
    roots = np.exp(2j * np.pi * np.arange(M) / M)
    vals = np.zeros((M, M, n * n), dtype=complex)  # [s, t] at z1 = roots[s], z2 = roots[t]
    for s_, z1 in enumerate(roots):
        T = top_projection(phi_w.target, low_h, v, N, z=z1)
        for g in range(N + 1):
            acc = np.zeros(n * n, dtype=complex)
            for a, (key, vec) in phi_w.coeffs[g].items():
                acc += np.kron(T[key] @ vec, np.eye(n)[a])
            vals[s_] += acc[None, :] * roots[:, None] ** g
    # coefficient of z1^{-i} z2^{j}: average of f z1^{i} z2^{-j}
    table = np.fft.fft(np.fft.ifft(vals, axis=0), axis=1) / M
    scale = max(np.abs(table).max(), 1e-300)
    idx = np.arange(M)
    signed = np.where(idx <= M // 2, idx, idx - M)
    off = np.abs(table[signed[:, None] != signed[None, :]]).max() / scale
    neg = np.abs(table[(signed[:, None] < 0) | (signed[None, :] < 0)]).max() / scale
    series = correlation_series(params, v, w, N, cache).series
    diag = np.array([table[m, m] for m in range(N + 1)])
    sdef = np.abs(diag - series.coeffs[:N + 1, :, 0]).max() / scale
    return FactorizationCheck(table, float(off), float(neg), float(sdef))


@dataclass
class FusionMatrix:
    """J(z1, z2) = F(z2/z1) . diag(z1^{-delta1} z2^{-delta2}) on V (x) W (finite case).

    Column c = a * dim W + b is the image of e_a (x) e_b.
    """

    params: Params
    series: MatrixSeries
    delta1: np.ndarray
    delta2: np.ndarray
    flavor: str = "ff"
    meta: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.series.shape[0]

    def weight_defect(self) -> float:
        """Largest entry linking different total weights (zero for a weight map)."""
        n = self.params.n
        tot = tensor_weights(n)
        worst = 0.0
        for m in range(self.series.lo, self.series.hi + 1):
            c = self.series[m]
            for r in range(c.shape[0]):
                for s in range(c.shape[1]):
                    if tot[r] != tot[s]:
                        worst = max(worst, abs(c[r, s]))
        return worst


def tensor_weights(n: int) -> list:
    wts = vector_weights(n)
    return [tuple(np.add(wts[a], wts[b])) for a in range(n) for b in range(n)]


def fusion_matrix(params: Params, N: int, cache: VermaCache | None = None) -> FusionMatrix:
    """Fusion matrix (qKZ twist) of C^n (x) C^n through order N."""
    n = params.n
    cols = np.zeros((N + 1, n * n, n * n), dtype=complex)
    d1 = np.zeros(n * n, dtype=complex)
    d2 = np.zeros(n * n, dtype=complex)
    for a in range(n):
        for b in range(n):
            psi = correlation_series(params, np.eye(n)[a], np.eye(n)[b], N, cache)
            c = a * n + b
            cols[:, :, c] = psi.series.coeffs[:, :, 0]
            d1[c], d2[c] = psi.delta1, psi.delta2
    return FusionMatrix(params, MatrixSeries(cols, 0, 0), d1, d2)
