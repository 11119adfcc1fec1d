"""The trigonometric R-matrix of the vector representation of U_q(affine sl_n).

``rmatrix_nullspace`` solves the intertwining condition R Delta = Delta^op R
on W(z2) (x) V(z1) directly; ``rmatrix_closed`` is the explicit n = 2 form.
Both are normalized so that the e_1 (x) e_1 entry equals 1.
"""

from __future__ import annotations

import numpy as np

from .algebra import EvaluationModule
from .params import Params


def flip(n: int, m: int | None = None) -> np.ndarray:
    """Permutation e_a (x) e_b -> e_b (x) e_a from C^n (x) C^m to C^m (x) C^n."""
    m = n if m is None else m
    out = np.zeros((n * m, n * m))
    for a in range(n):
        for b in range(m):
            out[b * n + a, a * m + b] = 1
    return out


def coproduct(V: EvaluationModule, kind: str, i: int, z1: complex, z2: complex) -> np.ndarray:
    """Delta of a generator on V(z1) (x) V(z2).

    Delta(E) = E (x) K + 1 (x) E, Delta(F) = F (x) 1 + K^{-1} (x) F, Delta(K) = K (x) K.
    """
    k = V.matrix("K", i)
    one = np.eye(V.dim)
    if kind == "E":
        return np.kron(V.matrix("E", i, z1), k) + np.kron(one, V.matrix("E", i, z2))
    if kind == "F":
        return np.kron(V.matrix("F", i, z1), one) + np.kron(np.linalg.inv(k), V.matrix("F", i, z2))
    return np.kron(k, k)


def rmatrix_nullspace(params: Params, z2: complex, z1: complex = 1.0) -> np.ndarray:
    """R_{W(z2), V(z1)}: the solution of R Delta(x) = Delta^op(x) R, up to scalar."""
    V = EvaluationModule(params)
    d = V.dim ** 2
    P = flip(V.dim)
    rows = []
    for kind in "EFK":
        for i in range(params.n):
            a = coproduct(V, kind, i, z2, z1)
            aop = P @ coproduct(V, kind, i, z1, z2) @ P
            # column-major vec(R A - Aop R)
            rows.append(np.kron(a.T, np.eye(d)) - np.kron(np.eye(d), aop))
    _, s, vh = np.linalg.svd(np.vstack(rows))
    if s[-2] < 1e-8 * s[0]:
        raise np.linalg.LinAlgError("intertwiner space is not one dimensional (reducible point)")
    r = vh[-1].conj().reshape(d, d, order="F")
    return r / r[0, 0]


def rmatrix21(params: Params, y: complex, closed: bool | None = None) -> np.ndarray:
    """R^{21}_{W,V}(y) on V (x) W with y = z2 / z1, normalized at e_1 (x) e_1."""
    closed = params.n == 2 if closed is None else closed
    r = rmatrix_closed(params, y) if closed else rmatrix_nullspace(params, y)
    P = flip(params.n)
    return P @ r @ P


def rmatrix_closed(params: Params, z2: complex, z1: complex = 1.0) -> np.ndarray:
    """Explicit R_{W(z2), V(z1)} for n = 2 with y = z2 / z1.

    Nonzero entries: 1 on e_a (x) e_a, q^{-1}(1 - y)/(1 - q^{-2} y) on the
    diagonal of the mixed block, (1 - q^{-2})/(1 - q^{-2} y) and
    (1 - q^{-2}) y/(1 - q^{-2} y) off it.
    """
    if params.n != 2:
        raise NotImplementedError("closed form is implemented for n = 2 only")
    y = z2 / z1
    qi2 = params.qpow(-2)
    den = 1 - qi2 * y
    if abs(den) < 1e-14:
        raise ZeroDivisionError(f"pole of the R-matrix at y = q^2 ({y})")
    b = params.qpow(-1) * (1 - y) / den
    r = np.zeros((4, 4), dtype=complex)
    r[0, 0] = r[3, 3] = 1
    r[1, 1] = r[2, 2] = b
    r[1, 2] = (1 - qi2) / den
    r[2, 1] = (1 - qi2) * y / den
    return r


def rmatrix21_series(params: Params, order: int) -> np.ndarray:
    """Taylor coefficients of R^{21}_{W,V}(y) at y = 0, shape (order + 1, d, d)."""
    n = params.n
    d = n * n
    if n == 2:
        qi2 = params.qpow(-2)
        b = params.qpow(-1)
        out = np.zeros((order + 1, 4, 4), dtype=complex)
        for m in range(order + 1):
            geo = qi2 ** m  # coefficient of y^m in 1/(1 - q^{-2} y)
            prev = qi2 ** (m - 1) if m else 0
            r = np.zeros((4, 4), dtype=complex)
            if m == 0:
                r[0, 0] = r[3, 3] = 1
            r[1, 1] = r[2, 2] = b * (geo - prev)
            r[1, 2] = (1 - qi2) * geo
            r[2, 1] = (1 - qi2) * prev
            out[m] = r
        P = flip(2)
        return np.einsum("ij,mjk,kl->mil", P, out, P)
    # generic n: coefficients from samples on a small circle
    radius = 0.25 * min(1.0, abs(params.q) ** 2)
    pts = 4 * (order + 1)
    zs = radius * np.exp(2j * np.pi * np.arange(pts) / pts)
    vals = np.array([rmatrix21(params, z, closed=False) for z in zs])
    coeffs = np.fft.fft(vals, axis=0) / pts
    return np.array([coeffs[m] / radius ** m for m in range(order + 1)]).reshape(order + 1, d, d)


def _qpoch(x: complex, base: complex, tol: float = 1e-17, limit: int = 10000) -> complex:
    """(x; base)_infinity for |base| < 1."""
    acc = 1.0 + 0j
    term = x
    for _ in range(limit):
        acc *= 1 - term
        if abs(term) < tol:
            return acc
        term *= base
    raise ArithmeticError("q-Pochhammer product did not converge")


def universal_scalar(params: Params, y: complex) -> complex:
    """Scalar factor of the universal R on W(z2) (x) V(z1) relative to ``rmatrix21``.

    phi(y) = q^{1/2} (y; q^4)(q^4 y; q^4) / (q^2 y; q^4)^2, n = 2 only.
    """
    if params.n != 2:
        raise NotImplementedError("universal normalization is implemented for n = 2 only")
    q2 = params.qpow(2)
    q4 = q2 * q2
    num = _qpoch(y, q4) * _qpoch(q4 * y, q4)
    den = _qpoch(q2 * y, q4) ** 2
    return params.qpow(0.5) * num / den


def universal_scalar_series(params: Params, order: int) -> np.ndarray:
    """Taylor coefficients of ``universal_scalar`` at y = 0.

    log(phi / phi(0)) = -sum_m (1 - q^{2m})/(1 + q^{2m}) y^m / m.
    """
    log = np.zeros(order + 1, dtype=complex)
    for m in range(1, order + 1):
        qm = params.qpow(2 * m)
        log[m] = -(1 - qm) / (1 + qm) / m
    out = np.zeros(order + 1, dtype=complex)
    out[0] = 1.0
    # exp of a series: m a_m = sum_j j l_j a_{m-j}
    for m in range(1, order + 1):
        out[m] = sum(j * log[j] * out[m - j] for j in range(1, m + 1)) / m
    return params.qpow(0.5) * out


def universal_rmatrix21(params: Params, y: complex) -> np.ndarray:
    """R^{21}_{W,V}(y) with the normalization of the universal R-matrix."""
    return universal_scalar(params, y) * rmatrix21(params, y)


def universal_rmatrix21_series(params: Params, order: int) -> np.ndarray:
    phi = universal_scalar_series(params, order)
    r = rmatrix21_series(params, order)
    return np.array([sum(phi[j] * r[m - j] for j in range(m + 1)) for m in range(order + 1)])
