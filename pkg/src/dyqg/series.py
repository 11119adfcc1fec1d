"""Truncated Laurent series z^{-offset} * sum_{m=lo}^{hi} A_m z^m with matrix coefficients."""

from __future__ import annotations

import cmath
import json
from dataclasses import dataclass

import numpy as np


class WindowError(ValueError):
    """A requested coefficient lies outside the stored (exact) window."""

    def __init__(self, power, msg=""):
        super().__init__(f"coefficient of z^{power} is not available in the stored window{msg}")
        self.power = power


class SingularLeadingCoefficient(np.linalg.LinAlgError):
    def __init__(self, matrix, cond):
        super().__init__(f"leading coefficient is singular (cond = {cond:.3e})")
        self.matrix = matrix
        self.cond = cond


def _cx(z):
    return [float(np.real(z)), float(np.imag(z))]


@dataclass(frozen=True)
class MatrixSeries:
    """``z^{-offset} * sum_{m=lo}^{hi} coeffs[m - lo] z^m``.

    The series starts at z^lo (coefficients below are zero); coefficients
    above z^hi are unknown and asking for one raises :class:`WindowError`.
    """

    coeffs: np.ndarray
    lo: int = 0
    offset: complex = 0j

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 3:
            raise ValueError("coeffs must have shape (terms, rows, cols)")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "offset", complex(self.offset))
        object.__setattr__(self, "lo", int(self.lo))

    @property
    def hi(self) -> int:
        return self.lo + len(self.coeffs) - 1

    @property
    def shape(self) -> tuple:
        return self.coeffs.shape[1:]

    def __getitem__(self, m: int) -> np.ndarray:
        if m > self.hi:
            raise WindowError(m, f" [{self.lo}, {self.hi}]")
        if m < self.lo:
            return np.zeros(self.shape, dtype=complex)
        return self.coeffs[m - self.lo]

    def get(self, m: int) -> np.ndarray:
        return self[m]

    @classmethod
    def identity(cls, dim: int, lo: int = 0, hi: int = 0, offset: complex = 0) -> MatrixSeries:
        c = np.zeros((hi - lo + 1, dim, dim), dtype=complex)
        if lo <= 0 <= hi:
            c[-lo] = np.eye(dim)
        return cls(c, lo, offset)

    @classmethod
    def from_dict(cls, terms: dict, lo: int, hi: int, shape, offset: complex = 0) -> MatrixSeries:
        c = np.zeros((hi - lo + 1,) + tuple(shape), dtype=complex)
        for m, a in terms.items():
            if lo <= m <= hi:
                c[m - lo] = a
        return cls(c, lo, offset)

    def window(self, lo: int, hi: int) -> MatrixSeries:
        """Restrict to a sub-window; raises if it is not contained in the stored one."""
        if hi > self.hi:
            raise WindowError(hi)
        return MatrixSeries(np.array([self[m] for m in range(lo, hi + 1)]), lo, self.offset)

    def __add__(self, other: MatrixSeries) -> MatrixSeries:
        if abs(self.offset - other.offset) > 1e-14 * max(1, abs(self.offset)):
            raise ValueError("cannot add series with different offsets")
        lo, hi = min(self.lo, other.lo), min(self.hi, other.hi)
        c = np.array([self.get(m) + other.get(m) for m in range(lo, hi + 1)])
        return MatrixSeries(c, lo, self.offset)

    def __sub__(self, other: MatrixSeries) -> MatrixSeries:
        return self + other.scale(-1)

    def scale(self, s: complex) -> MatrixSeries:
        return MatrixSeries(self.coeffs * s, self.lo, self.offset)

    def map(self, fn) -> MatrixSeries:
        """Apply ``fn`` to every coefficient (e.g. conjugation by a constant matrix)."""
        return MatrixSeries(np.array([fn(a) for a in self.coeffs]), self.lo, self.offset)

    def rescale_variable(self, s: complex) -> MatrixSeries:
        """Integer-power part of the substitution z -> s z (offset factor left out)."""
        pw = np.array([s ** m for m in range(self.lo, self.hi + 1)])
        return MatrixSeries(self.coeffs * pw[:, None, None], self.lo, self.offset)

    def evaluate(self, z: complex, logz: complex | None = None) -> np.ndarray:
        logz = cmath.log(z) if logz is None else logz
        acc = np.zeros(self.shape, dtype=complex)
        for a in self.coeffs[::-1]:
            acc = acc * z + a
        return acc * cmath.exp(self.lo * logz - self.offset * logz)

    def max_abs_diff(self, other: MatrixSeries, lo: int | None = None, hi: int | None = None) -> float:
        lo = max(self.lo, other.lo) if lo is None else lo
        hi = min(self.hi, other.hi) if hi is None else hi
        return max((float(np.max(np.abs(self[m] - other[m]))) for m in range(lo, hi + 1)),
                   default=0.0)

    def to_json(self) -> dict:
        return {
            "offset": _cx(self.offset),
            "lo": self.lo,
            "hi": self.hi,
            "shape": list(self.shape),
            "coeffs": [[[_cx(x) for x in row] for row in a] for a in self.coeffs],
        }

    @classmethod
    def from_json(cls, d: dict) -> MatrixSeries:
        c = np.array(d["coeffs"], dtype=float)
        c = c[..., 0] + 1j * c[..., 1]
        c = c.reshape((d["hi"] - d["lo"] + 1,) + tuple(d["shape"]))
        return cls(c, d["lo"], complex(*d["offset"]))

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def series_mul(a: MatrixSeries, b: MatrixSeries, window: tuple | None = None) -> MatrixSeries:
    """Product a*b; offsets add.

    The default window is the largest one on which every coefficient is
    exact. Requesting a larger window raises :class:`WindowError`.
    """
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"shape mismatch: {a.shape} x {b.shape}")
    exact_hi = min(a.hi + b.lo, a.lo + b.hi)
    lo, hi = (a.lo + b.lo, exact_hi) if window is None else window
    if hi > exact_hi:
        raise WindowError(exact_hi + 1, f": product exact only up to z^{exact_hi}")
    out = np.zeros((hi - lo + 1, a.shape[0], b.shape[1]), dtype=complex)
    for m in range(lo, hi + 1):
        for i in range(max(a.lo, m - b.hi), min(a.hi, m - b.lo) + 1):
            out[m - lo] += a.coeffs[i - a.lo] @ b.coeffs[m - i - b.lo]
    return MatrixSeries(out, lo, a.offset + b.offset)


def series_invert(a: MatrixSeries, cond_bound: float = 1e12) -> MatrixSeries:
    """Inverse with window [-lo, -lo + (hi - lo)] and negated offset."""
    a0 = a.coeffs[0]
    if a0.shape[0] != a0.shape[1]:
        raise ValueError("only square series can be inverted")
    cond = np.linalg.cond(a0)
    if not np.isfinite(cond) or cond > cond_bound:
        raise SingularLeadingCoefficient(a0, cond)
    inv0 = np.linalg.inv(a0)
    terms = len(a.coeffs)
    out = np.zeros_like(a.coeffs)
    out[0] = inv0
    for m in range(1, terms):
        acc = np.zeros_like(a0)
        for j in range(1, m + 1):
            acc += a.coeffs[j] @ out[m - j]
        out[m] = -inv0 @ acc
    return MatrixSeries(out, -a.lo, -a.offset)


@dataclass(frozen=True)
class BiSeries:
    """``x^{-ox} y^{-oy} sum C[i, j] x^i y^j`` over the box [0, nx) x [0, ny)."""

    coeffs: np.ndarray  # (nx, ny, rows, cols)
    ox: complex = 0j
    oy: complex = 0j

    @property
    def shape(self):
        return self.coeffs.shape[2:]

    @property
    def orders(self):
        return self.coeffs.shape[:2]

    def at_y0(self) -> MatrixSeries:
        return MatrixSeries(self.coeffs[:, 0], 0, self.ox)

    def at_x0(self) -> MatrixSeries:
        return MatrixSeries(self.coeffs[0, :], 0, self.oy)

    def evaluate(self, x: complex, y: complex) -> np.ndarray:
        nx, ny = self.orders
        xp = x ** np.arange(nx)
        yp = y ** np.arange(ny)
        return np.einsum("i,j,ijab->ab", xp, yp, self.coeffs) * x ** (-self.ox) * y ** (-self.oy)

    def __matmul__(self, other: BiSeries) -> BiSeries:
        nx = min(self.orders[0], other.orders[0])
        ny = min(self.orders[1], other.orders[1])
        out = np.zeros((nx, ny, self.shape[0], other.shape[1]), dtype=complex)
        for i in range(nx):
            for j in range(ny):
                for a in range(i + 1):
                    for b in range(j + 1):
                        out[i, j] += self.coeffs[a, b] @ other.coeffs[i - a, j - b]
        return BiSeries(out, self.ox + other.ox, self.oy + other.oy)


def series_in_x(s: MatrixSeries, ny: int) -> BiSeries:
    """Embed a one-variable series in x (lo >= 0) into the (x, y) box."""
    if s.lo < 0:
        raise WindowError(s.lo)
    nx = s.hi + 1
    out = np.zeros((nx, ny) + s.shape, dtype=complex)
    for m in range(s.lo, nx):
        out[m, 0] = s[m]
    return BiSeries(out, s.offset, 0)
