"""Global parameter pack, weight bookkeeping and generic-parameter sampling."""

from __future__ import annotations

import cmath
import hashlib
import json
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache

import numpy as np


class ParameterError(ValueError):
    """Raised when a parameter pack violates a precondition."""


ROOT_OF_UNITY_BOUND = 64


@lru_cache(maxsize=None)
def cartan_finite(n: int) -> np.ndarray:
    """Cartan matrix of sl_n (size n-1)."""
    c = 2 * np.eye(n - 1)
    for i in range(n - 2):
        c[i, i + 1] = c[i + 1, i] = -1
    c.setflags(write=False)
    return c


@lru_cache(maxsize=None)
def cartan_affine(n: int) -> np.ndarray:
    """Affine Cartan matrix of type A_{n-1}^{(1)}, nodes 0..n-1."""
    if n < 2:
        raise ParameterError("rank n must be >= 2")
    if n == 2:
        a = np.array([[2.0, -2.0], [-2.0, 2.0]])
    else:
        a = 2 * np.eye(n)
        for i in range(n):
            a[i, (i + 1) % n] = a[(i + 1) % n, i] = -1
    a.setflags(write=False)
    return a


@lru_cache(maxsize=None)
def inverse_form(n: int) -> np.ndarray:
    """Gram matrix (omega_i, omega_j) of fundamental weights for (a, b) = tr(ab)."""
    m = np.linalg.inv(cartan_finite(n))
    m.setflags(write=False)
    return m


def pairing(a, b, n: int) -> complex:
    """Invariant pairing of two finite weights given in fundamental coordinates."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    return complex(a @ inverse_form(n) @ b)


def rho(n: int) -> np.ndarray:
    return np.ones(n - 1)


def simple_root(i: int, n: int) -> np.ndarray:
    """Finite part of the affine simple root alpha_i in fundamental coordinates."""
    return np.array(cartan_affine(n)[1:, i], dtype=float)


def delta_k(lam, k: complex, n: int = 2) -> complex:
    """Conformal weight (lam, lam + 2 rho) / (2 (k + n))."""
    if abs(k + n) < 1e-12:
        raise ParameterError(f"critical level k = {-n}: k + h = 0")
    lam = np.asarray(lam, dtype=complex)
    return pairing(lam, lam + 2 * rho(n), n) / (2 * (k + n))


def vector_weights(n: int) -> list[tuple[int, ...]]:
    """Weights of the basis e_1..e_n of C^n in fundamental coordinates."""
    out = []
    for a in range(n):
        w = [0] * (n - 1)
        if a < n - 1:
            w[a] += 1
        if a > 0:
            w[a - 1] -= 1
        out.append(tuple(w))
    return out


@dataclass(frozen=True)
class Params:
    """Parameter pack for one computation.

    ``lam`` holds the weight in fundamental-weight coordinates (n - 1 complex
    numbers). ``p = q^{-2(k + n)}`` is always derived, never stored.
    """

    q: complex = 0.55 + 0.12j
    k: complex = 1.37 + 0.21j
    lam: tuple = (0.413 + 0.171j,)
    n: int = 2
    N: int = 3
    tol: float = 1e-9
    seed: int = 0
    logq: complex | None = None
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        q = complex(self.q)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "k", complex(self.k))
        object.__setattr__(self, "lam", tuple(complex(x) for x in np.atleast_1d(self.lam)))
        if self.logq is None:
            object.__setattr__(self, "logq", cmath.log(q) if q != 0 else 0j)
        else:
            object.__setattr__(self, "logq", complex(self.logq))
        self.validate()

    def validate(self) -> None:
        if self.n < 2:
            raise ParameterError("rank n must be >= 2")
        if len(self.lam) != self.n - 1:
            raise ParameterError(f"lambda must have {self.n - 1} coordinates, got {len(self.lam)}")
        if not 0 < abs(self.q) < 1:
            raise ParameterError(f"|q| must lie in (0, 1), got |q| = {abs(self.q)}")
        if abs(cmath.exp(self.logq) - self.q) > 1e-12 * max(1.0, abs(self.q)):
            raise ParameterError("exp(logq) does not reproduce q")
        for m in range(1, ROOT_OF_UNITY_BOUND + 1):
            if abs(cmath.exp(m * self.logq) - 1) < 1e-10:
                raise ParameterError(f"q is (numerically) a root of unity of order {m}")
        if abs(self.k + self.n) < 1e-12:
            raise ParameterError(f"critical level: k = {-self.n} is excluded")
        if self.N < 0:
            raise ParameterError("series order N must be non-negative")
        if not self.tol > 0:
            raise ParameterError("tol must be positive")

    @property
    def hdual(self) -> int:
        return self.n

    @property
    def p(self) -> complex:
        return cmath.exp(self.logp)

    @property
    def logp(self) -> complex:
        """log p := -2 (k + n) log q (not the principal branch of log of p)."""
        return -2 * (self.k + self.n) * self.logq

    def ppow(self, a):
        """p^a := exp(a log p); accepts arrays."""
        return np.exp(np.asarray(a) * self.logp)

    def qpow(self, a) -> complex:
        """q^a := exp(a log q)."""
        return cmath.exp(complex(a) * self.logq)

    def qnum(self, a) -> complex:
        """Symmetric q-number [a]_q."""
        return (self.qpow(a) - self.qpow(-a)) / (self.q - 1 / self.q)

    def with_(self, **kw) -> Params:
        if "q" in kw and "logq" not in kw:
            kw["logq"] = None
        if "lam" in kw:
            kw["lam"] = tuple(complex(x) for x in np.atleast_1d(kw["lam"]))
        return replace(self, **kw)

    def shifted(self, weight, level: complex = 0) -> Params:
        """Parameters at lam - weight and k - level."""
        lam = np.asarray(self.lam) - np.asarray(weight, dtype=complex)
        return replace(self, lam=tuple(complex(x) for x in lam), k=self.k - level)

    def delta(self, lam=None, k=None) -> complex:
        return delta_k(self.lam if lam is None else lam, self.k if k is None else k, self.n)

    def to_json(self) -> dict:
        d = asdict(self)
        d.pop("extra")
        out = {}
        for key, val in d.items():
            if isinstance(val, complex):
                out[key] = [val.real, val.imag]
            elif isinstance(val, tuple):
                out[key] = [[complex(x).real, complex(x).imag] for x in val]
            else:
                out[key] = val
        return out

    @classmethod
    def from_json(cls, d: dict) -> Params:
        kw = dict(d)
        for key in ("q", "k", "logq"):
            if key in kw and kw[key] is not None:
                kw[key] = complex(*kw[key])
        if "lam" in kw:
            kw["lam"] = tuple(complex(*x) for x in kw["lam"])
        return cls(**kw)

    def config_hash(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def sample_params(seed: int, n: int = 2, N: int = 3, tol: float = 1e-9, **fixed) -> Params:
    """Draw a generic parameter set from a seeded complex box.

    The box keeps |q| away from 0 and 1 and Re k away from the critical
    level, so Gram matrices stay well conditioned at desk-scale depths.
    """
    rng = np.random.default_rng(seed)
    r = rng.uniform(0.45, 0.6)
    q = r * cmath.exp(1j * rng.uniform(0.05, 0.3))
    k = complex(rng.uniform(0.6, 1.8), rng.uniform(-0.3, 0.3))
    lam = tuple(complex(rng.uniform(0.1, 0.7), rng.uniform(-0.3, 0.3)) for _ in range(n - 1))
    kw = dict(q=q, k=k, lam=lam, n=n, N=N, tol=tol, seed=seed)
    kw.update(fixed)
    return Params(**kw)
