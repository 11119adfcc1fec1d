"""The odd Jacobi theta function theta(u|tau) = -sum_{j in Z+1/2} e^{pi i tau j^2 + 2 pi i j (u + 1/2)}."""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np


class ThetaConvergenceError(ArithmeticError):
    pass


@dataclass(frozen=True)
class ThetaParams:
    tau: complex
    truncation: int = 40
    tol: float = 1e-14

    def __post_init__(self):
        object.__setattr__(self, "tau", complex(self.tau))
        if self.tau.imag <= 0:
            raise ValueError(f"Im tau must be positive, got tau = {self.tau}")

    @property
    def nome(self) -> complex:
        """e^{pi i tau}."""
        return cmath.exp(1j * cmath.pi * self.tau)


def _theta_sum(u: complex, tau: complex, terms: int) -> complex:
    # j = m + 1/2 for m = -terms .. terms - 1
    j = np.arange(-terms, terms) + 0.5
    return -complex(np.sum(np.exp(1j * np.pi * tau * j * j + 2j * np.pi * j * (u + 0.5))))


def theta(u: complex, tp: ThetaParams) -> complex:
    """theta(u|tau); the self-convergence check compares truncation T and T + 5.

    The argument is first reduced to |Im u| <= Im tau / 2 with the
    quasi-periodicity theta(u + tau) = -e^{-pi i tau - 2 pi i u} theta(u), which
    keeps the series short for any u.
    """
    tau = tp.tau
    u = complex(u)
    shift = round(u.imag / tau.imag)
    v = u - shift * tau
    val = _theta_sum(v, tau, tp.truncation)
    check = _theta_sum(v, tau, tp.truncation + 5)
    if abs(val - check) > tp.tol * max(1.0, abs(check)):
        raise ThetaConvergenceError(f"theta series not converged at truncation {tp.truncation}")
    # theta(v + s tau) = (-1)^s e^{-pi i tau s^2 - 2 pi i s v} theta(v)
    s = shift
    return check * (-1) ** s * cmath.exp(-1j * cmath.pi * tau * s * s - 2j * cmath.pi * s * v)


def theta_direct(u: complex, tau: complex, terms: int = 200) -> complex:
    """Plain summation with ``terms`` half-integers on each side (reference values)."""
    return _theta_sum(complex(u), complex(tau), terms)
