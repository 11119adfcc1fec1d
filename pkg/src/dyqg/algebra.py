"""U_q(affine sl_n): presentation, evaluation modules and relation checking."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .params import Params, cartan_affine, vector_weights

GENERATORS = ("E", "F")


@dataclass(frozen=True)
class AlgebraPresentation:
    """Chevalley data of U_q(affine sl_n) with degree operator d."""

    n: int = 2

    @property
    def cartan(self) -> np.ndarray:
        return cartan_affine(self.n)

    @property
    def labels(self) -> list[str]:
        out = []
        for i in range(self.n):
            out += [f"E{i}", f"F{i}", f"K{i}"]
        return out + ["q^c", "d"]


def qbinom(params: Params, m: int, r: int) -> complex:
    def fact(j):
        out = 1.0 + 0j
        for t in range(1, j + 1):
            out *= params.qnum(t)
        return out

    return fact(m) / (fact(r) * fact(m - r))


@dataclass(frozen=True)
class EvaluationModule:
    """The vector representation C^n with the affine node acting through D_z.

    Basis e_1..e_n; ``E_i = E_{i,i+1}``, ``F_i = E_{i+1,i}`` for i >= 1,
    ``E_0 = E_{n,1}``, ``F_0 = E_{1,n}``, ``K_0 = (K_1...K_{n-1})^{-1}`` and
    q^c = 1. The twist table records the power of z carried by each generator.
    """

    params: Params
    blocks: dict = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "blocks", {None: self.params.n})

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def dim(self) -> int:
        return self.params.n

    @cached_property
    def weights(self) -> list[tuple[int, ...]]:
        return vector_weights(self.n)

    @cached_property
    def twist(self) -> dict:
        tw = {(g, i): 0 for g in ("E", "F", "K") for i in range(self.n)}
        tw[("E", 0)] = 1
        tw[("F", 0)] = -1
        return tw

    def h_values(self, a: int) -> np.ndarray:
        """Eigenvalues of h_0..h_{n-1} on e_a (level 0)."""
        w = np.array(self.weights[a], dtype=float)
        return np.concatenate([[-w.sum()], w])

    @cached_property
    def _mats(self) -> dict:
        n = self.n
        mats = {}
        for i in range(n):
            e = np.zeros((n, n), dtype=complex)
            f = np.zeros((n, n), dtype=complex)
            if i == 0:
                e[n - 1, 0] = 1
                f[0, n - 1] = 1
            else:
                e[i - 1, i] = 1
                f[i, i - 1] = 1
            mats[("E", i)] = e
            mats[("F", i)] = f
            mats[("K", i)] = np.diag([self.params.qpow(self.h_values(a)[i]) for a in range(n)])
        return mats

    def matrix(self, kind: str, i: int, z: complex = 1.0) -> np.ndarray:
        """Matrix of a generator on V(z)."""
        return self._mats[(kind, i)] * z ** self.twist[(kind, i)]

    # module protocol used by check_relations
    def act(self, kind, i, key):
        return None, self._mats[(kind, i)]

    def k_action(self, i, key):
        return self._mats[("K", i)]

    def d_action(self, key):
        return None

    def with_zeroed(self, kind: str, i: int) -> _PatchedModule:
        return _PatchedModule(self, {(kind, i)})


class _PatchedModule:
    """A module with some generators replaced by zero (negative controls)."""

    def __init__(self, base, zeroed):
        self.base = base
        self.zeroed = set(zeroed)
        self.blocks = base.blocks
        self.params = base.params

    def act(self, kind, i, key):
        res = self.base.act(kind, i, key)
        if res is None or (kind, i) not in self.zeroed:
            return res
        tkey, mat = res
        return tkey, np.zeros_like(mat)

    def k_action(self, i, key):
        return self.base.k_action(i, key)

    def d_action(self, key):
        return self.base.d_action(key)


_ZERO = object()


def _apply(module, word, key):
    """Apply a word of generators (first letter acts first) to a block.

    Returns (target_key, matrix), ``_ZERO`` for an exactly vanishing result,
    or None when some intermediate block is not stored.
    """
    cur_key, mat = key, None
    for kind, i in word:
        if cur_key is _ZERO:
            return _ZERO
        if kind == "K":
            step_key, step = cur_key, module.k_action(i, cur_key)
        elif kind == "d":
            step = module.d_action(cur_key)
            if step is None:
                return None
            step_key = cur_key
        else:
            res = module.act(kind, i, cur_key)
            if res is None:
                return None
            step_key, step = res
            if step_key is _ZERO:
                return _ZERO
        mat = step if mat is None else step @ mat
        cur_key = step_key
    return cur_key, mat


def _combine(module, terms, key):
    """Evaluate a linear combination of words on a block; None if unknown."""
    total = None
    for coeff, word in terms:
        res = _apply(module, word, key)
        if res is None:
            return None
        if res is _ZERO:
            continue
        _, mat = res
        total = coeff * mat if total is None else total + coeff * mat
    return 0.0 if total is None else total


@dataclass
class RelationReport:
    residuals: dict
    tol: float

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_residual < self.tol

    def to_json(self) -> dict:
        return {"residuals": self.residuals, "max_residual": self.max_residual,
                "tol": self.tol, "passed": self.passed}


def _norm(x) -> float:
    return float(np.max(np.abs(x))) if np.size(x) else 0.0


def check_relations(module, tol: float = 1e-10) -> RelationReport:
    """Max residual of every defining relation over the stored blocks.

    Relations whose evaluation leaves the stored truncation are skipped.
    Residuals are relative to the size of the largest term involved.
    """
    params = module.params
    n = params.n
    a = cartan_affine(n)
    qq = params.q - 1 / params.q
    res = {"K-conjugation": 0.0, "commutator": 0.0, "serre-E": 0.0, "serre-F": 0.0,
           "d-grading": 0.0}

    def record(name, value, scale):
        if value is None:
            return
        rel = _norm(value) / max(1.0, scale)
        res[name] = max(res[name], rel)

    for key in module.blocks:
        for i in range(n):
            for j in range(n):
                for kind, sgn in (("E", 1), ("F", -1)):
                    # K_i X_j K_i^{-1} = q^{+-a_ij} X_j
                    lhs = _apply(module, [(kind, j), ("K", i)], key)
                    rhs = _apply(module, [("K", i), (kind, j)], key)
                    if lhs not in (None, _ZERO) and rhs not in (None, _ZERO):
                        diff = lhs[1] - params.qpow(sgn * a[i, j]) * rhs[1]
                        record("K-conjugation", diff, _norm(lhs[1]))
                terms = [(1.0, [("F", j), ("E", i)]), (-1.0, [("E", i), ("F", j)])]
                val = _combine(module, terms, key)
                if val is not None:
                    scale = max(_norm(_combine(module, [t], key)) for t in terms)
                    if i == j:
                        kmat = module.k_action(i, key)
                        kinv = np.linalg.inv(kmat) if np.ndim(kmat) == 2 else 1 / kmat
                        val = val - (kmat - kinv) / qq
                        scale = max(scale, _norm((kmat - kinv) / qq))
                    record("commutator", val, scale)
                if i != j:
                    m = int(1 - a[i, j])
                    for kind in GENERATORS:
                        terms = []
                        for r in range(m + 1):
                            word = [(kind, i)] * r + [(kind, j)] + [(kind, i)] * (m - r)
                            terms.append(((-1) ** r * qbinom(params, m, r), word))
                        val = _combine(module, terms, key)
                        scales = [_apply(module, w, key) for _, w in terms]
                        scale = max((_norm(s[1]) for s in scales if s not in (None, _ZERO)), default=1.0)
                        record(f"serre-{kind}", val, scale)
            for kind, sign in (("E", 1), ("F", -1)):
                terms = [(1.0, [(kind, i), ("d",)]), (-1.0, [("d",), (kind, i)])]
                terms = [(c, [w if len(w) == 2 else ("d", 0) for w in word]) for c, word in terms]
                val = _combine(module, terms, key)
                if val is None:
                    continue
                target = _apply(module, [(kind, i)], key)
                if target not in (None, _ZERO):
                    expect = sign * target[1] if i == 0 else 0 * target[1]
                    record("d-grading", val - expect, _norm(target[1]))
    return RelationReport({k: float(v) for k, v in res.items()}, tol)
