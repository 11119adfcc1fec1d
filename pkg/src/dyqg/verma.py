"""Truncated Verma modules built from the contravariant form on F-words.

A block is labelled by the multiplicity vector ``c`` of the F-letters
(``c[0]`` counts F_0, so it is the grade). Block (c) spans the weight
``lambda - sum c_i alpha_i`` at d-eigenvalue ``-Delta - c[0]``.

Blocks are built in order of ``sum(c)``. The candidate spanning set of block
``c`` is ``{F_i b : b in basis(c - e_i)}``; the Gram matrix of the candidates
follows from the lower blocks through

    <F_i b, F_j b'> = <b, F_j E_i b'> + delta_ij [h_i]_q <b, b'>,

a pivoted QR picks a basis, F acts through Gram solves and E by adjointness.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np
import scipy.linalg as sla

from .algebra import _ZERO
from .params import Params, ParameterError, cartan_affine, delta_k


class GramConditioningError(ArithmeticError):
    """A Gram matrix is (numerically) singular: parameters are not generic."""

    def __init__(self, block, cond):
        super().__init__(f"Gram matrix of block {block} is ill conditioned (cond = {cond:.3e}); "
                         "the Verma module is not generic at these parameters")
        self.block = block
        self.cond = cond


@dataclass
class Block:
    key: tuple
    basis: list  # provenance (i, index in block key - e_i, scale) of each basis vector
    gram: np.ndarray
    cond: float
    h: np.ndarray  # eigenvalues of h_0..h_{n-1}
    degree: complex  # d-eigenvalue

    @property
    def dim(self) -> int:
        return len(self.basis)


@dataclass
class TruncatedVermaModule:
    """Blocks ``c`` with ``c[0] <= depth`` and ``c[i] <= depth + margin``."""

    params: Params
    depth: int
    margin: int
    delta: complex
    level: complex
    blocks_: dict = field(default_factory=dict)
    F: dict = field(default_factory=dict)  # (i, c) -> matrix c -> c + e_i
    E: dict = field(default_factory=dict)  # (i, c) -> matrix c -> c - e_i

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def top(self) -> tuple:
        return (0,) * self.n

    @property
    def blocks(self) -> dict:
        return {key: b.dim for key, b in self.blocks_.items()}

    @property
    def lam(self):
        return self.params.lam

    def block(self, key) -> Block:
        return self.blocks_[key]

    def has(self, key) -> bool:
        return key in self.blocks_

    def dim(self, key) -> int:
        b = self.blocks_.get(key)
        return 0 if b is None else b.dim

    def grade_dims(self) -> dict:
        """Total dimension per grade c[0]."""
        out = {}
        for key, b in self.blocks_.items():
            out[key[0]] = out.get(key[0], 0) + b.dim
        return dict(sorted(out.items()))

    def finite_weight(self, key) -> np.ndarray:
        return self.blocks_[key].h[1:]

    # module protocol (see algebra.check_relations)
    def act(self, kind, i, key):
        if kind == "F":
            tgt = _shift(key, i, 1)
            if tgt not in self.blocks_:
                return None
            return tgt, self.F[(i, key)]
        if key[i] == 0:
            return _ZERO, None
        tgt = _shift(key, i, -1)
        return tgt, self.E[(i, key)]

    def k_action(self, i, key):
        b = self.blocks_[key]
        return self.params.qpow(b.h[i]) * np.eye(b.dim)

    def d_action(self, key):
        b = self.blocks_[key]
        return b.degree * np.eye(b.dim)

    def apply(self, word, key, vec):
        """Apply generators (first letter first) to a block vector."""
        for kind, i in word:
            res = self.act(kind, i, key)
            if res is None:
                raise KeyError(f"{kind}{i} leaves the truncation from block {key}")
            key, mat = res
            if key is _ZERO:
                return None, None
            vec = mat @ vec
        return key, vec

    def word_of(self, key, idx) -> tuple:
        """F-word of a basis vector (first entry is the outermost letter).

        The basis vector equals this word applied to x_lambda times the
        product of the recorded scales.
        """
        word = []
        while key != self.top:
            i, idx, _ = self.blocks_[key].basis[idx]
            word.append(i)
            key = _shift(key, i, -1)
        return tuple(word)

    def summary(self) -> dict:
        return {
            "lambda": [[x.real, x.imag] for x in self.lam],
            "level": [self.level.real, self.level.imag],
            "depth": self.depth,
            "margin": self.margin,
            "Delta": [self.delta.real, self.delta.imag],
            "blocks": [
                {"c": list(key), "dim": b.dim, "cond": b.cond,
                 "degree": [b.degree.real, b.degree.imag]}
                for key, b in sorted(self.blocks_.items())
            ],
        }


def _shift(key, i, s):
    key = list(key)
    key[i] += s
    return tuple(key)


def build_verma(params: Params, depth: int, margin: int = 0, cond_bound: float = 1e10,
                rank_rtol: float = 1e-9, digits: int | None = None) -> TruncatedVermaModule:
    """Truncated Verma module M_{lambda,k} at ``params.lam``, ``params.k``.

    With ``digits`` the Gram matrices and generator matrices are computed in
    that many decimal digits and rounded at the end; the basis selection is the
    same as in double precision.
    """
    if depth < 0 or margin < 0:
        raise ParameterError("depth and margin must be non-negative")
    if digits is not None:
        with mp.workdps(digits):
            return _build_verma_mp(params, depth, margin, cond_bound, rank_rtol)
    n = params.n
    a = cartan_affine(n)
    lam = np.asarray(params.lam, dtype=complex)
    top_h = np.concatenate([[params.k - lam.sum()], lam])
    delta = delta_k(lam, params.k, n)
    mod = TruncatedVermaModule(params, depth, margin, delta, params.k)
    bounds = [depth] + [depth + margin] * (n - 1)
    keys = sorted(itertools.product(*[range(b + 1) for b in bounds]), key=lambda c: (sum(c), c))
    for key in keys:
        h = top_h - a @ np.asarray(key, dtype=float)
        degree = -delta - key[0]
        if sum(key) == 0:
            mod.blocks_[key] = Block(key, [], np.ones((1, 1), dtype=complex), 1.0, h, degree)
            mod.blocks_[key].basis = [None]
            continue
        cand = []
        for i in range(n):
            if key[i] > 0:
                cand += [(i, b) for b in range(mod.dim(_shift(key, i, -1)))]
        if not cand:
            continue
        gc = _candidate_gram(mod, key, cand, params)
        # equilibrated so the rank decision is scale free
        sel, scale = _select(gc, rank_rtol)
        if not sel:
            continue
        # basis vectors are rescaled candidates: b_s = scale_s * F_i b'
        scale = scale[sel]
        gc = gc[sel, :] * scale[:, None]
        gram = gc[:, sel] * scale[None, :]
        cond = float(np.linalg.cond(gram))
        if not np.isfinite(cond) or cond > cond_bound:
            raise GramConditioningError(key, cond)
        mod.blocks_[key] = Block(key, [cand[s] + (sc,) for s, sc in zip(sel, scale)], gram, cond,
                                 h, degree)
        coords = np.linalg.solve(gram, gc)
        for i in range(n):
            if key[i] == 0:
                continue
            cols = [t for t, (j, _) in enumerate(cand) if j == i]
            src = _shift(key, i, -1)
            fmat = coords[:, cols]
            mod.F[(i, src)] = fmat
            gsrc = mod.blocks_[src].gram
            mod.E[(i, key)] = np.linalg.solve(gsrc, fmat.T @ gram)
    # F maps into blocks that turned out empty are zero maps
    for key in list(mod.blocks_):
        for i in range(n):
            tgt = _shift(key, i, 1)
            if (i, key) not in mod.F and all(t <= b for t, b in zip(tgt, bounds)):
                mod.F[(i, key)] = np.zeros((0, mod.dim(key)))
    return mod


def _select(gc: np.ndarray, rank_rtol: float):
    """Equilibrated pivoted QR: selected candidate indices and their scales."""
    scale = 1 / np.sqrt(np.maximum(np.abs(np.diag(gc)), 1e-300))
    gs = gc * scale[:, None] * scale[None, :]
    _, r, piv = sla.qr(gs, pivoting=True, mode="economic")
    diag = np.abs(np.diag(r))
    rank = int(np.sum(diag > rank_rtol * diag[0])) if diag.size and diag[0] > 0 else 0
    return sorted(piv[:rank]), scale


def _to_numpy(m) -> np.ndarray:
    return np.array([[complex(m[i, j]) for j in range(m.cols)] for i in range(m.rows)], dtype=complex)


def _build_verma_mp(params: Params, depth: int, margin: int, cond_bound: float,
                    rank_rtol: float) -> TruncatedVermaModule:
    n = params.n
    a = cartan_affine(n)
    lam = np.asarray(params.lam, dtype=complex)
    top_h = np.concatenate([[params.k - lam.sum()], lam])
    mod = TruncatedVermaModule(params, depth, margin, delta_k(lam, params.k, n), params.k)
    logq = mp.mpc(params.logq)
    top_mp = [mp.mpc(params.k) - mp.fsum(mp.mpc(x) for x in params.lam)] + [mp.mpc(x) for x in params.lam]

    def qnum(x):
        return (mp.exp(x * logq) - mp.exp(-x * logq)) / (mp.exp(logq) - mp.exp(-logq))

    def h_mp(key):
        return [top_mp[i] - sum(int(a[i, j]) * key[j] for j in range(n)) for i in range(n)]

    gram_mp, F_mp, E_mp = {}, {}, {}
    bounds = [depth] + [depth + margin] * (n - 1)
    keys = sorted(itertools.product(*[range(b + 1) for b in bounds]), key=lambda c: (sum(c), c))
    for key in keys:
        h = top_h - a @ np.asarray(key, dtype=float)
        degree = -mod.delta - key[0]
        if sum(key) == 0:
            mod.blocks_[key] = Block(key, [None], np.ones((1, 1), dtype=complex), 1.0, h, degree)
            gram_mp[key] = mp.matrix([[1]])
            continue
        offsets, pos = {}, 0
        for i in range(n):
            if key[i] > 0 and _shift(key, i, -1) in gram_mp:
                d = gram_mp[_shift(key, i, -1)].rows
                offsets[i] = (pos, d)
                pos += d
        if not pos:
            continue
        gc = mp.matrix(pos, pos)
        for i, (oi, di) in offsets.items():
            si = _shift(key, i, -1)
            for j, (oj, dj) in offsets.items():
                sj = _shift(key, j, -1)
                inner = mp.matrix(di, dj)
                mid = _shift(sj, i, -1)
                if min(mid) >= 0 and (j, mid) in F_mp and (i, sj) in E_mp:
                    inner += F_mp[(j, mid)] * E_mp[(i, sj)]
                if i == j:
                    inner += qnum(h_mp(si)[i]) * mp.eye(di)
                blk = gram_mp[si] * inner
                for r in range(di):
                    for c in range(dj):
                        gc[oi + r, oj + c] = blk[r, c]
        cand = [(i, b) for i in offsets for b in range(offsets[i][1])]
        sel, scale = _select(_to_numpy(gc), rank_rtol)
        if not sel:
            continue
        rows = mp.matrix(len(sel), pos)
        for r, s_ in enumerate(sel):
            for c in range(pos):
                rows[r, c] = gc[s_, c] * mp.mpf(scale[s_])
        gram = mp.matrix(len(sel), len(sel))
        for r in range(len(sel)):
            for c, s_ in enumerate(sel):
                gram[r, c] = rows[r, s_] * mp.mpf(scale[s_])
        gram_np = _to_numpy(gram)
        cond = float(np.linalg.cond(gram_np))
        if not np.isfinite(cond) or cond > cond_bound:
            raise GramConditioningError(key, cond)
        gram_mp[key] = gram
        mod.blocks_[key] = Block(key, [cand[s_] + (scale[s_],) for s_ in sel], gram_np, cond, h, degree)
        coords = mp.inverse(gram) * rows
        for i, (oi, di) in offsets.items():
            src = _shift(key, i, -1)
            fmat = coords[:, oi:oi + di]
            F_mp[(i, src)] = fmat
            E_mp[(i, key)] = mp.inverse(gram_mp[src]) * (fmat.T * gram)
            mod.F[(i, src)] = _to_numpy(fmat)
            mod.E[(i, key)] = _to_numpy(E_mp[(i, key)])
    for key in list(mod.blocks_):
        for i in range(n):
            tgt = _shift(key, i, 1)
            if (i, key) not in mod.F and all(t <= b for t, b in zip(tgt, bounds)):
                mod.F[(i, key)] = np.zeros((0, mod.dim(key)))
    return mod


def _candidate_gram(mod, key, cand, params):
    n = params.n
    offsets = {}
    pos = 0
    for i in range(n):
        if key[i] > 0:
            d = mod.dim(_shift(key, i, -1))
            offsets[i] = (pos, d)
            pos += d
    gc = np.zeros((pos, pos), dtype=complex)
    for i, (oi, di) in offsets.items():
        si = _shift(key, i, -1)
        g_si = mod.blocks_[si].gram
        for j, (oj, dj) in offsets.items():
            sj = _shift(key, j, -1)
            inner = np.zeros((di, dj), dtype=complex)
            mid = _shift(sj, i, -1)
            if min(mid) >= 0 and mid in mod.blocks_:
                inner += mod.F[(j, mid)] @ mod.E[(i, sj)]
            if i == j:
                inner += params.qnum(mod.blocks_[si].h[i]) * np.eye(di)
            gc[oi:oi + di, oj:oj + dj] = g_si @ inner
    return gc


def dual_pairing(module: TruncatedVermaModule, x) -> complex:
    """Value of the lowest-weight dual vector x* on ``x`` (coefficient of x_lambda).

    ``x`` is a mapping block -> coordinate vector; blocks other than the top
    contribute nothing.
    """
    top = x.get(module.top)
    if top is None or len(top) == 0:
        return 0j
    return complex(np.asarray(top)[0])
