"""Independent reference implementations used as test oracles.

Everything here is deliberately naive (pure Python loops, exhaustive
search, textbook formulas) and shares no code with the package except the
generator matrix, whose validity is checked separately by root evaluation.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

# biAWGN mutual information at sigma = 1 (LLRs ~ N(2, 4)); Gauss-Hermite with
# 200 nodes and adaptive quadrature agree to 1e-15
BIAWGN_MI_SIGMA1 = 0.48594415413293535


# -- GF(2^m) by shift-and-reduce ---------------------------------------------


def gf_mul_slow(a: int, b: int, m: int, prim: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a >> m:
            a ^= prim
    return out


def gf_pow_slow(a: int, e: int, m: int, prim: int) -> int:
    out = 1
    for _ in range(e):
        out = gf_mul_slow(out, a, m, prim)
    return out


def poly_eval_gf(bits_high_first, x: int, m: int, prim: int) -> int:
    """Horner evaluation of a binary polynomial given as coefficients of
    x^(N-1), ..., x^0 at a field element x."""
    acc = 0
    for b in bits_high_first:
        acc = gf_mul_slow(acc, x, m, prim) ^ int(b)
    return acc


def minimal_poly_slow(power: int, m: int, prim: int) -> int:
    """prod over the conjugacy class of (x - alpha^j), coefficients in GF(2^m)."""
    q1 = (1 << m) - 1
    cls, j = [], power % q1
    while j not in cls:
        cls.append(j)
        j = (2 * j) % q1
    coeffs = [1]  # low degree first
    for j in cls:
        root = gf_pow_slow(2, j, m, prim)
        new = [0] * (len(coeffs) + 1)
        for i, c in enumerate(coeffs):
            new[i + 1] ^= c
            new[i] ^= gf_mul_slow(c, root, m, prim)
        coeffs = new
    assert all(c in (0, 1) for c in coeffs)
    return sum(c << i for i, c in enumerate(coeffs))


# -- linear-code helpers -------------------------------------------------------


def parity_check_matrix(G: np.ndarray) -> np.ndarray:
    """H = [P^T | I] for a systematic G = [I | P]."""
    k, n = G.shape
    P = G[:, k:]
    return np.concatenate([P.T, np.eye(n - k, dtype=np.uint8)], axis=1) % 2


def all_codewords(G: np.ndarray) -> np.ndarray:
    k = G.shape[0]
    msgs = np.array(list(itertools.product([0, 1], repeat=k)), dtype=np.int64)
    return (msgs @ G.astype(np.int64)) % 2


def nearest_within(word: np.ndarray, codewords: np.ndarray, radius: int):
    """Exhaustive nearest codeword within ``radius``; None if there is none."""
    dist = (codewords != word).sum(axis=1)
    i = int(np.argmin(dist))
    return codewords[i].astype(np.uint8) if dist[i] <= radius else None


class SyndromeTableBDD:
    """Table decoder for an extended code with t-error-correcting cyclic part.

    ``extended=False``: error patterns of total weight <= t.
    ``extended=True``: cyclic weight <= t, with the overall-parity bit free.
    The sum of two such patterns has weight below d = 2t + 2, so each
    syndrome has at most one pattern.
    """

    def __init__(self, G: np.ndarray, t: int, extended: bool):
        self.H = parity_check_matrix(G).astype(np.int64)
        n = G.shape[1]
        self.table = {}
        for wt in range(t + 1):
            for pos in itertools.combinations(range(n - 1), wt):
                for par in (0, 1):
                    e = np.zeros(n, np.uint8)
                    e[list(pos)] = 1
                    e[n - 1] = par
                    if not extended and e.sum() > t:
                        continue
                    key = self._syn(e)
                    assert key not in self.table
                    self.table[key] = e

    def _syn(self, word) -> bytes:
        return ((self.H @ np.asarray(word, np.int64)) % 2).astype(np.uint8).tobytes()

    def decode(self, word):
        e = self.table.get(self._syn(word))
        return None if e is None else (np.asarray(word, np.uint8) ^ e)


# -- Chase-2 with Pyndiah soft output, straight from the definitions ---------


def chase_reference(l, p: int, bdd):
    """Returns (d as +-1, w, alt, candidate list of bit vectors)."""
    l = np.asarray(l, dtype=float)
    n = len(l)
    r = (l < 0).astype(np.uint8)
    lrb = sorted(range(n), key=lambda i: (abs(l[i]), i))[:p]
    cands = []
    for wt in range(p + 1):
        for combo in itertools.combinations(range(p), wt):
            tw = r.copy()
            for b in combo:
                tw[lrb[b]] ^= 1
            c = bdd(tw)
            if c is not None and not any((c == x).all() for x in cands):
                cands.append(c)
    if not cands:
        return None
    mods = [1.0 - 2.0 * c for c in cands]
    corr = [float(np.dot(m, l)) for m in mods]
    di = max(range(len(mods)), key=lambda j: (corr[j], -j))
    d = mods[di]
    w = np.empty(n)
    alt = np.zeros(n, bool)
    for i in range(n):
        best = None
        for j, m in enumerate(mods):
            if m[i] != d[i] and (best is None or corr[j] > corr[best]):
                best = j
        if best is None:
            w[i] = d[i]
        else:
            alt[i] = True
            x = mods[best]
            w[i] = 0.5 * d[i] * sum((d[k] - x[k]) * l[k] for k in range(n) if k != i)
    return d, w, alt, cands


def chase_extrinsic_reference(l_in, l_ch, p: int, bdd):
    n = len(l_in)
    d = np.empty(n)
    w = np.empty(n)
    alt = np.zeros(n, bool)
    for i in range(n):
        lp = np.array(l_in, dtype=float)
        lp[i] = l_ch[i]
        res = chase_reference(lp, p, bdd)
        if res is None:
            d[i], w[i], alt[i] = (1.0 if lp[i] >= 0 else -1.0), 0.0, False
            continue
        di, wi, ai, _ = res
        d[i], w[i], alt[i] = di[i], wi[i], ai[i]
    return d, w, alt


# -- GMI --------------------------------------------------------------------------


def gmi_reference(w, l, alt, gamma, delta) -> float:
    total = 0.0
    for wi, li, ai in zip(w, l, alt):
        u = (gamma if ai else delta) * wi + li
        total += math.log1p(math.exp(-u)) / math.log(2) if u > -30 else -u / math.log(2)
    return 1.0 - total / len(w)


# -- one Pyndiah half iteration on rows ----------------------------------------


def pyndiah_rows_reference(L_ch, L_in, alpha, beta, p, bdd):
    """Single frame, rows: returns (V, L_out)."""
    n = L_ch.shape[0]
    W = np.zeros((n, n))
    A = np.zeros((n, n), bool)
    for r in range(n):
        _, w, alt, _ = chase_reference(L_in[r], p, bdd)
        W[r], A[r] = w, alt
    norm_w = np.abs(W[A]).mean() if A.any() else 1.0
    V = np.where(A, alpha / norm_w * W, alpha * beta / norm_w * W)
    L_out = L_ch / np.abs(L_ch).mean() + V
    return V, L_out
