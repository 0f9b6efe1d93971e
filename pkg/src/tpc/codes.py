"""SPC and extended BCH component codes.

Bit layout of an eBCH codeword of length n (N = n - 1 cyclic positions):
message bits at indices 0..k-1, BCH parity at k..N-1, overall parity at
index N.  Index ``idx < N`` carries the coefficient of x^(N-1-idx) of the
cyclic code polynomial, so the codeword is systematic with the message
first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _kernels
from .gf import FieldTables, make_field, minimal_polynomial, poly_degree, poly_divmod, poly_lcm

SPC = "spc"
EBCH = "ebch"

# inner-decoder acceptance radius used by Chase decoding
STRICT = "strict"  # distance <= t
EXTENDED = "extended"  # also t cyclic errors plus a flipped overall parity bit
BDD_MODES = (STRICT, EXTENDED)

# (n, t) -> k for the codes used in the experiments; checked at construction
KNOWN_DIMENSIONS = {
    (8, 1): 4,
    (32, 1): 26,
    (32, 2): 21,
    (64, 2): 51,
    (128, 2): 113,
    (256, 2): 239,
}


class UnsupportedParameters(ValueError):
    pass


class LengthMismatch(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CodeSpec:
    family: str
    n: int
    k: int
    d: int
    t: int
    generator_poly: int | None = None
    field: FieldTables | None = field(default=None, repr=False)

    @property
    def rate(self) -> float:
        return self.k / self.n

    @property
    def ncyc(self) -> int:
        """Number of positions covered by the cyclic (syndrome) part."""
        return self.n - 1 if self.family == EBCH else 0

    @cached_property
    def syndrome_table(self) -> np.ndarray:
        """pw[j, idx] = alpha^((j+1) * (N-1-idx)), the contribution of bit idx to S_{j+1}."""
        pw = np.zeros((max(2 * self.t, 1), self.n), dtype=np.int64)
        if self.family == EBCH:
            f = self.field
            N = self.ncyc
            for j in range(2 * self.t):
                for idx in range(N):
                    pw[j, idx] = f.alpha((j + 1) * (N - 1 - idx))
        pw.flags.writeable = False
        return pw

    @cached_property
    def kernel_args(self) -> tuple:
        """(t, ncyc, q1, alog, logt, pw) as consumed by the compiled kernels."""
        if self.family == EBCH:
            f = self.field
            return (self.t, self.ncyc, f.order, f.antilog_table, f.log_table, self.syndrome_table)
        z = np.zeros(2, dtype=np.int64)
        return (0, 0, 1, z, z, self.syndrome_table)

    def max_distance(self, mode: str = STRICT) -> int:
        if mode not in BDD_MODES:
            raise ValueError(f"unknown BDD mode {mode!r}")
        if mode == EXTENDED and self.family == EBCH:
            return self.t + 1
        return self.t

    @cached_property
    def generator_matrix(self) -> np.ndarray:
        """Systematic k x n generator matrix [I | P]."""
        G = np.zeros((self.k, self.n), dtype=np.uint8)
        for i in range(self.k):
            G[i, i] = 1
            G[i, self.k:] = self._parity_bits_of_unit(i)
        G.flags.writeable = False
        return G

    def _parity_bits_of_unit(self, i: int) -> np.ndarray:
        if self.family == SPC:
            return np.ones(1, dtype=np.uint8)
        N = self.ncyc
        g = self.generator_poly
        _, rem = poly_divmod(1 << (N - 1 - i), g)
        nk = N - self.k
        # index k + s <-> exponent nk - 1 - s
        out = np.zeros(nk + 1, dtype=np.uint8)
        for s in range(nk):
            out[s] = (rem >> (nk - 1 - s)) & 1
        out[nk] = (1 + bin(rem).count("1")) & 1
        return out


def build_code(family: str, n: int, t: int | None = None) -> CodeSpec:
    family = family.lower()
    if family == SPC:
        if n < 2 or (t not in (None, 0)):
            raise UnsupportedParameters(f"SPC needs n >= 2 and t = 0, got n={n}, t={t}")
        return CodeSpec(SPC, n, n - 1, 2, 0)
    if family != EBCH:
        raise UnsupportedParameters(f"unknown code family {family!r}")
    if t is None or t < 1:
        raise UnsupportedParameters(f"eBCH needs t >= 1, got {t}")
    if n < 4 or n & (n - 1):
        raise UnsupportedParameters(f"eBCH length must be a power of two, got {n}")
    m = n.bit_length() - 1
    if m > 12:
        raise UnsupportedParameters(f"eBCH length {n} exceeds GF(2^12)")
    f = make_field(m)
    g = 1
    for power in range(1, 2 * t + 1):
        g = poly_lcm(g, minimal_polynomial(power, f))
    k = (n - 1) - poly_degree(g)
    if k <= 0:
        raise UnsupportedParameters(f"eBCH(n={n}, t={t}) has no information bits")
    expected = KNOWN_DIMENSIONS.get((n, t))
    if expected is not None and expected != k:
        raise AssertionError(f"eBCH({n}, t={t}) built with k={k}, expected {expected}")
    return CodeSpec(EBCH, n, k, 2 * t + 2, t, g, f)


def _check_len(word: np.ndarray, n: int) -> None:
    if word.shape[-1] != n:
        raise LengthMismatch(f"expected length {n}, got {word.shape[-1]}")


def encode(spec: CodeSpec, message) -> np.ndarray:
    """Systematic encoding; accepts a single message or a stack (..., k)."""
    msg = np.asarray(message, dtype=np.uint8)
    _check_len(msg, spec.k)
    G = spec.generator_matrix.astype(np.int64)
    return ((msg.astype(np.int64) @ G) & 1).astype(np.uint8)


def is_codeword(spec: CodeSpec, word) -> bool:
    w = np.asarray(word, dtype=np.uint8)
    if w.ndim != 1:
        raise LengthMismatch("is_codeword takes a single word")
    _check_len(w, spec.n)
    t, ncyc, _, _, _, pw = spec.kernel_args
    S = np.zeros(max(2 * t, 1), dtype=np.int64)
    par = _kernels.syndromes_of(np.ascontiguousarray(w), t, ncyc, pw, S)
    return par == 0 and not S[: 2 * t].any()


def bdd_decode(spec: CodeSpec, word) -> np.ndarray | None:
    """Codeword within Hamming distance t of ``word``, or None on failure."""
    w = np.ascontiguousarray(word, dtype=np.uint8)
    if w.ndim != 1:
        raise LengthMismatch("bdd_decode takes a single word")
    _check_len(w, spec.n)
    out = np.empty_like(w)
    if _kernels.bdd_word(w, *spec.kernel_args, spec.t, out):
        return out
    return None
