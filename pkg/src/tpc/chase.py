"""Chase-2 list decoding and Pyndiah soft outputs for one component code.

Single-vector functions here are the readable API; the product decoder and
density evolution call the batched kernels through :func:`chase_batch` and
:func:`chase_batch_extrinsic`.

``bdd_mode`` selects the inner decoder.  The default, ``"extended"``, also
keeps test words that decode to t cyclic corrections plus an overall-parity
mismatch (distance t + 1); ``"strict"`` is plain bounded-distance decoding.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from . import _kernels
from .codes import EXTENDED, CodeSpec, LengthMismatch


class EmptyList(RuntimeError):
    """No test word decoded successfully; p is too small for this input."""


@dataclass
class ChaseOutcome:
    d: np.ndarray  # modulated ML codeword, +-1
    w: np.ndarray
    alt_exists: np.ndarray
    list_size: int | np.ndarray

    @property
    def bits(self) -> np.ndarray:
        return (self.d < 0).astype(np.uint8)


@lru_cache(maxsize=None)
def test_patterns(p: int) -> np.ndarray:
    """Flip masks over the p LRBs (bit b <-> b-th least reliable position),
    ordered by weight, then lexicographically."""
    masks = [sum(1 << b for b in combo) for wt in range(p + 1) for combo in combinations(range(p), wt)]
    out = np.array(masks, dtype=np.int64)
    out.flags.writeable = False
    return out


def _vec(l, n: int) -> np.ndarray:
    v = np.ascontiguousarray(l, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] != n:
        raise LengthMismatch(f"expected an LLR vector of length {n}, got shape {v.shape}")
    return v


def _check_p(spec: CodeSpec, p: int) -> None:
    if not 1 <= p <= spec.n:
        raise ValueError(f"Chase parameter p must be in 1..{spec.n}, got {p}")


def hard_decision(l) -> np.ndarray:
    return (np.asarray(l) < 0).astype(np.uint8)


def least_reliable(l, p: int) -> np.ndarray:
    """Indices of the p smallest |l|, ascending; ties go to the lower index."""
    return np.argsort(np.abs(np.asarray(l, dtype=np.float64)), kind="stable")[:p]


def chase_list(spec: CodeSpec, l, p: int, bdd_mode: str = EXTENDED) -> list[np.ndarray]:
    """Unique BDD outputs of the 2^p test words, in discovery order."""
    _check_p(spec, p)
    v = _vec(l, spec.n)
    pos, size, _, r, _ = _kernels.chase_candidates(
        v, p, test_patterns(p), *spec.kernel_args, spec.max_distance(bdd_mode)
    )
    out = []
    for c in range(size.shape[0]):
        word = r.copy()
        word[pos[c, : size[c]]] ^= 1
        out.append(word)
    return out


def soft_output(spec: CodeSpec, l, p: int, bdd_mode: str = EXTENDED) -> ChaseOutcome:
    _check_p(spec, p)
    v = _vec(l, spec.n)
    d, w, alt, ls = chase_batch(spec, v[None, :], p, bdd_mode)
    if ls[0] == 0:
        raise EmptyList("Chase candidate list is empty")
    return ChaseOutcome(1.0 - 2.0 * d[0], w[0], alt[0], int(ls[0]))


def soft_output_extrinsic(spec: CodeSpec, l_in, l_ch, p: int, bdd_mode: str = EXTENDED) -> ChaseOutcome:
    """Position i is computed from l_in with entry i replaced by l_ch[i]."""
    _check_p(spec, p)
    a = _vec(l_in, spec.n)
    b = _vec(l_ch, spec.n)
    d, w, alt, empty = chase_batch_extrinsic(spec, a[None, :], b[None, :], p, bdd_mode)
    if empty.any():
        bad = np.flatnonzero(empty[0]).tolist()
        raise EmptyList(f"Chase candidate list is empty at positions {bad}")
    return ChaseOutcome(1.0 - 2.0 * d[0], w[0], alt[0], spec.n)


def chase_batch(spec: CodeSpec, L: np.ndarray, p: int, bdd_mode: str = EXTENDED):
    """Soft outputs for every row of L (rows x n).

    Returns (d bits, w, alt, list sizes).  Rows with an empty list have list
    size 0, d = hard decision, w = 0 and no alternatives.
    """
    L = np.ascontiguousarray(L, dtype=np.float64)
    R = L.shape[0]
    d = np.empty((R, spec.n), dtype=np.uint8)
    w = np.empty((R, spec.n))
    alt = np.empty((R, spec.n), dtype=np.bool_)
    ls = np.empty(R, dtype=np.int64)
    _kernels.chase_rows(
        L, p, test_patterns(p), *spec.kernel_args, spec.max_distance(bdd_mode), d, w, alt, ls
    )
    return d, w, alt, ls


def chase_batch_extrinsic(spec: CodeSpec, Lin: np.ndarray, Lch: np.ndarray, p: int, bdd_mode: str = EXTENDED):
    """Extrinsic soft outputs for every row; returns (d bits, w, alt, empty)."""
    Lin = np.ascontiguousarray(Lin, dtype=np.float64)
    Lch = np.ascontiguousarray(Lch, dtype=np.float64)
    if Lin.shape != Lch.shape:
        raise LengthMismatch(f"shape mismatch {Lin.shape} vs {Lch.shape}")
    R = Lin.shape[0]
    d = np.empty((R, spec.n), dtype=np.uint8)
    w = np.empty((R, spec.n))
    alt = np.empty((R, spec.n), dtype=np.bool_)
    empty = np.empty((R, spec.n), dtype=np.bool_)
    _kernels.chase_rows_extrinsic(
        Lin, Lch, p, test_patterns(p), *spec.kernel_args, spec.max_distance(bdd_mode),
        d, w, alt, empty,
    )
    return d, w, alt, empty
