"""GMI of post-processed soft outputs and the (gamma, delta) optimizer.

With the outgoing message modelled as l_out = f_pp(w; theta) + l_ch and
interpreted as an LLR, the 1-GMI under the all-zero (X = +1) convention is

    I = 1 - E[ log2(1 + exp(-(f_pp(W; theta) + L_ch))) ].

The expectation splits over positions with and without an alternative
codeword, so gamma and delta are optimized by two independent 1-D scans.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels

LN2 = math.log(2.0)

GRID_MAX = 4.0
GRID_STEP = 0.05
REFINE_ROUNDS = 2


class EmptySampleSet(ValueError):
    pass


@dataclass(frozen=True)
class PostProcParams:
    gamma: float = 1.0
    delta: float = 1.0

    def __post_init__(self):
        for name in ("gamma", "delta"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and non-negative, got {v}")


@dataclass
class LabeledSampleSet:
    """(w, l_ch, alt) triples gathered with X = +1 transmitted."""

    w: np.ndarray
    l_ch: np.ndarray
    alt: np.ndarray

    def __post_init__(self):
        self.w = np.ascontiguousarray(self.w, dtype=np.float64).ravel()
        self.l_ch = np.ascontiguousarray(self.l_ch, dtype=np.float64).ravel()
        self.alt = np.ascontiguousarray(self.alt, dtype=np.bool_).ravel()
        if not (self.w.shape == self.l_ch.shape == self.alt.shape):
            raise ValueError("w, l_ch and alt must have equal lengths")

    def __len__(self) -> int:
        return self.w.shape[0]

    def split(self):
        """((w, l) with alternative, (w, l) without)."""
        a = self.alt
        return (self.w[a], self.l_ch[a]), (self.w[~a], self.l_ch[~a])

    @classmethod
    def concat(cls, sets) -> "LabeledSampleSet":
        sets = list(sets)
        return cls(
            np.concatenate([s.w for s in sets]),
            np.concatenate([s.l_ch for s in sets]),
            np.concatenate([s.alt for s in sets]),
        )


@dataclass
class ThetaFit:
    theta: PostProcParams
    gmi: float
    degenerate: list[str] = field(default_factory=list)
    n_alt: int = 0
    n_noalt: int = 0
    at_bound: list[str] = field(default_factory=list)  # optimum on the upper grid edge


def post_process(w, alt, theta: PostProcParams):
    return np.where(alt, theta.gamma * np.asarray(w), theta.delta * np.asarray(w))


def softplus_bits(u):
    """log2(1 + exp(-u)) evaluated without overflow."""
    return np.logaddexp(0.0, -np.asarray(u, dtype=np.float64)) / LN2


def gmi_of_llrs(l_out) -> float:
    """1 - E[log2(1 + exp(-L))] for LLR samples conditioned on X = +1."""
    l_out = np.asarray(l_out, dtype=np.float64).ravel()
    if l_out.size == 0:
        raise EmptySampleSet("no samples")
    return 1.0 - float(np.mean(softplus_bits(l_out)))


def gmi_estimate(samples: LabeledSampleSet, theta: PostProcParams) -> float:
    if len(samples) == 0:
        raise EmptySampleSet("no samples")
    (wa, la), (wn, ln) = samples.split()
    loss = _kernels.softplus_sum(theta.gamma, wa, la) + _kernels.softplus_sum(theta.delta, wn, ln)
    return 1.0 - loss / (LN2 * len(samples))


def _scan(w: np.ndarray, l: np.ndarray) -> float:
    """argmin over [0, GRID_MAX] of sum softplus(s*w + l): grid, then local refinement."""

    def argbest(grid):
        # exact ties (a flat objective, e.g. saturated LLRs) go to the identity
        vals = np.array([_kernels.softplus_sum(s, w, l) for s in grid])
        ties = grid[vals == vals.min()]
        return float(ties[np.argmin(np.abs(ties - 1.0))])

    step = GRID_STEP
    best = argbest(np.round(np.arange(0.0, GRID_MAX + step / 2, step), 12))
    for _ in range(REFINE_ROUNDS):
        lo, hi = max(0.0, best - step), min(GRID_MAX, best + step)
        step /= 10
        best = argbest(np.arange(lo, hi + step / 2, step))
    return best


def optimize_theta(samples: LabeledSampleSet) -> ThetaFit:
    """Maximize the GMI over theta in [0, 4]^2.

    A class without samples cannot influence the objective; its parameter is
    set to 1 and reported in ``degenerate``.
    """
    if len(samples) == 0:
        raise EmptySampleSet("no samples")
    (wa, la), (wn, ln) = samples.split()
    degenerate = []
    if wa.size:
        gamma = _scan(wa, la)
    else:
        gamma = 1.0
        degenerate.append("gamma")
    if wn.size:
        delta = _scan(wn, ln)
    else:
        delta = 1.0
        degenerate.append("delta")
    theta = PostProcParams(gamma, delta)
    at_bound = [name for name, v in (("gamma", gamma), ("delta", delta)) if v >= GRID_MAX and name not in degenerate]
    return ThetaFit(theta, gmi_estimate(samples, theta), degenerate, int(wa.size), int(wn.size), at_bound)
