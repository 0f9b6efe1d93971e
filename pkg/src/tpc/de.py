"""Monte-Carlo density evolution for the turbo-like product-code ensemble
under extrinsic Chase-Pyndiah decoding with GMI post-processing.

The all-zero codeword is assumed.  Each half iteration permutes the message
population, groups it into pseudo-constraints of n edges, draws fresh
channel LLRs ~ N(mu_ch, 2 mu_ch) per edge, runs the per-position extrinsic
Chase decoder and forms l_out = l_ch + f_pp(w; theta).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .channel import RngStream
from .chase import chase_batch_extrinsic
from .codes import EXTENDED, CodeSpec
from .gmi import LabeledSampleSet, PostProcParams, optimize_theta, post_process
from .product import CoefficientSchedule

log = logging.getLogger(__name__)

OPTIMIZE = "optimize_per_halfiter"
FIXED = "fixed_schedule"


class ConfigurationError(RuntimeError):
    pass


class InvalidBracket(ValueError):
    pass


@dataclass
class DeConfig:
    N: int = 1_000_000
    l_max: int = 50
    p: int = 2
    theta_mode: str = OPTIMIZE
    schedule: CoefficientSchedule | None = None
    error_floor_eps: float = 0.0
    seed: int = 1
    max_empty_fraction: float = 1e-3
    bdd_mode: str = EXTENDED


@dataclass
class MessagePopulation:
    l_in: np.ndarray
    v: np.ndarray | None = None

    @property
    def N(self) -> int:
        return self.l_in.shape[0]


@dataclass
class DeRun:
    ebn0_db: float
    trajectory: list[float]
    thetas: list[PostProcParams]
    empty_events: int
    converged: bool


@dataclass
class ThresholdResult:
    ebn0_star_db: float
    bracket: tuple[float, float]
    trajectory: dict[float, list[float]] = field(default_factory=dict)
    code: str = ""
    p: int = 0

    def to_json(self) -> dict:
        return {
            "code": self.code,
            "p": self.p,
            "ebn0_star_db": self.ebn0_star_db,
            "bracket": list(self.bracket),
            "trajectory": {f"{k:.4f}": v for k, v in sorted(self.trajectory.items())},
        }


def design_rate(spec: CodeSpec) -> float:
    """2 sqrt(R) - 1 with R = (k/n)^2, i.e. 2k/n - 1."""
    return 2.0 * spec.k / spec.n - 1.0


def channel_llr_stats(spec: CodeSpec, ebn0_db: float) -> tuple[float, float]:
    """(mu_ch, sigma_ch^2) of the channel LLRs at the ensemble design rate."""
    mu = 4.0 * design_rate(spec) * 10.0 ** (ebn0_db / 10.0)
    return mu, 2.0 * mu


def initial_population(spec: CodeSpec, ebn0_db: float, N: int, rng: np.random.Generator) -> MessagePopulation:
    if N % spec.n:
        raise ConfigurationError(f"N={N} is not a multiple of n={spec.n}")
    if N < 10 * spec.n:
        raise ConfigurationError(f"N={N} is below 10 n")
    mu, var = channel_llr_stats(spec, ebn0_db)
    return MessagePopulation(mu + math.sqrt(var) * rng.standard_normal(N))


def de_half_iteration(
    pop: MessagePopulation,
    spec: CodeSpec,
    p: int,
    ebn0_db: float,
    rng: np.random.Generator,
    theta: PostProcParams | None = None,
    max_empty_fraction: float = 1e-3,
    bdd_mode: str = EXTENDED,
):
    """One half iteration; ``theta=None`` fits theta* on this half iteration's
    pooled samples.  Returns (new population, theta used, empty events)."""
    N, n = pop.N, spec.n
    mu, var = channel_llr_stats(spec, ebn0_db)
    l_in = pop.l_in[rng.permutation(N)].reshape(N // n, n)
    l_ch = mu + math.sqrt(var) * rng.standard_normal((N // n, n))
    _, w, alt, empty = chase_batch_extrinsic(spec, l_in, l_ch, p, bdd_mode)
    nempty = int(empty.sum())
    if nempty > max_empty_fraction * N:
        raise ConfigurationError(
            f"empty Chase list at {nempty}/{N} positions; p={p} is too small for this code"
        )
    if theta is None:
        theta = optimize_theta(LabeledSampleSet(w, l_ch, alt)).theta
    v = post_process(w, alt, theta)
    return MessagePopulation((l_ch + v).ravel(), v.ravel()), theta, nempty


def error_fraction(pop: MessagePopulation) -> float:
    """Pr[V < 0] estimated on the population, a zero message counting as half
    an error (otherwise theta* = 0 would look like convergence)."""
    return float(np.mean(pop.v < 0) + 0.5 * np.mean(pop.v == 0))


def run_de(spec: CodeSpec, p: int, ebn0_db: float, config: DeConfig) -> DeRun:
    if config.theta_mode == FIXED and config.schedule is None:
        raise ConfigurationError("fixed theta mode needs a schedule")
    rng = RngStream(config.seed, (0xDE,)).generator()
    pop = initial_population(spec, ebn0_db, config.N, rng)
    traj, thetas, nempty = [], [], 0
    for ell in range(1, config.l_max + 1):
        theta = config.schedule.theta(ell) if config.theta_mode == FIXED else None
        pop, theta, ne = de_half_iteration(
            pop, spec, p, ebn0_db, rng, theta, config.max_empty_fraction, config.bdd_mode
        )
        nempty += ne
        traj.append(error_fraction(pop))
        thetas.append(theta)
    converged = traj[-1] <= config.error_floor_eps
    log.info("DE %.4f dB: final Pr[V<0]=%.3g converged=%s", ebn0_db, traj[-1], converged)
    return DeRun(ebn0_db, traj, thetas, nempty, converged)


def find_threshold(
    spec: CodeSpec,
    p: int,
    config: DeConfig,
    bracket_db: tuple[float, float],
    resolution_db: float = 0.01,
) -> ThresholdResult:
    """Bisection on Eb/N0; every probe reuses the same seed (common random numbers)."""
    lo, hi = bracket_db
    if not lo < hi:
        raise InvalidBracket(f"bracket must satisfy low < high, got {bracket_db}")
    result = ThresholdResult(hi, (lo, hi), code=f"({spec.n},{spec.k},{spec.d})", p=p)
    r_lo = run_de(spec, p, lo, config)
    r_hi = run_de(spec, p, hi, config)
    result.trajectory[lo] = r_lo.trajectory
    result.trajectory[hi] = r_hi.trajectory
    if r_lo.converged or not r_hi.converged:
        raise InvalidBracket(
            f"need divergence at {lo} dB and convergence at {hi} dB "
            f"(got {r_lo.converged}, {r_hi.converged})"
        )
    while hi - lo > resolution_db + 1e-12:
        mid = 0.5 * (lo + hi)
        r = run_de(spec, p, mid, config)
        result.trajectory[mid] = r.trajectory
        if r.converged:
            hi = mid
        else:
            lo = mid
    result.ebn0_star_db = hi
    result.bracket = (lo, hi)
    return result
