"""Square product codes and their iterative Chase-Pyndiah decoders.

All decoders operate on a stack of frames, shape (F, n, n); a single
(n, n) matrix is accepted and treated as F = 1.  Row half iterations
decode axis 2, column half iterations axis 1.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channel import RngStream, channel_llr, snr_to_sigma, transmit
from .chase import chase_batch, chase_batch_extrinsic
from .codes import EXTENDED, CodeSpec, encode
from .gmi import LabeledSampleSet, PostProcParams, ThetaFit, optimize_theta, post_process

log = logging.getLogger(__name__)

ROWS = "rows"
COLUMNS = "columns"
ORIGINAL = "original"
ECPD = "ecpd"
MCPD = "mcpd"
HEURISTIC = "heuristic_alpha_beta"
GMI = "gmi_gamma_delta"

# LLR paired with w when fitting theta* during calibration
REF_INPUT = "input"  # the value the component decoder used at that position
REF_CHANNEL = "channel"  # always l_ch

APP_EXTRINSIC = "extrinsic"
APP_LITERAL = "literal"


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True)
class ProductCode:
    component: CodeSpec
    bdd_mode: str = EXTENDED  # inner decoder of the component Chase decoders

    @property
    def n(self) -> int:
        return self.component.n

    @property
    def k(self) -> int:
        return self.component.k

    @property
    def rate(self) -> float:
        return self.k**2 / self.n**2

    @property
    def design_rate(self) -> float:
        """Rate of the associated turbo-like ensemble, 2 sqrt(R) - 1."""
        return 2.0 * math.sqrt(self.rate) - 1.0

    @property
    def params(self) -> tuple[int, int, int]:
        c = self.component
        return (c.n**2, c.k**2, c.d**2)


def encode_product(pc: ProductCode, message) -> np.ndarray:
    """Rows first, then columns. Accepts (k, k) or (F, k, k)."""
    msg = np.asarray(message, dtype=np.uint8)
    if msg.shape[-2:] != (pc.k, pc.k):
        raise DimensionMismatch(f"message must be {pc.k}x{pc.k}, got {msg.shape}")
    rows = encode(pc.component, msg)  # (..., k, n)
    cols = encode(pc.component, np.swapaxes(rows, -1, -2))  # (..., n, n) transposed
    return np.ascontiguousarray(np.swapaxes(cols, -1, -2))


# -- coefficient schedules ---------------------------------------------------


@dataclass
class CoefficientSchedule:
    """Per-half-iteration pairs: (alpha, beta) or (gamma, delta).

    ``tail`` is used beyond the listed entries; None repeats the last entry.
    """

    kind: str
    pairs: list[tuple[float, float]]
    tail: tuple[float, float] | None = None

    def at(self, ell: int) -> tuple[float, float]:
        if ell < 1:
            raise ValueError(f"half iterations count from 1, got {ell}")
        if ell <= len(self.pairs):
            return self.pairs[ell - 1]
        if self.tail is not None:
            return self.tail
        if not self.pairs:
            raise ValueError("empty schedule")
        return self.pairs[-1]

    def theta(self, ell: int) -> PostProcParams:
        if self.kind != GMI:
            raise ValueError("theta() needs a gamma/delta schedule")
        return PostProcParams(*self.at(ell))

    def to_json(self) -> list[dict]:
        a, b = ("gamma", "delta") if self.kind == GMI else ("alpha", "beta")
        return [{"l": i + 1, a: x, b: y} for i, (x, y) in enumerate(self.pairs)]

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n")

    @classmethod
    def from_json(cls, entries: list[dict]) -> "CoefficientSchedule":
        if not entries:
            raise ValueError("empty schedule file")
        entries = sorted(entries, key=lambda e: e["l"])
        if [e["l"] for e in entries] != list(range(1, len(entries) + 1)):
            raise ValueError("schedule entries must cover l = 1..L without gaps")
        if "gamma" in entries[0]:
            return cls(GMI, [(float(e["gamma"]), float(e["delta"])) for e in entries])
        return cls(HEURISTIC, [(float(e["alpha"]), float(e["beta"])) for e in entries], tail=(1.0, 1.0))

    @classmethod
    def load(cls, path) -> "CoefficientSchedule":
        return cls.from_json(json.loads(Path(path).read_text()))


def pyndiah_schedule() -> CoefficientSchedule:
    alpha = [0.1, 0.3, 0.5, 0.7, 0.9, 1.0, 1.0, 1.0]
    beta = [0.2, 0.4, 0.6, 0.8, 1.0, 1.0, 1.0, 1.0]
    return CoefficientSchedule(HEURISTIC, list(zip(alpha, beta)), tail=(1.0, 1.0))


# -- decoder state -----------------------------------------------------------


@dataclass
class IterationState:
    L_ch: np.ndarray  # (F, n, n), unnormalized channel LLRs
    L_in: np.ndarray
    half_iter: int = 1
    direction: str = ROWS
    # outputs of the most recent half iteration, in matrix orientation
    d: np.ndarray | None = None
    W: np.ndarray | None = None
    alt: np.ndarray | None = None
    V: np.ndarray | None = None
    L_prev_in: np.ndarray | None = None
    empty_list_events: int = 0
    empty_alt_events: int = 0


@dataclass
class DecodeResult:
    decisions: np.ndarray
    empty_list_events: int = 0
    empty_alt_events: int = 0
    ber_trace: list[float] = field(default_factory=list)


def _as_frames(L: np.ndarray, n: int) -> np.ndarray:
    L = np.asarray(L, dtype=np.float64)
    if L.ndim == 2:
        L = L[None]
    if L.ndim != 3 or L.shape[1:] != (n, n):
        raise DimensionMismatch(f"expected (F, {n}, {n}) LLRs, got {L.shape}")
    return L


def _to_rows(X: np.ndarray, direction: str) -> np.ndarray:
    F, n, _ = X.shape
    if direction == COLUMNS:
        X = np.swapaxes(X, 1, 2)
    return np.ascontiguousarray(X).reshape(F * n, n)


def _from_rows(Y: np.ndarray, direction: str, F: int) -> np.ndarray:
    n = Y.shape[1]
    Y = Y.reshape(F, n, n)
    if direction == COLUMNS:
        Y = np.ascontiguousarray(np.swapaxes(Y, 1, 2))
    return Y


def _flip(direction: str) -> str:
    return COLUMNS if direction == ROWS else ROWS


def component_pass(pc: ProductCode, state: IterationState, p: int, extrinsic: bool):
    """Chase soft outputs for all rows (or columns) of every frame.

    Returns (d bits, W, alt, number of empty-list events), in matrix
    orientation.
    """
    F = state.L_in.shape[0]
    Lr = _to_rows(state.L_in, state.direction)
    if extrinsic:
        Cr = _to_rows(state.L_ch, state.direction)
        d, w, alt, empty = chase_batch_extrinsic(pc.component, Lr, Cr, p, pc.bdd_mode)
        nempty = int(empty.sum())
    else:
        d, w, alt, ls = chase_batch(pc.component, Lr, p, pc.bdd_mode)
        nempty = int((ls == 0).sum())
    back = lambda X: _from_rows(X, state.direction, F)  # noqa: E731
    return back(d), back(w), back(alt), nempty


def _mean_abs_frames(X: np.ndarray) -> np.ndarray:
    return np.mean(np.abs(X), axis=(1, 2), keepdims=True)


def pyndiah_half_iteration(
    pc: ProductCode, state: IterationState, schedule: CoefficientSchedule, p: int
) -> IterationState:
    """One half iteration of the original decoder (heuristic alpha/beta).

    ``state.L_in`` is expected to already be on the normalized scale.
    """
    d, W, alt, nempty = component_pass(pc, state, p, extrinsic=False)
    alpha, beta = schedule.at(state.half_iter)
    absw = np.where(alt, np.abs(W), 0.0)
    counts = alt.sum(axis=(1, 2), keepdims=True)
    norm = np.where(counts > 0, absw.sum(axis=(1, 2), keepdims=True) / np.maximum(counts, 1), 1.0)
    n_noalt = int((counts == 0).sum())
    if n_noalt:
        log.debug("half iteration %d: %d frame(s) without alternatives", state.half_iter, n_noalt)
    V = (alpha / norm) * np.where(alt, W, beta * W)
    L_out = state.L_ch / _mean_abs_frames(state.L_ch) + V
    return IterationState(
        state.L_ch, L_out, state.half_iter + 1, _flip(state.direction),
        d, W, alt, V, state.L_in,
        state.empty_list_events + nempty, state.empty_alt_events + n_noalt,
    )


def extrinsic_half_iteration(
    pc: ProductCode, state: IterationState, theta: PostProcParams, p: int, extrinsic: bool = True
) -> IterationState:
    """ECPD half iteration (``extrinsic=False`` gives the MCPD variant)."""
    d, W, alt, nempty = component_pass(pc, state, p, extrinsic=extrinsic)
    V = post_process(W, alt, theta)
    L_out = state.L_ch + V
    return IterationState(
        state.L_ch, L_out, state.half_iter + 1, _flip(state.direction),
        d, W, alt, V, state.L_in, state.empty_list_events + nempty, state.empty_alt_events,
    )


def _check_lmax(l_max: int) -> None:
    if l_max < 1:
        raise ValueError(f"l_max must be >= 1, got {l_max}")


def _bit_errors(bits: np.ndarray, reference: np.ndarray | None) -> float:
    ref = 0 if reference is None else reference
    return float(np.mean(bits != ref))


def original_cp_decode(
    pc: ProductCode,
    L_ch,
    schedule: CoefficientSchedule | None = None,
    p: int = 5,
    l_max: int = 20,
    first: str = ROWS,
    reference: np.ndarray | None = None,
    trace: bool = False,
) -> DecodeResult:
    _check_lmax(l_max)
    schedule = schedule or pyndiah_schedule()
    L_ch = _as_frames(L_ch, pc.n)
    state = IterationState(L_ch, L_ch / _mean_abs_frames(L_ch), 1, first)
    ber = []
    for _ in range(l_max):
        state = pyndiah_half_iteration(pc, state, schedule, p)
        if trace:
            ber.append(_bit_errors(state.d, reference))
    return DecodeResult(state.d, state.empty_list_events, state.empty_alt_events, ber)


def app_llrs(state: IterationState, rule: str = APP_EXTRINSIC) -> np.ndarray:
    """A posteriori LLRs after the last half iteration.

    ``"extrinsic"`` reads l_in as the message from the other component
    decoder, v_prev = L_in - L_ch, so l_app = v + l_ch + v_prev and each
    observation is counted once.  ``"literal"`` adds the full incoming
    matrix, l_app = v + l_ch + L_in, which counts l_ch twice.
    """
    if rule == APP_EXTRINSIC:
        return state.V + state.L_prev_in
    if rule == APP_LITERAL:
        return state.V + state.L_ch + state.L_prev_in
    raise ValueError(f"unknown APP rule {rule!r}")


def app_decisions(state: IterationState, rule: str = APP_EXTRINSIC) -> np.ndarray:
    """Bit 0 iff l_app >= 0."""
    return (app_llrs(state, rule) < 0).astype(np.uint8)


def gmi_cp_decode(
    pc: ProductCode,
    L_ch,
    theta_schedule: CoefficientSchedule,
    p: int = 5,
    l_max: int = 20,
    variant: str = MCPD,
    first: str = ROWS,
    reference: np.ndarray | None = None,
    trace: bool = False,
    app_rule: str = APP_EXTRINSIC,
) -> DecodeResult:
    _check_lmax(l_max)
    if variant not in (ECPD, MCPD):
        raise ValueError(f"variant must be 'ecpd' or 'mcpd', got {variant!r}")
    L_ch = _as_frames(L_ch, pc.n)
    state = IterationState(L_ch, L_ch.copy(), 1, first)
    ber = []
    for _ in range(l_max):
        theta = theta_schedule.theta(state.half_iter)
        state = extrinsic_half_iteration(pc, state, theta, p, extrinsic=variant == ECPD)
        if trace:
            ber.append(_bit_errors(app_decisions(state, app_rule), reference))
    return DecodeResult(app_decisions(state, app_rule), state.empty_list_events, 0, ber)


# -- calibration -------------------------------------------------------------


@dataclass
class CalibrationResult:
    schedule: CoefficientSchedule
    fits: list[ThetaFit]
    empty_list_events: int
    pilot_frames: int
    samples_per_half_iter: list[int]

    @property
    def gmi_trajectory(self) -> list[float]:
        return [f.gmi for f in self.fits]

    def report(self) -> list[dict]:
        return [
            {
                "l": i + 1,
                "gamma": f.theta.gamma,
                "delta": f.theta.delta,
                "gmi": f.gmi,
                "n_alt": f.n_alt,
                "n_noalt": f.n_noalt,
                "degenerate": f.degenerate,
                "at_bound": f.at_bound,
            }
            for i, f in enumerate(self.fits)
        ]


def pilot_llrs(pc: ProductCode, sigma: float, stream: RngStream, frames: range) -> np.ndarray:
    """Channel LLRs of all-zero frames; frame f draws from ``stream.child(f)``."""
    out = np.empty((len(frames), pc.n, pc.n))
    for i, f in enumerate(frames):
        y = transmit(np.zeros((pc.n, pc.n), np.uint8), sigma, stream.child(f))
        out[i] = channel_llr(y, sigma)
    return out


def calibrate_schedule(
    pc: ProductCode,
    ebn0_db: float,
    p: int,
    l_max: int,
    pilot_frames: int = 1000,
    variant: str = MCPD,
    seed: int = 1,
    max_samples: int = 4_000_000,
    chunk_frames: int = 64,
    first: str = ROWS,
    reference: str = REF_INPUT,
) -> CalibrationResult:
    """Pilot phase: decode all-zero frames, fitting theta* before each half
    iteration on the pooled (w, l, alt) samples of all pilot frames.

    With ``reference="input"`` the LLR l paired with w_i is the one the
    Chase decoder used at position i: l_ch for ECPD, l_in for MCPD, whose
    soft output already conditions on l_in.  ``"channel"`` pairs w with l_ch
    for both variants.

    At most about ``max_samples`` samples per half iteration enter the fit;
    beyond that a uniform Bernoulli subsample is drawn.
    """
    _check_lmax(l_max)
    if pilot_frames < 1:
        raise ValueError("pilot_frames must be >= 1")
    if pilot_frames == 1:
        log.warning("calibrating on a single pilot frame; theta* will be noisy")
    if variant not in (ECPD, MCPD):
        raise ValueError(f"variant must be 'ecpd' or 'mcpd', got {variant!r}")
    if reference not in (REF_INPUT, REF_CHANNEL):
        raise ValueError(f"reference must be 'input' or 'channel', got {reference!r}")
    pair_input = reference == REF_INPUT and variant == MCPD
    sigma = snr_to_sigma(ebn0_db, pc.rate)
    root = RngStream(seed, (0xCA1,))
    L_ch = pilot_llrs(pc, sigma, root.child(0), range(pilot_frames))
    L_in = L_ch.copy()
    total = pilot_frames * pc.n * pc.n
    keep = min(1.0, max_samples / total)
    direction = first
    fits: list[ThetaFit] = []
    pairs = []
    sizes = []
    nempty = 0
    for ell in range(1, l_max + 1):
        chunks = []
        sub = root.child(1, ell).generator()
        outs = []
        for s in range(0, pilot_frames, chunk_frames):
            sl = slice(s, min(s + chunk_frames, pilot_frames))
            st = IterationState(L_ch[sl], L_in[sl], ell, direction)
            d, W, alt, ne = component_pass(pc, st, p, extrinsic=variant == ECPD)
            nempty += ne
            outs.append((sl, W, alt))
            ref = (L_in if pair_input else L_ch)[sl]
            if keep < 1.0:
                mask = sub.random(W.shape) < keep
                chunks.append(LabeledSampleSet(W[mask], ref[mask], alt[mask]))
            else:
                chunks.append(LabeledSampleSet(W, ref, alt))
        samples = LabeledSampleSet.concat(chunks)
        fit = optimize_theta(samples)
        fits.append(fit)
        pairs.append((fit.theta.gamma, fit.theta.delta))
        sizes.append(len(samples))
        log.info(
            "l=%d gamma=%.3f delta=%.3f gmi=%.5f (%d samples)",
            ell, fit.theta.gamma, fit.theta.delta, fit.gmi, len(samples),
        )
        if fit.at_bound:
            log.warning("l=%d: %s at the grid edge; theta* may be clipped", ell, ", ".join(fit.at_bound))
        for sl, W, alt in outs:
            L_in[sl] = L_ch[sl] + post_process(W, alt, fit.theta)
        direction = _flip(direction)
    return CalibrationResult(CoefficientSchedule(GMI, pairs), fits, nempty, pilot_frames, sizes)
