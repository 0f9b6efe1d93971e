"""biAWGN channel: SNR bookkeeping, BPSK transmission, channel LLRs.

Random streams are numpy ``Generator(PCG64)`` instances keyed by
``SeedSequence(master_seed, spawn_key=stream_id)``; Gaussian samples come
from numpy's ziggurat ``standard_normal``.  A given (master_seed, stream_id)
therefore always reproduces the same sequence, whatever process draws it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class InvalidRate(ValueError):
    pass


class InvalidSigma(ValueError):
    pass


@dataclass(frozen=True)
class RngStream:
    master_seed: int
    stream_id: tuple[int, ...] = ()

    def __post_init__(self):
        if isinstance(self.stream_id, int):
            object.__setattr__(self, "stream_id", (self.stream_id,))

    def child(self, *ids: int) -> "RngStream":
        return RngStream(self.master_seed, tuple(self.stream_id) + tuple(ids))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(
            self.master_seed & 0xFFFFFFFFFFFFFFFF,
            spawn_key=tuple(i & 0xFFFFFFFFFFFFFFFF for i in self.stream_id),
        )
        return np.random.Generator(np.random.PCG64(seq))


@dataclass(frozen=True)
class ChannelParams:
    sigma: float
    ebn0_db: float
    rate: float

    @classmethod
    def from_ebn0(cls, ebn0_db: float, rate: float) -> "ChannelParams":
        return cls(snr_to_sigma(ebn0_db, rate), ebn0_db, rate)

    @property
    def llr_mean(self) -> float:
        """Mean channel LLR given X = +1, i.e. 2/sigma^2."""
        return 2.0 / self.sigma**2


def snr_to_sigma(ebn0_db: float, rate: float) -> float:
    """Noise standard deviation from Eb/N0 = 1 / (2 R sigma^2)."""
    if not 0 < rate <= 1:
        raise InvalidRate(f"code rate must be in (0, 1], got {rate}")
    return math.sqrt(1.0 / (2.0 * rate * 10.0 ** (ebn0_db / 10.0)))


def sigma_to_snr(sigma: float, rate: float) -> float:
    if not 0 < rate <= 1:
        raise InvalidRate(f"code rate must be in (0, 1], got {rate}")
    if sigma <= 0:
        raise InvalidSigma(f"sigma must be positive, got {sigma}")
    return 10.0 * math.log10(1.0 / (2.0 * rate * sigma**2))


def bpsk(bits) -> np.ndarray:
    """0 -> +1, 1 -> -1."""
    return 1.0 - 2.0 * np.asarray(bits, dtype=np.float64)


def transmit(bits, sigma: float, stream: RngStream | np.random.Generator) -> np.ndarray:
    x = bpsk(bits)
    if sigma == 0:
        return x
    rng = stream.generator() if isinstance(stream, RngStream) else stream
    return x + sigma * rng.standard_normal(x.shape)


def channel_llr(y, sigma: float):
    if not sigma > 0:
        raise InvalidSigma(f"sigma must be positive, got {sigma}")
    return 2.0 * np.asarray(y, dtype=np.float64) / sigma**2 if np.ndim(y) else 2.0 * float(y) / sigma**2
