"""Multipath propagation and calibrated AWGN on sampled baseband waveforms."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .waveform import WaveformConfig

__all__ = [
    "MultipathChannel",
    "NoiseSpec",
    "apply_multipath",
    "measure_eb",
    "noise_variance",
    "add_awgn",
    "delay_samples",
]

_GRID_TOL = 1e-9


@dataclass(frozen=True)
class MultipathChannel:
    """Tapped-delay channel ``h(t) = sum_l alpha_l delta(t - tau_l)``.

    Delays are in symbol durations. ``gamma`` is recorded when the
    attenuations were generated as ``exp(-gamma*tau)``.
    """

    taus: tuple[float, ...]
    alphas: tuple[float, ...]
    gamma: float | None = None

    def __post_init__(self):
        taus = tuple(float(t) for t in self.taus)
        alphas = tuple(float(a) for a in self.alphas)
        object.__setattr__(self, "taus", taus)
        object.__setattr__(self, "alphas", alphas)
        if not taus:
            raise ValueError("channel needs at least one tap")
        if len(taus) != len(alphas):
            raise ValueError("taus and alphas differ in length")
        if taus[0] != 0.0:
            raise ValueError("the reference path must have tau = 0")
        if any(b <= a for a, b in zip(taus, taus[1:])):
            raise ValueError("delays must be strictly increasing")
        if any(not a > 0 for a in alphas):
            raise ValueError("attenuations must be positive")

    @classmethod
    def from_gamma(cls, gamma: float, taus: Sequence[float]) -> "MultipathChannel":
        taus = tuple(float(t) for t in taus)
        return cls(taus, tuple(float(np.exp(-gamma * t)) for t in taus), gamma=float(gamma))

    @classmethod
    def single_path(cls) -> "MultipathChannel":
        return cls((0.0,), (1.0,))

    @classmethod
    def default_three_path(cls) -> "MultipathChannel":
        return cls.from_gamma(0.7, (0.0, 1.0, 2.0))

    @property
    def taps(self) -> list[tuple[float, float]]:
        return list(zip(self.taus, self.alphas))

    @property
    def n_paths(self) -> int:
        return len(self.taus)

    def scaled(self, factor: float) -> "MultipathChannel":
        return MultipathChannel(self.taus, tuple(a * factor for a in self.alphas))

    def to_dict(self) -> dict:
        d = {"taps": [[t, a] for t, a in self.taps]}
        if self.gamma is not None:
            d["gamma"] = self.gamma
        return d


def delay_samples(tau: float, cfg: WaveformConfig) -> int:
    """Convert a delay in symbols to a whole number of samples."""
    d = tau * cfg.n_samp
    k = int(round(d))
    if abs(d - k) > _GRID_TOL:
        raise ValueError(f"delay {tau} is not on the 1/{cfg.n_samp} symbol sample grid")
    return k


def apply_multipath(samples, ch: MultipathChannel, cfg: WaveformConfig = WaveformConfig()) -> np.ndarray:
    """Sum of delayed, attenuated copies; output is longer by the max delay."""
    x = np.asarray(samples, dtype=float)
    delays = [delay_samples(t, cfg) for t in ch.taus]
    out = np.zeros(x.size + max(delays))
    for d, a in zip(delays, ch.alphas):
        out[d : d + x.size] += a * x
    return out


def measure_eb(samples, n_bits: int) -> float:
    """Energy per bit as sum of squared samples divided by ``n_bits``."""
    if n_bits < 1:
        raise ValueError("n_bits must be >= 1")
    x = np.asarray(samples, dtype=float)
    return float(np.dot(x, x) / n_bits)


@dataclass(frozen=True)
class NoiseSpec:
    ebn0_db: float
    seed: int = 0


def noise_variance(eb: float, ebn0_db: float) -> float:
    """Per-sample variance ``eb / (2 * 10**(ebn0_db/10))``."""
    return eb / (2.0 * 10.0 ** (ebn0_db / 10.0))


def add_awgn(samples, eb: float, noise: NoiseSpec) -> np.ndarray:
    """Add white Gaussian noise scaled for the requested Eb/N0.

    The generator is created from ``noise.seed`` on every call, so equal
    inputs give bit-identical outputs.
    """
    if not eb > 0:
        raise ValueError(f"eb must be positive, got {eb!r}")
    x = np.asarray(samples, dtype=float)
    sigma2 = noise_variance(eb, noise.ebn0_db)
    if sigma2 == 0.0:
        return x.copy()
    rng = np.random.default_rng(noise.seed)
    return x + np.sqrt(sigma2) * rng.standard_normal(x.size)
