"""Matched filtering, decision-instant sampling and threshold decisions."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import MultipathChannel, apply_multipath
from .waveform import WaveformConfig, sampled_basis, shape_forming_filter

__all__ = [
    "MatchedFilter",
    "DecisionSeries",
    "matched_filter",
    "calibrate_timing",
    "single_symbol_response",
    "sample_decisions",
    "decide",
]


@dataclass(frozen=True)
class MatchedFilter:
    """Time-reversed sampled basis function, unnormalized."""

    coeffs: np.ndarray
    group_delay: int

    @classmethod
    def for_config(cls, cfg: WaveformConfig) -> "MatchedFilter":
        p = sampled_basis(cfg)
        return cls(coeffs=p[::-1].copy(), group_delay=p.size - 1)


@dataclass(frozen=True)
class DecisionSeries:
    y: np.ndarray
    timing_offset: int

    def __len__(self):
        return len(self.y)


def matched_filter(samples, cfg: WaveformConfig = WaveformConfig()) -> np.ndarray:
    """Full convolution of ``samples`` with the matched filter taps."""
    x = np.asarray(samples, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("matched filter input must be a non-empty 1-D waveform")
    return np.convolve(x, MatchedFilter.for_config(cfg).coeffs)


def single_symbol_response(cfg: WaveformConfig, ch: MultipathChannel) -> np.ndarray:
    """Matched-filter output for a lone +1 symbol at index 0 sent through ``ch``."""
    return matched_filter(apply_multipath(shape_forming_filter([1.0], cfg), ch, cfg), cfg)


def calibrate_timing(cfg: WaveformConfig, ch: MultipathChannel) -> int:
    """Sample index of the first decision instant.

    A single +1 symbol is pushed through filter, channel and matched filter;
    the peak of the absolute response marks where symbol 0 is sampled.
    """
    return int(np.argmax(np.abs(single_symbol_response(cfg, ch))))


def sample_decisions(filtered, n_symbols: int, timing_offset: int, cfg: WaveformConfig = WaveformConfig()) -> DecisionSeries:
    """Pick ``filtered[timing_offset + n*n_samp]`` for each symbol ``n``."""
    x = np.asarray(filtered, dtype=float)
    if n_symbols < 0 or timing_offset < 0:
        raise ValueError("n_symbols and timing_offset must be non-negative")
    if n_symbols == 0:
        return DecisionSeries(np.empty(0), timing_offset)
    last = timing_offset + (n_symbols - 1) * cfg.n_samp
    if last >= x.size:
        raise IndexError(
            f"filtered waveform has {x.size} samples, decision instant {last} is out of range"
        )
    return DecisionSeries(x[timing_offset : last + 1 : cfg.n_samp].copy(), timing_offset)


def decide(y_n: float, theta_n: float) -> int:
    """Return +1 when ``y_n >= theta_n``, else -1."""
    if not (np.isfinite(y_n) and np.isfinite(theta_n)):
        raise ValueError("decision inputs must be finite")
    return 1 if y_n - theta_n >= 0 else -1
