"""ISI coefficient tables, decoding thresholds and probe-based channel estimation.

The coefficient ``C[l, i]`` is the matched-filter sample taken at the decision
instant of symbol ``n`` when only symbol ``n + i`` is sent (as +1) and only
path ``l`` is present. Because every stage of the link is linear, the noiseless
decision statistic decomposes exactly as

    y_n = s_n * c_main + sum_{l, i != 0} s_{n+i} * C[l, i]

provided the offset range covers the whole support of the response.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls

from .channel import MultipathChannel, delay_samples
from .receiver import calibrate_timing, matched_filter
from .waveform import WaveformConfig, shape_forming_filter

__all__ = [
    "IsiCoefficients",
    "Threshold",
    "compute_isi_coefficients",
    "threshold",
    "genie_threshold",
    "estimate_channel",
    "N_PAST",
    "N_FUTURE",
]

N_PAST = 4
N_FUTURE = 3


@dataclass(frozen=True)
class IsiCoefficients:
    """Coefficient table over paths ``l`` and symbol offsets ``i_min..i_max``.

    ``c`` has shape ``(n_paths, i_max - i_min + 1)``; the column for ``i = 0``
    is kept at zero and the self term lives in ``c_main``.
    """

    c: np.ndarray
    c_main: float
    i_min: int
    i_max: int

    def column(self, i: int) -> int:
        if not self.i_min <= i <= self.i_max:
            raise KeyError(f"offset {i} outside [{self.i_min}, {self.i_max}]")
        return i - self.i_min

    def __getitem__(self, key):
        l, i = key
        return self.c[l, self.column(i)]

    def summed(self) -> np.ndarray:
        """Per-offset coefficient summed over paths, indexed like ``c``'s columns."""
        return self.c.sum(axis=0)

    def offsets(self) -> np.ndarray:
        return np.arange(self.i_min, self.i_max + 1)

    def covers(self, i_min: int, i_max: int) -> bool:
        return self.i_min <= i_min and self.i_max >= i_max

    def to_csv(self) -> str:
        lines = ["l,i,C"]
        for l in range(self.c.shape[0]):
            for i in self.offsets():
                if i == 0:
                    continue
                lines.append(f"{l},{i},{float(self[l, i])!r}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Threshold:
    value: float
    i_past: float
    i_future: float


def compute_isi_coefficients(
    ch: MultipathChannel,
    cfg: WaveformConfig = WaveformConfig(),
    i_range: tuple[int, int] = (-8, 8),
    timing_offset: int | None = None,
) -> IsiCoefficients:
    """Build the ``C[l, i]`` table by running single symbols through each path.

    Parameters
    ----------
    ch : MultipathChannel
    cfg : WaveformConfig
    i_range : (int, int)
        Inclusive offset bounds; must contain ``[-4, 3]``.
    timing_offset : int, optional
        Decision instant of symbol 0. Defaults to :func:`calibrate_timing`
        on the full channel.
    """
    i_min, i_max = (int(v) for v in i_range)
    if i_min > -N_PAST or i_max < N_FUTURE:
        raise ValueError(f"i_range {i_range} must contain [-{N_PAST}, {N_FUTURE}]")
    if timing_offset is None:
        timing_offset = calibrate_timing(cfg, ch)
    pulse = shape_forming_filter([1.0], cfg)
    offsets = np.arange(i_min, i_max + 1)
    c = np.zeros((ch.n_paths, offsets.size))
    c_main = 0.0
    for l, (tau, alpha) in enumerate(ch.taps):
        # the lone symbol sits at index 0, so offset i is read at symbol index -i
        path = np.concatenate([np.zeros(delay_samples(tau, cfg)), alpha * pulse])
        resp = matched_filter(path, cfg)
        idx = timing_offset - offsets * cfg.n_samp
        valid = (idx >= 0) & (idx < resp.size)
        row = np.zeros(offsets.size)
        row[valid] = resp[idx[valid]]
        c_main += row[-i_min]
        row[-i_min] = 0.0
        c[l] = row
    return IsiCoefficients(c=c, c_main=float(c_main), i_min=i_min, i_max=i_max)


def _check_symbols(s, name):
    s = np.asarray(s, dtype=float)
    if s.size and not np.all(np.abs(s) == 1.0):
        raise ValueError(f"{name} must contain only -1 and +1")
    return s


def threshold(past_syms, future_syms, coeffs: IsiCoefficients) -> Threshold:
    """Decoding threshold from 4 past symbols and 0 or 3 future symbols.

    ``past_syms`` is ``(s_{n-4}, ..., s_{n-1})`` and ``future_syms`` is
    ``(s_{n+1}, s_{n+2}, s_{n+3})`` or empty.
    """
    past = _check_symbols(past_syms, "past_syms")
    future = _check_symbols(future_syms, "future_syms")
    if past.size != N_PAST:
        raise ValueError(f"need {N_PAST} past symbols, got {past.size}")
    if future.size not in (0, N_FUTURE):
        raise ValueError(f"need 0 or {N_FUTURE} future symbols, got {future.size}")
    csum = coeffs.summed()
    lo = coeffs.column(-N_PAST)
    i_past = float(np.dot(past, csum[lo : lo + N_PAST]))
    i_future = 0.0
    if future.size:
        hi = coeffs.column(1)
        i_future = float(np.dot(future, csum[hi : hi + N_FUTURE]))
    return Threshold(i_past + i_future, i_past, i_future)


def genie_threshold(all_syms, n: int, coeffs: IsiCoefficients, i_range: tuple[int, int] = (-8, 8)) -> Threshold:
    """Threshold from the true neighbours of symbol ``n`` over ``i_range``.

    Neighbours outside the sequence contribute nothing.
    """
    s = np.asarray(all_syms, dtype=float)
    if not 0 <= n < s.size:
        raise IndexError(f"symbol index {n} outside sequence of length {s.size}")
    i_min, i_max = i_range
    if not coeffs.covers(i_min, i_max):
        raise ValueError(f"coefficients cover [{coeffs.i_min}, {coeffs.i_max}], need {i_range}")
    csum = coeffs.summed()
    i_past = i_future = 0.0
    for i in range(max(i_min, -n), min(i_max, s.size - 1 - n) + 1):
        if i == 0:
            continue
        term = s[n + i] * csum[coeffs.column(i)]
        if i < 0:
            i_past += term
        else:
            i_future += term
    return Threshold(i_past + i_future, i_past, i_future)


def estimate_channel(
    probe_rx,
    probe_tx,
    cfg: WaveformConfig = WaveformConfig(),
    delay_grid: int = 2 * 16,
    prune: float = 0.05,
) -> MultipathChannel:
    """Non-negative least-squares tap fit on the sample-delay grid.

    Solves ``min ||probe_rx - sum_d a_d shift(probe_tx, d)||`` over
    ``a_d >= 0``, ``d = 0..delay_grid``, and keeps taps above
    ``prune * max(a)``. ``probe_rx`` must start at the same sample as
    ``probe_tx``.
    """
    rx = np.asarray(probe_rx, dtype=float)
    tx = np.asarray(probe_tx, dtype=float)
    if delay_grid < 0:
        raise ValueError("delay_grid must be non-negative")
    if not np.any(tx) or not np.any(rx):
        raise ValueError("probe waveform is all zeros")
    cols = np.zeros((rx.size, delay_grid + 1))
    for d in range(delay_grid + 1):
        seg = tx[: max(rx.size - d, 0)]
        cols[d : d + seg.size, d] = seg
    amps, _ = nnls(cols, rx)
    if not np.any(amps > 0):
        raise ValueError("channel estimate is degenerate")
    keep = np.flatnonzero(amps >= prune * amps.max())
    if keep[0] != 0:
        raise ValueError("no tap found at zero delay; probe is misaligned")
    return MultipathChannel(tuple(keep / cfg.n_samp), tuple(amps[keep]))
