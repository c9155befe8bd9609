"""Chaotic baseband waveform generation.

Time is measured in symbol durations throughout, so the decay rate per
symbol is ``ln 2`` and the oscillation phase per symbol is ``2*pi``. The
base frequency kept in :class:`WaveformConfig` is only used for reporting.

Sampled waveforms are plain ``float64`` arrays. A waveform produced by
:func:`shape_forming_filter` for ``N`` symbols has ``N*n_samp +
tail_symbols*n_samp + 1`` samples, and sample ``k`` sits at normalized time
``k/n_samp - tail_symbols``; :class:`WaveformHeader` records that layout.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

__all__ = [
    "WaveformConfig",
    "WaveformHeader",
    "Frame",
    "basis_function",
    "sampled_basis",
    "shape_forming_filter",
    "debruijn_probe",
    "build_frame",
    "bits_to_symbols",
    "symbols_to_bits",
]


@dataclass(frozen=True)
class WaveformConfig:
    """Sampling and truncation parameters of the chaotic basis function.

    Parameters
    ----------
    f : float
        Base frequency in Hz. Not used by any computation.
    n_samp : int
        Samples per symbol.
    tail_symbols : int
        The basis function is clipped to ``[-tail_symbols, 1)``.
    """

    f: float = 600.0
    n_samp: int = 16
    tail_symbols: int = 16
    beta_norm: float = field(default=float(np.log(2.0)), init=False)
    omega_norm: float = field(default=float(2.0 * np.pi), init=False)

    def __post_init__(self):
        if int(self.n_samp) != self.n_samp or self.n_samp < 2:
            raise ValueError(f"n_samp must be an integer >= 2, got {self.n_samp!r}")
        if int(self.tail_symbols) != self.tail_symbols or self.tail_symbols < 1:
            raise ValueError(f"tail_symbols must be a positive integer, got {self.tail_symbols!r}")
        if np.exp(-self.beta_norm * self.tail_symbols) >= 1e-4:
            raise ValueError(
                f"tail_symbols={self.tail_symbols} leaves a truncation residual >= 1e-4; use >= 14"
            )
        if self.f <= 0:
            raise ValueError(f"f must be positive, got {self.f!r}")

    @property
    def beta(self) -> float:
        """Decay rate in 1/s (``f ln 2``)."""
        return self.f * self.beta_norm

    @property
    def omega(self) -> float:
        """Angular base frequency in rad/s."""
        return self.f * self.omega_norm

    @property
    def pad_samples(self) -> int:
        """Samples a filtered waveform carries beyond ``n_symbols*n_samp``."""
        return self.tail_symbols * self.n_samp + 1


@dataclass(frozen=True)
class WaveformHeader:
    """Layout record that accompanies a flat sampled waveform."""

    n_samp: int
    n_symbols: int
    tail_symbols: int

    @classmethod
    def for_symbols(cls, n_symbols: int, cfg: WaveformConfig) -> "WaveformHeader":
        return cls(cfg.n_samp, int(n_symbols), cfg.tail_symbols)

    @property
    def length(self) -> int:
        return (self.n_symbols + self.tail_symbols) * self.n_samp + 1

    def sample_times(self) -> np.ndarray:
        return np.arange(self.length) / self.n_samp - self.tail_symbols

    def to_dict(self) -> dict:
        return asdict(self)


def basis_function(t, cfg: WaveformConfig = WaveformConfig()):
    """Evaluate the chaotic basis function ``p(t)``.

    For ``floor(t) < 0`` the function is a decaying oscillation
    ``(1 - e^-b) e^{b t} (cos w t - (b/w) sin w t)``; on ``[0, 1)`` it is
    ``1 - e^{-b (t-1)} (cos w t - (b/w) sin w t)``; it is zero for
    ``t >= 1`` and for ``t < -tail_symbols``.

    Parameters
    ----------
    t : float or array_like
        Time in symbol durations.
    cfg : WaveformConfig

    Returns
    -------
    float or numpy.ndarray
        Same shape as ``t``.
    """
    t_arr = np.asarray(t, dtype=float)
    b, w = cfg.beta_norm, cfg.omega_norm
    out = np.zeros_like(t_arr)
    osc = np.cos(w * t_arr) - (b / w) * np.sin(w * t_arr)
    left = (t_arr < 0) & (t_arr >= -cfg.tail_symbols)
    main = (t_arr >= 0) & (t_arr < 1)
    out[left] = (1.0 - np.exp(-b)) * np.exp(b * t_arr[left]) * osc[left]
    out[main] = 1.0 - np.exp(-b * (t_arr[main] - 1.0)) * osc[main]
    if np.ndim(t) == 0:
        return float(out)
    return out


def sampled_basis(cfg: WaveformConfig) -> np.ndarray:
    """Basis function on the grid ``t = j/n_samp``, ``j = -tail*n_samp .. n_samp``."""
    j = np.arange(-cfg.tail_symbols * cfg.n_samp, cfg.n_samp + 1)
    return basis_function(j / cfg.n_samp, cfg)


def shape_forming_filter(symbols, cfg: WaveformConfig = WaveformConfig()) -> np.ndarray:
    """Superpose shifted basis functions, ``u(t) = sum_m s_m p(t - m)``.

    Symbols are normally ``+-1``; any real weights are accepted so that the
    filter can be probed with partial patterns (zeros mark absent symbols).
    """
    s = np.asarray(symbols, dtype=float)
    if s.ndim != 1 or s.size == 0:
        raise ValueError("symbols must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(s)):
        raise ValueError("symbols must be finite")
    pulse = sampled_basis(cfg)
    out = np.zeros((s.size - 1) * cfg.n_samp + pulse.size)
    # accumulate in symbol order so a whole-symbol shift reproduces the output bit for bit
    for m, sm in enumerate(s):
        if sm:
            out[m * cfg.n_samp : m * cfg.n_samp + pulse.size] += sm * pulse
    return out


def debruijn_probe(order: int = 6) -> np.ndarray:
    """Binary de Bruijn sequence B(2, order) as a uint8 array of length ``2**order``.

    Built with the standard Lyndon-word concatenation, so it starts with
    ``order`` zeros.
    """
    if int(order) != order or not 1 <= order <= 16:
        raise ValueError(f"order must be an integer in [1, 16], got {order!r}")
    order = int(order)
    a = [0] * (order + 1)
    seq: list[int] = []

    def db(t, p):
        if t > order:
            if order % p == 0:
                seq.extend(a[1 : p + 1])
        else:
            a[t] = a[t - p]
            db(t + 1, p)
            for j in range(a[t - p] + 1, 2):
                a[t] = j
                db(t + 1, t)

    db(1, 1)
    return np.array(seq, dtype=np.uint8)


def bits_to_symbols(bits) -> np.ndarray:
    """Map bit 0 to -1 and bit 1 to +1."""
    b = np.asarray(bits)
    if b.size and not np.all((b == 0) | (b == 1)):
        raise ValueError("bits must be 0 or 1")
    return 2.0 * b.astype(float) - 1.0


def symbols_to_bits(symbols) -> np.ndarray:
    return (np.asarray(symbols) > 0).astype(np.uint8)


@dataclass(frozen=True)
class Frame:
    """Probe bits followed by payload bits, with the +-1 symbol stream."""

    probe_bits: np.ndarray
    payload_bits: np.ndarray
    symbols: np.ndarray

    @property
    def n_probe(self) -> int:
        return len(self.probe_bits)

    @property
    def n_payload(self) -> int:
        return len(self.payload_bits)

    @property
    def bits(self) -> np.ndarray:
        return np.concatenate([self.probe_bits, self.payload_bits])


def build_frame(payload_bits, cfg: WaveformConfig = WaveformConfig(), probe_order: int = 6) -> Frame:
    """Assemble a frame: cyclically extended de Bruijn probe, then payload.

    The probe is ``debruijn_probe(probe_order)`` followed by its first
    ``probe_order - 1`` bits, so every cyclic pattern also appears linearly.
    """
    payload = np.asarray(payload_bits, dtype=np.uint8).ravel()
    if payload.size == 0:
        raise ValueError("payload must be non-empty")
    db = debruijn_probe(probe_order)
    probe = np.concatenate([db, db[: probe_order - 1]])
    symbols = bits_to_symbols(np.concatenate([probe, payload]))
    return Frame(probe_bits=probe, payload_bits=payload, symbols=symbols)
