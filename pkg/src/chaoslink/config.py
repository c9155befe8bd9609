"""Simulation configuration: YAML file <-> validated dataclasses."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .channel import MultipathChannel
from .neuralnet import TrainingConfig
from .waveform import WaveformConfig

__all__ = ["ConfigError", "NoiseConfig", "CnnConfig", "SweepConfig", "SimulationConfig", "load_config"]


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


@dataclass(frozen=True)
class NoiseConfig:
    ebn0_db: tuple[float, ...] = (8.0, 10.0, 12.0)
    master_seed: int = 0


@dataclass(frozen=True)
class CnnConfig:
    kernels: int = 8
    lr: float = 0.05
    epochs: int = 2000
    batch: int = 16
    retrain_per_frame: bool = True
    seed: int = 0
    model_path: str | None = None
    future_scheme: str = "window"

    def training_config(self) -> TrainingConfig:
        return TrainingConfig(learning_rate=self.lr, epochs=self.epochs, batch=self.batch, seed=self.seed)


@dataclass(frozen=True)
class SweepConfig:
    bits_budget: int = 100_000
    error_budget: int = 200
    decoders: tuple = ("zero", "past", "cnn", "genie")
    payload_bits: int = 10_000
    csi: str = "genie"
    delay_grid: int = 48


@dataclass(frozen=True)
class SimulationConfig:
    waveform: WaveformConfig = field(default_factory=WaveformConfig)
    probe_order: int = 6
    channel: MultipathChannel = field(default_factory=MultipathChannel.default_three_path)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    cnn: CnnConfig = field(default_factory=CnnConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)

    @classmethod
    def from_dict(cls, raw: dict | None) -> "SimulationConfig":
        from .harness import DecoderKind

        raw = dict(raw or {})
        unknown = set(raw) - {"waveform", "channel", "noise", "cnn", "sweep"}
        if unknown:
            raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown))}")
        wf = _section(raw, "waveform", {"f", "n_samp", "tail_symbols", "probe_order"})
        ch = _section(raw, "channel", {"taps", "gamma", "delays"})
        nz = _section(raw, "noise", {"ebn0_db", "master_seed"})
        cn = _section(raw, "cnn", {"kernels", "lr", "epochs", "batch", "retrain_per_frame", "seed", "model_path", "future_scheme"})
        sw = _section(raw, "sweep", {"bits_budget", "error_budget", "decoders", "payload_bits", "csi", "delay_grid"})

        probe_order = _int(wf.pop("probe_order", 6), "waveform.probe_order", 1)
        waveform = _build("waveform", WaveformConfig, {
            "f": _num(wf.get("f", 600.0), "waveform.f"),
            "n_samp": _int(wf.get("n_samp", 16), "waveform.n_samp", 2),
            "tail_symbols": _int(wf.get("tail_symbols", 16), "waveform.tail_symbols", 1),
        })
        if waveform.n_samp * 4 != round((waveform.n_samp * 4) ** 0.5) ** 2:
            raise ConfigError("waveform.n_samp: 4*n_samp must be a perfect square for the CNN window")
        channel = _parse_channel(ch, waveform)

        ebn0 = nz.get("ebn0_db", [8.0, 10.0, 12.0])
        if not isinstance(ebn0, (list, tuple)):
            ebn0 = [ebn0]
        if not ebn0:
            raise ConfigError("noise.ebn0_db: need at least one value")
        noise = NoiseConfig(
            tuple(_num(v, "noise.ebn0_db") for v in ebn0),
            _int(nz.get("master_seed", 0), "noise.master_seed", 0),
        )
        cnn = _build("cnn", CnnConfig, {
            "kernels": _int(cn.get("kernels", 8), "cnn.kernels", 1),
            "lr": _num(cn.get("lr", 0.05), "cnn.lr"),
            "epochs": _int(cn.get("epochs", 2000), "cnn.epochs", 1),
            "batch": _int(cn.get("batch", 16), "cnn.batch", 1),
            "retrain_per_frame": _bool(cn.get("retrain_per_frame", True), "cnn.retrain_per_frame"),
            "seed": _int(cn.get("seed", 0), "cnn.seed", 0),
            "model_path": cn.get("model_path"),
            "future_scheme": cn.get("future_scheme", "window"),
        })
        if cnn.future_scheme not in ("window", "sliding"):
            raise ConfigError(f"cnn.future_scheme: must be 'window' or 'sliding', got {cnn.future_scheme!r}")
        if cnn.lr < 0:
            raise ConfigError("cnn.lr: must be non-negative")
        decoders = sw.get("decoders", ["zero", "past", "cnn", "genie"])
        if not isinstance(decoders, (list, tuple)) or not decoders:
            raise ConfigError("sweep.decoders: need a non-empty list")
        try:
            decoders = tuple(DecoderKind.parse(str(d)) for d in decoders)
        except ValueError as exc:
            raise ConfigError(f"sweep.decoders: {exc}") from None
        csi = sw.get("csi", "genie")
        if csi not in ("genie", "estimate"):
            raise ConfigError(f"sweep.csi: must be 'genie' or 'estimate', got {csi!r}")
        sweep = SweepConfig(
            bits_budget=_int(sw.get("bits_budget", 100_000), "sweep.bits_budget", 1),
            error_budget=_int(sw.get("error_budget", 200), "sweep.error_budget", 1),
            decoders=decoders,
            payload_bits=_int(sw.get("payload_bits", 10_000), "sweep.payload_bits", 1),
            csi=csi,
            delay_grid=_int(sw.get("delay_grid", 48), "sweep.delay_grid", 0),
        )
        return cls(waveform, probe_order, channel, noise, cnn, sweep)


def load_config(path) -> SimulationConfig:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML ({exc})") from None
    if raw is not None and not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return SimulationConfig.from_dict(raw)


def _section(raw, name, allowed):
    sec = raw.get(name) or {}
    if not isinstance(sec, dict):
        raise ConfigError(f"{name}: must be a mapping")
    extra = set(sec) - allowed
    if extra:
        raise ConfigError(f"{name}: unknown field(s) {', '.join(sorted(extra))}")
    return dict(sec)


def _num(v, name):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{name}: expected a number, got {v!r}")
    return float(v)


def _int(v, name, minimum):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{name}: expected an integer, got {v!r}")
    if v < minimum:
        raise ConfigError(f"{name}: must be >= {minimum}, got {v}")
    return v


def _bool(v, name):
    if not isinstance(v, bool):
        raise ConfigError(f"{name}: expected true/false, got {v!r}")
    return v


def _build(name, cls, kwargs):
    try:
        return cls(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{name}: {exc}") from None


def _parse_channel(ch, waveform) -> MultipathChannel:
    if not ch:
        return MultipathChannel.default_three_path()
    try:
        if "taps" in ch:
            if "gamma" in ch or "delays" in ch:
                raise ConfigError("channel: give either taps or gamma+delays, not both")
            taps = ch["taps"]
            if not isinstance(taps, list) or not all(isinstance(t, (list, tuple)) and len(t) == 2 for t in taps):
                raise ConfigError("channel.taps: expected a list of [tau, alpha] pairs")
            built = MultipathChannel(
                tuple(_num(t[0], "channel.taps") for t in taps),
                tuple(_num(t[1], "channel.taps") for t in taps),
            )
        else:
            if "gamma" not in ch or "delays" not in ch:
                raise ConfigError("channel: gamma and delays must be given together")
            built = MultipathChannel.from_gamma(
                _num(ch["gamma"], "channel.gamma"),
                [_num(d, "channel.delays") for d in ch["delays"]],
            )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"channel: {exc}") from None
    from .channel import delay_samples

    try:
        for tau in built.taus:
            delay_samples(tau, waveform)
    except ValueError as exc:
        raise ConfigError(f"channel: {exc}") from None
    return built
