"""End-to-end frame pipeline, decoder strategies and Monte-Carlo BER sweeps."""
from __future__ import annotations

import csv
import enum
import io
import logging
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import MultipathChannel, NoiseSpec, add_awgn, apply_multipath, measure_eb
from .config import SimulationConfig, load_config
from .isi import (
    N_FUTURE,
    N_PAST,
    IsiCoefficients,
    compute_isi_coefficients,
    estimate_channel,
)
from .neuralnet import (
    CnnModel,
    TrainingConfig,
    build_training_set,
    extract_windows,
    load_model,
    predict_classes,
    train,
)
from .receiver import calibrate_timing, matched_filter, sample_decisions
from .waveform import Frame, WaveformConfig, build_frame, shape_forming_filter

__all__ = [
    "DecoderKind",
    "FrameMeta",
    "BerPoint",
    "BerCurve",
    "Transmission",
    "transmit_frame",
    "receiver_front_end",
    "predict_future_symbols",
    "oracle_future_symbols",
    "FUTURE_SCHEMES",
    "decode_frame",
    "train_on_probe",
    "run_ber_sweep",
    "emit_csv",
    "parse_csv",
    "GENIE_RANGE",
]

log = logging.getLogger(__name__)

GENIE_RANGE = (-8, 8)


class DecoderKind(str, enum.Enum):
    ZERO = "zero"
    PAST_ONLY = "past"
    CNN = "cnn"
    GENIE = "genie"

    @classmethod
    def parse(cls, name: str) -> "DecoderKind":
        aliases = {
            "zerothreshold": cls.ZERO,
            "pastonly": cls.PAST_ONLY,
            "cnnpredicted": cls.CNN,
            "genieoptimal": cls.GENIE,
        }
        key = name.strip().lower().replace("_", "").replace("-", "")
        if key in aliases:
            return aliases[key]
        return cls(name.strip().lower())


@dataclass(frozen=True)
class FrameMeta:
    """What the receiver knows about a frame before decoding it."""

    cfg: WaveformConfig
    probe_bits: np.ndarray
    n_payload: int
    timing_offset: int

    @property
    def n_probe(self) -> int:
        return len(self.probe_bits)

    @property
    def n_symbols(self) -> int:
        return self.n_probe + self.n_payload


@dataclass
class Transmission:
    frame: Frame
    tx: np.ndarray
    rx: np.ndarray
    eb: float


def transmit_frame(frame: Frame, cfg: WaveformConfig, ch: MultipathChannel, noise: NoiseSpec | None) -> Transmission:
    """Shape, propagate and (optionally) add noise calibrated on the sent waveform."""
    tx = shape_forming_filter(frame.symbols, cfg)
    eb = measure_eb(tx, len(frame.symbols))
    rx = apply_multipath(tx, ch, cfg)
    if noise is not None and np.isfinite(noise.ebn0_db):
        rx = add_awgn(rx, eb, noise)
    return Transmission(frame, tx, rx, eb)


def receiver_front_end(rx, meta: FrameMeta):
    """Matched filter output and per-symbol decision samples of a frame."""
    filtered = matched_filter(rx, meta.cfg)
    # future-bit windows for the last symbols reach past the waveform end
    need = meta.timing_offset + (meta.n_symbols + N_FUTURE) * meta.cfg.n_samp + 1
    if filtered.size < need:
        filtered = np.concatenate([filtered, np.zeros(need - filtered.size)])
    y = sample_decisions(filtered, meta.n_symbols, meta.timing_offset, meta.cfg).y
    return filtered, y


def train_on_probe(filtered, meta: FrameMeta, n_kernels: int, tcfg: TrainingConfig):
    """Train a fresh CNN on the frame's probe windows; returns ``(model, norm)``."""
    x, labels, norm = build_training_set(filtered, meta.probe_bits, meta.timing_offset, meta.cfg.n_samp)
    model, _ = train(CnnModel.init(n_kernels, seed=tcfg.seed), x, labels, tcfg)
    return model, norm


FUTURE_SCHEMES = ("window", "sliding")


def predict_future_symbols(filtered, meta: FrameMeta, model: CnnModel, norm: float, scheme: str = "window") -> np.ndarray:
    """CNN guesses of the three future neighbours of every payload symbol.

    Row ``n`` of the ``(n_symbols, 3)`` result holds the +-1 guesses of
    ``s_{n+1}, s_{n+2}, s_{n+3}``; probe rows are NaN.

    ``"window"`` reads all three bits off the single window that ends at
    symbol ``n+2``. ``"sliding"`` takes ``s_{n+k}`` from the future-bit
    output of the window ending at ``n+k-1``. Both need two symbols of
    buffered waveform beyond symbol ``n``.
    """
    if scheme not in FUTURE_SCHEMES:
        raise ValueError(f"unknown future scheme {scheme!r}")
    out = np.full((meta.n_symbols, N_FUTURE), np.nan)
    n0, n_sym = meta.n_probe, meta.n_symbols
    if n0 >= n_sym:
        return out
    positions = np.arange(n0, n_sym + N_FUTURE - 1)
    windows = extract_windows(filtered, positions, meta.timing_offset, meta.cfg.n_samp, norm)
    classes = predict_classes(model, windows)
    bits = np.stack([(classes >> 2) & 1, (classes >> 1) & 1, classes & 1], axis=1)
    sym = 2.0 * bits - 1.0
    rows = np.arange(n_sym - n0)
    if scheme == "window":
        out[n0:] = sym[rows + N_FUTURE - 1]
    else:
        for k in range(1, N_FUTURE + 1):
            out[n0:, k - 1] = sym[rows + k - 1, 2]
    return out


def oracle_future_symbols(true_bits, n_probe: int) -> np.ndarray:
    """Perfect predictor: true ``s_{n+k}`` where it exists, NaN elsewhere."""
    s = 2.0 * np.asarray(true_bits, dtype=float) - 1.0
    out = np.full((s.size, N_FUTURE), np.nan)
    for k in range(1, N_FUTURE + 1):
        out[n_probe : s.size - k, k - 1] = s[n_probe + k :]
    return out


def decode_frame(
    rx_waveform,
    meta: FrameMeta,
    decoder: DecoderKind,
    coeffs: IsiCoefficients,
    model: CnnModel | None = None,
    norm: float | None = None,
    true_bits=None,
    future_symbols=None,
    filtered=None,
    future_scheme: str = "window",
) -> np.ndarray:
    """Decode the payload bits of one received frame.

    Parameters
    ----------
    rx_waveform : array_like
        Received baseband samples (same origin as the transmitted waveform).
    meta : FrameMeta
    decoder : DecoderKind
    coeffs : IsiCoefficients
        Must cover ``[-8, 8]`` for the genie decoder.
    model, norm
        Trained CNN and its input normalization, for ``DecoderKind.CNN``.
    true_bits : array_like, optional
        All transmitted bits (probe then payload), for ``DecoderKind.GENIE``.
    future_symbols : array_like, optional
        Replaces the CNN: a ``(n_symbols, 3)`` array whose row ``n`` gives
        the values used for ``s_{n+1}, s_{n+2}, s_{n+3}``.
    filtered : array_like, optional
        Precomputed :func:`receiver_front_end` output, to skip filtering.
    future_scheme : {"window", "sliding"}
        How CNN outputs map to future symbols, see :func:`predict_future_symbols`.

    Returns
    -------
    numpy.ndarray of uint8, the decoded payload bits.
    """
    decoder = DecoderKind(decoder)
    if filtered is None:
        filtered, y = receiver_front_end(rx_waveform, meta)
    else:
        filtered = np.asarray(filtered, dtype=float)
        y = sample_decisions(filtered, meta.n_symbols, meta.timing_offset, meta.cfg).y
    n0, n_sym = meta.n_probe, meta.n_symbols
    csum = coeffs.summed()

    if decoder is DecoderKind.ZERO:
        return (y[n0:] >= 0).astype(np.uint8)

    if decoder is DecoderKind.GENIE:
        if true_bits is None:
            raise ValueError("the genie decoder needs the true transmitted bits")
        s = 2.0 * np.asarray(true_bits, dtype=float) - 1.0
        if s.size != n_sym:
            raise ValueError(f"true_bits has {s.size} entries, frame has {n_sym} symbols")
        theta = np.zeros(n_sym)
        for i in range(GENIE_RANGE[0], GENIE_RANGE[1] + 1):
            if i == 0:
                continue
            ci = csum[coeffs.column(i)]
            if i < 0:
                theta[-i:] += ci * s[: n_sym + i]
            else:
                theta[: n_sym - i] += ci * s[i:]
        return (y[n0:] - theta[n0:] >= 0).astype(np.uint8)

    if decoder is DecoderKind.CNN:
        if future_symbols is None:
            if model is None or norm is None:
                raise ValueError("the CNN decoder needs a trained model and its norm")
            future_symbols = predict_future_symbols(filtered, meta, model, norm, future_scheme)
        future = np.asarray(future_symbols, dtype=float)
        if future.shape != (n_sym, N_FUTURE):
            raise ValueError(f"future_symbols must have shape {(n_sym, N_FUTURE)}")
        i_future = np.zeros(n_sym)
        for k in range(1, N_FUTURE + 1):
            # neighbours past the frame end do not exist
            rows = np.arange(n0, n_sym - k)
            i_future[rows] += csum[coeffs.column(k)] * future[rows, k - 1]
    elif decoder is DecoderKind.PAST_ONLY:
        i_future = np.zeros(n_sym)
    else:
        raise ValueError(f"unsupported decoder {decoder!r}")

    past_c = [float(csum[coeffs.column(-k)]) for k in range(1, N_PAST + 1)]
    s_hat = [2.0 * b - 1.0 for b in np.asarray(meta.probe_bits, dtype=float)]
    yl, fl = y.tolist(), i_future.tolist()
    for n in range(n0, n_sym):
        theta = fl[n]
        for k, ck in enumerate(past_c, start=1):
            if n - k >= 0:
                theta += ck * s_hat[n - k]
        s_hat.append(1.0 if yl[n] - theta >= 0 else -1.0)
    return (np.asarray(s_hat[n0:]) > 0).astype(np.uint8)


@dataclass(frozen=True)
class BerPoint:
    ebn0_db: float
    bit_errors: int
    bits_total: int

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits_total


@dataclass
class BerCurve:
    decoder: DecoderKind
    seed: int
    channel: MultipathChannel | None = None
    points: list[BerPoint] = field(default_factory=list)


def _frame_seeds(master: int, point: int, frame: int) -> dict[str, int]:
    ss = np.random.SeedSequence([master, point, frame])
    payload, noise, cnn = (int(c.generate_state(1)[0]) for c in ss.spawn(3))
    return {"payload": payload, "noise": noise, "cnn": cnn}


def run_ber_sweep(config: SimulationConfig | str | os.PathLike, progress: bool = False) -> dict[DecoderKind, BerCurve]:
    """Monte-Carlo BER of every requested decoder at every Eb/N0 point.

    All decoders see the same frames. A decoder stops accumulating at a
    point once it has ``error_budget`` errors; the point ends when every
    decoder has stopped or ``bits_budget`` payload bits were counted. The
    result depends only on ``config`` (including its master seed).
    ``config`` may also be a path to a YAML file.
    """
    if not isinstance(config, SimulationConfig):
        config = load_config(config)
    cfg = config.waveform
    ch = config.channel
    decoders = list(config.sweep.decoders)
    true_offset = calibrate_timing(cfg, ch)
    genie_coeffs = compute_isi_coefficients(ch, cfg, GENIE_RANGE, true_offset)
    tcfg = config.cnn.training_config()
    shared_model = None
    if config.cnn.model_path and not config.cnn.retrain_per_frame:
        shared_model = load_model(config.cnn.model_path)
        if shared_model[1] is None:
            raise ValueError(f"{config.cnn.model_path}: model file carries no input norm")
    curves = {d: BerCurve(d, config.noise.master_seed, ch) for d in decoders}

    for p_idx, ebn0 in enumerate(config.noise.ebn0_db):
        errors = dict.fromkeys(decoders, 0)
        counted = dict.fromkeys(decoders, 0)
        f_idx = 0
        while True:
            active = [
                d for d in decoders
                if counted[d] < config.sweep.bits_budget and errors[d] < config.sweep.error_budget
            ]
            if not active:
                break
            seeds = _frame_seeds(config.noise.master_seed, p_idx, f_idx)
            f_idx += 1
            rng = np.random.default_rng(seeds["payload"])
            payload = rng.integers(0, 2, config.sweep.payload_bits, dtype=np.uint8)
            frame = build_frame(payload, cfg, config.probe_order)
            trans = transmit_frame(frame, cfg, ch, NoiseSpec(ebn0, seeds["noise"]))

            if config.sweep.csi == "genie":
                offset, coeffs = true_offset, genie_coeffs
            else:
                est = _estimate_from_probe(trans.rx, frame, cfg, config.sweep.delay_grid)
                offset = calibrate_timing(cfg, est)
                coeffs = compute_isi_coefficients(est, cfg, GENIE_RANGE, offset)
            meta = FrameMeta(cfg, frame.probe_bits, frame.n_payload, offset)
            filtered, _ = receiver_front_end(trans.rx, meta)

            model = norm = None
            if DecoderKind.CNN in active:
                if config.cnn.retrain_per_frame:
                    model, norm = train_on_probe(filtered, meta, config.cnn.kernels, replace(tcfg, seed=seeds["cnn"]))
                else:
                    if shared_model is None:
                        shared_model = train_on_probe(filtered, meta, config.cnn.kernels, tcfg)
                    model, norm = shared_model

            for d in active:
                bits = decode_frame(
                    trans.rx, meta, d, coeffs, model=model, norm=norm,
                    true_bits=frame.bits, filtered=filtered, future_scheme=config.cnn.future_scheme,
                )
                errors[d] += int(np.count_nonzero(bits != frame.payload_bits))
                counted[d] += frame.n_payload
        for d in decoders:
            curves[d].points.append(BerPoint(float(ebn0), errors[d], counted[d]))
            if progress:
                log.info("%s Eb/N0=%g dB: %d/%d", d.value, ebn0, errors[d], counted[d])
    return curves


def _estimate_from_probe(rx, frame: Frame, cfg: WaveformConfig, delay_grid: int) -> MultipathChannel:
    # samples before the first payload tail reaches in depend on the probe only
    n_clean = (frame.n_probe - cfg.tail_symbols) * cfg.n_samp
    if n_clean <= delay_grid:
        raise ValueError("probe is too short for channel estimation")
    probe_tx = shape_forming_filter(2.0 * frame.probe_bits - 1.0, cfg)
    return estimate_channel(rx[:n_clean], probe_tx[:n_clean], cfg, delay_grid)


CSV_HEADER = ["decoder", "ebn0_db", "bit_errors", "bits_total", "ber", "seed"]


def emit_csv(curves) -> str:
    """CSV text with one row per (decoder, Eb/N0) point."""
    curves = list(curves.values()) if isinstance(curves, dict) else list(curves)
    if not curves:
        raise ValueError("no curves to write")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for curve in curves:
        for pt in curve.points:
            writer.writerow(
                [DecoderKind(curve.decoder).value, repr(pt.ebn0_db), pt.bit_errors, pt.bits_total, repr(pt.ber), curve.seed]
            )
    return buf.getvalue()


def parse_csv(text: str) -> list[BerCurve]:
    """Read :func:`emit_csv` output back into curves (channel left unset)."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != CSV_HEADER:
        raise ValueError("unexpected CSV header")
    curves: dict[tuple[str, int], BerCurve] = {}
    for row in rows[1:]:
        dec, ebn0, errs, total, _, seed = row
        key = (dec, int(seed))
        if key not in curves:
            curves[key] = BerCurve(DecoderKind(dec), int(seed))
        curves[key].points.append(BerPoint(float(ebn0), int(errs), int(total)))
    return list(curves.values())
