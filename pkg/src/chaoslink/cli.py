"""Command line entry point: ``chaoslink {sweep,train,coeffs,simulate} CONFIG``."""
from __future__ import annotations

import argparse
import csv
import io
import logging
import sys

import numpy as np

from .channel import NoiseSpec
from .config import ConfigError, load_config
from .harness import (
    DecoderKind,
    FrameMeta,
    GENIE_RANGE,
    decode_frame,
    emit_csv,
    predict_future_symbols,
    receiver_front_end,
    run_ber_sweep,
    train_on_probe,
    transmit_frame,
)
from .isi import N_FUTURE, compute_isi_coefficients
from .neuralnet import save_model
from .receiver import calibrate_timing
from .waveform import build_frame


def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _one_frame(config, ebn0_db, seed):
    cfg = config.waveform
    rng = np.random.default_rng(seed)
    payload = rng.integers(0, 2, config.sweep.payload_bits, dtype=np.uint8)
    frame = build_frame(payload, cfg, config.probe_order)
    noise = None if ebn0_db is None else NoiseSpec(ebn0_db, seed + 1)
    trans = transmit_frame(frame, cfg, config.channel, noise)
    meta = FrameMeta(cfg, frame.probe_bits, frame.n_payload, calibrate_timing(cfg, config.channel))
    return trans, meta


def cmd_sweep(args, config):
    _write(emit_csv(run_ber_sweep(config, progress=args.verbose)), args.output)


def cmd_train(args, config):
    trans, meta = _one_frame(config, args.ebn0, config.noise.master_seed)
    filtered, _ = receiver_front_end(trans.rx, meta)
    model, norm = train_on_probe(filtered, meta, config.cnn.kernels, config.cnn.training_config())
    save_model(model, args.output, norm)


def cmd_coeffs(args, config):
    coeffs = compute_isi_coefficients(config.channel, config.waveform, GENIE_RANGE)
    _write(coeffs.to_csv(), args.output)


def cmd_simulate(args, config):
    ebn0 = args.ebn0 if args.ebn0 is not None else config.noise.ebn0_db[0]
    trans, meta = _one_frame(config, ebn0, config.noise.master_seed)
    filtered, y = receiver_front_end(trans.rx, meta)
    coeffs = compute_isi_coefficients(config.channel, config.waveform, GENIE_RANGE, meta.timing_offset)
    decoded = {}
    future = None
    for d in config.sweep.decoders:
        kwargs = {}
        if d is DecoderKind.CNN:
            model, norm = train_on_probe(filtered, meta, config.cnn.kernels, config.cnn.training_config())
            future = predict_future_symbols(filtered, meta, model, norm, config.cnn.future_scheme)
            kwargs["future_symbols"] = future
        decoded[d] = decode_frame(
            trans.rx, meta, d, coeffs, true_bits=trans.frame.bits, filtered=filtered, **kwargs
        )
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    head = ["n", "bit", "y"] + [f"pred_s{k}" for k in range(1, N_FUTURE + 1)] + [f"dec_{d.value}" for d in decoded]
    w.writerow(head)
    for j in range(meta.n_payload):
        n = meta.n_probe + j
        pred = [] if future is None else [repr(float(v)) for v in future[n]]
        pred += [""] * (N_FUTURE - len(pred))
        w.writerow([n, int(trans.frame.payload_bits[j]), repr(float(y[n]))] + pred + [int(b[j]) for b in decoded.values()])
    _write(buf.getvalue(), args.output)
    errs = ", ".join(f"{d.value}={int(np.sum(b != trans.frame.payload_bits))}" for d, b in decoded.items())
    print(f"Eb/N0={ebn0:g} dB, {meta.n_payload} payload bits, errors: {errs}", file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chaoslink", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run the BER sweep and write CSV")
    p.set_defaults(func=cmd_sweep)
    p.add_argument("-o", "--output", help="CSV path (default stdout)")

    p = sub.add_parser("train", help="train a CNN on one probe and save it")
    p.set_defaults(func=cmd_train)
    p.add_argument("-o", "--output", required=True, help="model file")
    p.add_argument("--ebn0", type=float, default=None, help="Eb/N0 of the training frame (default noiseless)")

    p = sub.add_parser("coeffs", help="dump the ISI coefficient table as CSV")
    p.set_defaults(func=cmd_coeffs)
    p.add_argument("-o", "--output")

    p = sub.add_parser("simulate", help="decode one frame and dump a per-symbol trace")
    p.set_defaults(func=cmd_simulate)
    p.add_argument("-o", "--output")
    p.add_argument("--ebn0", type=float, default=None)

    for p in sub.choices.values():
        p.add_argument("config", help="YAML configuration file")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        config = load_config(args.config)
        args.func(args, config)
    except ConfigError as exc:
        print(f"chaoslink: config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, IndexError, OSError) as exc:
        print(f"chaoslink: error: {exc}", file=sys.stderr)
        return 1
    return 0
