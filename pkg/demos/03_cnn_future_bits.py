"""Training the CNN on a frame's probe and reading future bits from it.

Compares two ways of turning CNN outputs into the three future symbols
that the threshold needs:

* ``window``: the single window that ends two symbols ahead gives all three
  bits (its past, current and look-ahead outputs);
* ``sliding``: each future symbol comes from the look-ahead output of a
  separate window.

The look-ahead output has little energy to work with, so the sliding
scheme is much less reliable once noise is present.

    python demos/03_cnn_future_bits.py
"""
# %%
import numpy as np

from chaoslink.channel import MultipathChannel, NoiseSpec
from chaoslink.harness import FrameMeta, oracle_future_symbols, predict_future_symbols, receiver_front_end, train_on_probe, transmit_frame
from chaoslink.neuralnet import TrainingConfig
from chaoslink.receiver import calibrate_timing
from chaoslink.waveform import WaveformConfig, build_frame

cfg = WaveformConfig()
ch = MultipathChannel.default_three_path()
rng = np.random.default_rng(3)

for ebn0 in (None, 12.0, 8.0):
    frame = build_frame(rng.integers(0, 2, 3000, dtype=np.uint8), cfg)
    trans = transmit_frame(frame, cfg, ch, None if ebn0 is None else NoiseSpec(ebn0, 7))
    meta = FrameMeta(cfg, frame.probe_bits, frame.n_payload, calibrate_timing(cfg, ch))
    filtered, _ = receiver_front_end(trans.rx, meta)
    model, norm = train_on_probe(filtered, meta, 8, TrainingConfig(seed=1))
    truth = oracle_future_symbols(frame.bits, meta.n_probe)[meta.n_probe : -3]
    label = "noiseless" if ebn0 is None else f"{ebn0:g} dB"
    for scheme in ("window", "sliding"):
        guess = predict_future_symbols(filtered, meta, model, norm, scheme)[meta.n_probe : -3]
        acc = np.mean(guess == truth, axis=0)
        print(f"{label:>9} {scheme:>7}: accuracy for s(n+1), s(n+2), s(n+3) = " + ", ".join(f"{a:.3f}" for a in acc))
