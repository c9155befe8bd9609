"""Chaotic baseband waveform, multipath and matched filter.

Builds a short frame, pushes it through the default three-path channel and
shows where the receiver samples the matched-filter output.

    python demos/01_waveform_and_matched_filter.py
"""
# %%
import numpy as np

from chaoslink.channel import MultipathChannel, apply_multipath
from chaoslink.receiver import calibrate_timing, matched_filter, sample_decisions
from chaoslink.waveform import WaveformConfig, WaveformHeader, basis_function, shape_forming_filter

cfg = WaveformConfig()
print(f"n_samp={cfg.n_samp}, tail={cfg.tail_symbols} symbols, exp(-beta/f)={np.exp(-cfg.beta / cfg.f)}")

# %% The basis function: decaying oscillation for t < 0, one active symbol on [0, 1).
for t in (-3.0, -1.0, -0.25, 0.0, 0.5, 0.99, 1.0):
    print(f"p({t:+.2f}) = {basis_function(t, cfg):+.5f}")

# %% Shape a few symbols and send them through three paths.
symbols = np.array([1, -1, 1, 1, -1, -1, 1, -1], dtype=float)
tx = shape_forming_filter(symbols, cfg)
header = WaveformHeader.for_symbols(symbols.size, cfg)
print("waveform header:", header.to_dict(), "samples:", tx.size)

ch = MultipathChannel.default_three_path()
rx = apply_multipath(tx, ch, cfg)
print("taps (tau, alpha):", [(t, round(a, 4)) for t, a in ch.taps])

# %% Matched filter and one decision sample per symbol.
offset = calibrate_timing(cfg, ch)
filtered = matched_filter(rx, cfg)
y = sample_decisions(filtered, symbols.size, offset, cfg).y
print("timing offset:", offset)
print("sent   :", symbols.astype(int))
print("y_n    :", np.round(y, 2))
print("sign   :", np.sign(y).astype(int))
print("|y_n| swings between ~10 and ~45 for a main term of ~33: that spread is the ISI")

# %%
try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None
if plt is not None:
    fig, ax = plt.subplots(2, 1, figsize=(8, 5))
    ax[0].plot(header.sample_times(), tx, label="tx")
    ax[0].plot(np.arange(rx.size) / cfg.n_samp - cfg.tail_symbols, rx, label="rx", alpha=0.7)
    ax[0].set_xlim(-4, symbols.size + 3)
    ax[0].legend()
    ax[1].plot(filtered)
    ax[1].plot(offset + cfg.n_samp * np.arange(symbols.size), y, "o")
    ax[1].set_xlabel("matched-filter sample")
    fig.tight_layout()
    fig.savefig("waveform.png", dpi=120)
    print("saved waveform.png")
