"""ISI coefficient table and the threshold hierarchy.

The coefficient table comes from single-symbol runs through each path. With
it, the noiseless decision statistic is reproduced exactly, and the zero /
past-only / full thresholds can be compared on one symbol.

    python demos/02_isi_thresholds.py
"""
# %%
import numpy as np

from chaoslink.channel import MultipathChannel, apply_multipath
from chaoslink.isi import compute_isi_coefficients, genie_threshold, threshold
from chaoslink.receiver import calibrate_timing, matched_filter, sample_decisions
from chaoslink.waveform import WaveformConfig, shape_forming_filter

cfg = WaveformConfig()
ch = MultipathChannel.default_three_path()
offset = calibrate_timing(cfg, ch)
coeffs = compute_isi_coefficients(ch, cfg, (-8, 8), offset)

print(f"c_main = {coeffs.c_main:.4f}")
print(" i  " + "".join(f"   path{l}" for l in range(ch.n_paths)) + "     sum")
for i in range(-5, 6):
    if i == 0:
        continue
    row = [coeffs[l, i] for l in range(ch.n_paths)]
    print(f"{i:+d} " + "".join(f"{v:9.4f}" for v in row) + f"{sum(row):9.4f}")

# %% Decomposition check on random symbols (wide offset range, so nothing is truncated).
rng = np.random.default_rng(0)
s = rng.choice([-1.0, 1.0], 200)
wide = compute_isi_coefficients(ch, cfg, (-24, 24), offset)
y = sample_decisions(matched_filter(apply_multipath(shape_forming_filter(s, cfg), ch, cfg), cfg), s.size, offset, cfg).y
n = 100
recon = s[n] * wide.c_main + genie_threshold(s, n, wide, (-24, 24)).value
print(f"\ny_{n} = {y[n]:.12f}, reconstructed {recon:.12f}")

# %% The three thresholds for symbol n.
th_past = threshold(s[n - 4 : n], [], coeffs)
th_full = threshold(s[n - 4 : n], s[n + 1 : n + 4], coeffs)
print(f"theta zero      = 0\ntheta past-only = {th_past.value:+.3f}\ntheta past+fut  = {th_full.value:+.3f}"
      f"  (I_past {th_full.i_past:+.3f}, I_future {th_full.i_future:+.3f})")
print(f"margin y_n - theta with s_n={s[n]:+.0f}: zero {y[n]:+.2f}, past {y[n] - th_past.value:+.2f}, "
      f"full {y[n] - th_full.value:+.2f}")
