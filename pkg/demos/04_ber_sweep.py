"""A small BER sweep over the default three-path channel.

Uses fewer bits than the acceptance runs so it finishes in about a minute.
For the full curves run ``chaoslink sweep configs/three_path.yaml``.

    python demos/04_ber_sweep.py
"""
# %%
from chaoslink.config import SimulationConfig
from chaoslink.harness import emit_csv, run_ber_sweep

config = SimulationConfig.from_dict({
    "channel": {"gamma": 0.7, "delays": [0.0, 1.0, 2.0]},
    "noise": {"ebn0_db": [4.0, 6.0, 8.0, 10.0], "master_seed": 42},
    "sweep": {"bits_budget": 20_000, "error_budget": 200, "payload_bits": 10_000},
})
curves = run_ber_sweep(config)

# %%
print(f"{'Eb/N0':>6}" + "".join(f"{d.value:>12}" for d in curves))
for i, ebn0 in enumerate(config.noise.ebn0_db):
    print(f"{ebn0:6.1f}" + "".join(f"{curves[d].points[i].ber:12.2e}" for d in curves))

# %%
with open("ber_three_path.csv", "w", encoding="utf-8", newline="\n") as fh:
    fh.write(emit_csv(curves))
print("wrote ber_three_path.csv")
