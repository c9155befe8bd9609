"""Chaos-based baseband link simulator with CNN-assisted ISI thresholds."""
from .channel import MultipathChannel, NoiseSpec, add_awgn, apply_multipath, measure_eb
from .config import ConfigError, SimulationConfig, load_config
from .harness import DecoderKind, FrameMeta, decode_frame, emit_csv, run_ber_sweep
from .isi import IsiCoefficients, Threshold, compute_isi_coefficients, estimate_channel, genie_threshold, threshold
from .neuralnet import CnnModel, TrainingConfig, train
from .receiver import calibrate_timing, decide, matched_filter, sample_decisions
from .waveform import Frame, WaveformConfig, basis_function, build_frame, debruijn_probe, shape_forming_filter

__version__ = "0.1.0"
