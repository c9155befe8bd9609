import numpy as np
import pytest

from chaoslink.channel import MultipathChannel, NoiseSpec
from chaoslink.cli import main
from chaoslink.config import ConfigError, SimulationConfig, load_config
from chaoslink.harness import (
    BerCurve,
    BerPoint,
    DecoderKind,
    FrameMeta,
    decode_frame,
    emit_csv,
    oracle_future_symbols,
    parse_csv,
    predict_future_symbols,
    receiver_front_end,
    run_ber_sweep,
    train_on_probe,
    transmit_frame,
)
from chaoslink.isi import compute_isi_coefficients, genie_threshold
from chaoslink.neuralnet import TrainingConfig
from chaoslink.receiver import calibrate_timing
from chaoslink.waveform import build_frame


def make_frame(cfg, ch, n_payload, seed, ebn0=None):
    rng = np.random.default_rng(seed)
    frame = build_frame(rng.integers(0, 2, n_payload, dtype=np.uint8), cfg)
    noise = None if ebn0 is None else NoiseSpec(ebn0, seed + 100)
    trans = transmit_frame(frame, cfg, ch, noise)
    meta = FrameMeta(cfg, frame.probe_bits, frame.n_payload, calibrate_timing(cfg, ch))
    coeffs = compute_isi_coefficients(ch, cfg, (-8, 8), meta.timing_offset)
    return trans, meta, coeffs


def reference_decisions(trans, meta, coeffs, i_range=(-4, 3)):
    """Decision-feedback genie: decided past, true future, via genie_threshold."""
    _, y = receiver_front_end(trans.rx, meta)
    seq = trans.frame.symbols.copy()
    out = []
    for n in range(meta.n_probe, meta.n_symbols):
        s = 1.0 if y[n] - genie_threshold(seq, n, coeffs, i_range).value >= 0 else -1.0
        seq[n] = s
        out.append(s > 0)
    return np.array(out, dtype=np.uint8)


def test_noiseless_single_path_zero_threshold(cfg):
    trans, meta, coeffs = make_frame(cfg, MultipathChannel.single_path(), 2000, 1)
    bits = decode_frame(trans.rx, meta, DecoderKind.ZERO, coeffs)
    assert np.array_equal(bits, trans.frame.payload_bits)


def test_noiseless_three_path_genie(cfg, three_path):
    trans, meta, coeffs = make_frame(cfg, three_path, 10_000, 2)
    bits = decode_frame(trans.rx, meta, DecoderKind.GENIE, coeffs, true_bits=trans.frame.bits)
    assert np.count_nonzero(bits != trans.frame.payload_bits) == 0


@pytest.mark.parametrize("ebn0", [None, 4.0, 8.0])
def test_oracle_cnn_equals_restricted_genie(cfg, three_path, ebn0):
    trans, meta, coeffs = make_frame(cfg, three_path, 1500, 4, ebn0)
    oracle = oracle_future_symbols(trans.frame.bits, meta.n_probe)
    cnn = decode_frame(trans.rx, meta, DecoderKind.CNN, coeffs, future_symbols=oracle)
    np.testing.assert_array_equal(cnn, reference_decisions(trans, meta, coeffs))


def test_missing_inputs_rejected(cfg, three_path):
    trans, meta, coeffs = make_frame(cfg, three_path, 50, 5)
    with pytest.raises(ValueError):
        decode_frame(trans.rx, meta, DecoderKind.CNN, coeffs)
    with pytest.raises(ValueError):
        decode_frame(trans.rx, meta, DecoderKind.GENIE, coeffs)


# per future offset k=1..3; the look-ahead output of a window is the weak one
@pytest.mark.parametrize("scheme, min_acc", [("window", (0.99, 0.99, 0.85)), ("sliding", (0.85, 0.85, 0.85))])
def test_cnn_decoder_noiseless(cfg, scheme, min_acc):
    ch = MultipathChannel.single_path()
    trans, meta, coeffs = make_frame(cfg, ch, 500, 6)
    filtered, _ = receiver_front_end(trans.rx, meta)
    model, norm = train_on_probe(filtered, meta, 8, TrainingConfig())
    fut = predict_future_symbols(filtered, meta, model, norm, scheme)
    assert fut.shape == (meta.n_symbols, 3)
    assert np.all(np.isnan(fut[: meta.n_probe]))
    truth = oracle_future_symbols(trans.frame.bits, meta.n_probe)
    rows = slice(meta.n_probe, meta.n_symbols - 3)
    acc = np.mean(fut[rows] == truth[rows], axis=0)
    assert np.all(acc >= min_acc), acc
    bits = decode_frame(trans.rx, meta, DecoderKind.CNN, coeffs, model=model, norm=norm, future_scheme=scheme)
    assert np.mean(bits == trans.frame.payload_bits) >= 0.999


def small_config(**sweep):
    raw = {
        "noise": {"ebn0_db": [5.0, 9.0], "master_seed": 3},
        "cnn": {"epochs": 60},
        "sweep": {"bits_budget": 1500, "error_budget": 40, "payload_bits": 500, **sweep},
    }
    return SimulationConfig.from_dict(raw)


def test_sweep_deterministic_and_consistent():
    cfg = small_config()
    a, b = run_ber_sweep(cfg), run_ber_sweep(cfg)
    assert emit_csv(a) == emit_csv(b)
    for d, curve in a.items():
        assert len(curve.points) == 2
        for pt in curve.points:
            assert pt.bits_total > 0 and pt.ber == pt.bit_errors / pt.bits_total
            assert pt.bits_total <= 1500
            assert pt.bit_errors >= 40 or pt.bits_total == 1500
    for i in range(2):
        assert a[DecoderKind.GENIE].points[i].ber <= a[DecoderKind.ZERO].points[i].ber


def test_sweep_other_modes(tmp_path):
    est = run_ber_sweep(small_config(csi="estimate", decoders=["past", "genie"]))
    assert set(est) == {DecoderKind.PAST_ONLY, DecoderKind.GENIE}
    raw = {"cnn": {"epochs": 30, "retrain_per_frame": False}, "noise": {"ebn0_db": [8.0]},
           "sweep": {"bits_budget": 1000, "payload_bits": 500, "decoders": ["CnnPredicted"]}}
    curves = run_ber_sweep(SimulationConfig.from_dict(raw))
    assert curves[DecoderKind.CNN].points[0].bits_total == 1000


def test_csv_format_and_roundtrip():
    curves = [BerCurve(DecoderKind.PAST_ONLY, 5, points=[BerPoint(8.0, 3, 7)])]
    text = emit_csv(curves)
    assert text == "decoder,ebn0_db,bit_errors,bits_total,ber,seed\npast,8.0,3,7,0.42857142857142855,5\n"
    assert len(text.splitlines()) == 2
    back = parse_csv(text)
    assert back[0].decoder == DecoderKind.PAST_ONLY and back[0].points == curves[0].points
    assert float(text.splitlines()[1].split(",")[4]) == 3 / 7
    with pytest.raises(ValueError):
        emit_csv([])


def test_decoder_names():
    assert DecoderKind.parse("ZeroThreshold") is DecoderKind.ZERO
    assert DecoderKind.parse("genie") is DecoderKind.GENIE
    with pytest.raises(ValueError):
        DecoderKind.parse("mlse")


@pytest.mark.parametrize(
    "raw, field",
    [
        ({"waveform": {"n_samp": 1}}, "waveform.n_samp"),
        ({"waveform": {"n_samp": 8}}, "waveform.n_samp"),
        ({"channel": {"taps": [[0.0, 1.0], [0.03, 0.5]]}}, "channel"),
        ({"channel": {"gamma": 0.7}}, "channel"),
        ({"noise": {"ebn0_db": "high"}}, "noise.ebn0_db"),
        ({"cnn": {"lr": -1.0}}, "cnn.lr"),
        ({"cnn": {"epochs": 0}}, "cnn.epochs"),
        ({"sweep": {"decoders": ["mlse"]}}, "sweep.decoders"),
        ({"sweep": {"csi": "magic"}}, "sweep.csi"),
        ({"sweep": {"oops": 1}}, "sweep"),
        ({"extra": {}}, "extra"),
    ],
)
def test_config_errors_name_field(raw, field):
    with pytest.raises(ConfigError, match=field):
        SimulationConfig.from_dict(raw)


def test_config_defaults_and_channel_forms(tmp_path):
    cfg = SimulationConfig.from_dict({})
    assert cfg.channel == MultipathChannel.default_three_path()
    assert cfg.sweep.bits_budget == 100_000 and cfg.sweep.error_budget == 200
    p = tmp_path / "c.yaml"
    p.write_text("channel:\n  taps: [[0.0, 1.0], [0.5, 0.25]]\n")
    assert load_config(p).channel.taps == [(0.0, 1.0), (0.5, 0.25)]
    p.write_text("- not a mapping\n")
    with pytest.raises(ConfigError):
        load_config(p)


QUICK = """
noise: {ebn0_db: [7.0], master_seed: 5}
cnn: {epochs: 40}
sweep: {bits_budget: 600, payload_bits: 300}
"""


def test_cli_sweep_coeffs_simulate_train(tmp_path, capsys):
    conf = tmp_path / "quick.yaml"
    conf.write_text(QUICK)
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["sweep", str(conf), "-o", str(out1)]) == 0
    assert main(["sweep", str(conf), "-o", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert out1.read_text().startswith("decoder,ebn0_db,bit_errors,bits_total,ber,seed\n")

    assert main(["coeffs", str(conf)]) == 0
    assert capsys.readouterr().out.startswith("l,i,C\n")

    trace = tmp_path / "trace.csv"
    assert main(["simulate", str(conf), "-o", str(trace)]) == 0
    rows = trace.read_text().splitlines()
    assert rows[0].startswith("n,bit,y,pred_s1") and len(rows) == 301

    model = tmp_path / "m.txt"
    assert main(["train", str(conf), "-o", str(model)]) == 0
    assert model.read_text().startswith("chaoslink-cnn 1\n")
    conf.write_text(QUICK.replace("epochs: 40", f"epochs: 40, retrain_per_frame: false, model_path: '{model}'"))
    assert main(["sweep", str(conf), "-o", str(out1)]) == 0


def test_cli_errors(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("sweep: {bits_budget: -5}\n")
    assert main(["sweep", str(bad)]) == 2
    assert "sweep.bits_budget" in capsys.readouterr().err
    assert main(["sweep", str(tmp_path / "missing.yaml")]) == 2
