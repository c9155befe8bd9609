import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chaoslink.waveform import (
    WaveformConfig,
    WaveformHeader,
    basis_function,
    bits_to_symbols,
    build_frame,
    debruijn_probe,
    sampled_basis,
    shape_forming_filter,
)

from conftest import hand_basis


def test_config_invariants(cfg):
    assert cfg.beta_norm == np.log(2)
    assert np.exp(-cfg.beta_norm) == pytest.approx(0.5, abs=1e-16)
    assert cfg.n_samp == 16 and cfg.tail_symbols == 16
    assert np.exp(-cfg.beta_norm * cfg.tail_symbols) < 1e-4
    assert cfg.beta == pytest.approx(600 * np.log(2))


@pytest.mark.parametrize("kwargs", [{"n_samp": 1}, {"tail_symbols": 8}, {"f": -1.0}, {"n_samp": 2.5}])
def test_config_rejects(kwargs):
    with pytest.raises(ValueError):
        WaveformConfig(**kwargs)


@pytest.mark.parametrize("t", [2.0, 1.5, 1.0, -20.0, -16.0001])
def test_basis_zero_regions(t, cfg):
    assert basis_function(t, cfg) == 0.0


def test_basis_hand_value(cfg):
    # 0.5 * 2**-0.25 * (cos(-pi/2) - (ln2/2pi) sin(-pi/2))
    expected = 0.5 * 2 ** -0.25 * (np.log(2) / (2 * np.pi))
    assert basis_function(-0.25, cfg) == pytest.approx(expected, rel=1e-14)
    assert basis_function(-0.25, cfg) == pytest.approx(0.04638292131142918, rel=1e-14)


def test_basis_matches_scalar_oracle(cfg):
    t = np.linspace(-17, 2, 3001)
    np.testing.assert_allclose(basis_function(t, cfg), [hand_basis(v) for v in t], rtol=1e-12, atol=1e-15)


def test_basis_verbatim_branch_values(cfg):
    # left limit at 0 is 0.5, the [t]=0 branch gives -1 at t=0
    assert basis_function(-1e-12, cfg) == pytest.approx(0.5, abs=1e-9)
    assert basis_function(0.0, cfg) == pytest.approx(-1.0, abs=1e-15)


def test_basis_zero_beyond_one_dense(cfg):
    t = np.linspace(1, 50, 100_001)
    assert np.all(basis_function(t, cfg) == 0.0)


def test_basis_envelope(cfg):
    t = np.linspace(-16, -1e-9, 50_001)
    bound = 0.5 * np.exp(np.log(2) * t) * (1 + np.log(2) / (2 * np.pi))
    assert np.all(np.abs(basis_function(t, cfg)) <= bound + 1e-15)


def test_single_symbol_is_sampled_basis(cfg):
    u = shape_forming_filter([1], cfg)
    np.testing.assert_array_equal(u, sampled_basis(cfg))
    header = WaveformHeader.for_symbols(1, cfg)
    assert u.size == header.length
    np.testing.assert_allclose(u, basis_function(header.sample_times(), cfg))


def test_two_symbols_superpose(cfg):
    t = WaveformHeader.for_symbols(2, cfg).sample_times()
    u = shape_forming_filter([1, -1], cfg)
    np.testing.assert_allclose(u, basis_function(t, cfg) - basis_function(t - 1, cfg), atol=1e-15)


def test_length(cfg):
    assert shape_forming_filter(np.ones(10), cfg).size == 10 * 16 + cfg.pad_samples


def test_rejects_empty(cfg):
    with pytest.raises(ValueError):
        shape_forming_filter([], cfg)


symbol_lists = st.lists(st.sampled_from([-1.0, 1.0]), min_size=1, max_size=30)


@settings(max_examples=40, deadline=None)
@given(symbol_lists, st.data())
def test_linearity_interleaved_patterns(symbols, data):
    s = np.array(symbols)
    mask = np.array(data.draw(st.lists(st.booleans(), min_size=s.size, max_size=s.size)))
    a, b = np.where(mask, s, 0.0), np.where(mask, 0.0, s)
    # overlapping pulses are summed in a different order, so allow rounding
    np.testing.assert_allclose(shape_forming_filter(s), shape_forming_filter(a) + shape_forming_filter(b), rtol=0, atol=1e-13)


@settings(max_examples=40, deadline=None)
@given(symbol_lists, symbol_lists)
def test_linearity_separated_patterns_exact(first, second):
    gap = [0.0] * (WaveformConfig().tail_symbols + 1)
    a = list(first) + gap + [0.0] * len(second)
    b = [0.0] * len(first) + gap + list(second)
    total = list(first) + gap + list(second)
    np.testing.assert_array_equal(shape_forming_filter(total), shape_forming_filter(a) + shape_forming_filter(b))


@settings(max_examples=30, deadline=None)
@given(symbol_lists)
def test_shift_equivariance(symbols):
    cfg = WaveformConfig()
    u = shape_forming_filter(symbols, cfg)
    shifted = shape_forming_filter([0.0] + list(symbols), cfg)
    np.testing.assert_array_equal(shifted[cfg.n_samp :], u)
    assert np.all(shifted[: cfg.n_samp] == 0)


def _cyclic_patterns(seq, order):
    ext = np.concatenate([seq, seq[: order - 1]])
    return {tuple(ext[i : i + order]) for i in range(seq.size)}


def test_debruijn_small_orders():
    np.testing.assert_array_equal(debruijn_probe(1), [0, 1])
    assert _cyclic_patterns(debruijn_probe(2), 2) == {(0, 0), (0, 1), (1, 0), (1, 1)}


@pytest.mark.parametrize("order", [3, 4, 6, 10])
def test_debruijn_covers_every_pattern_once(order):
    seq = debruijn_probe(order)
    assert seq.size == 2**order
    assert len(_cyclic_patterns(seq, order)) == 2**order


@pytest.mark.parametrize("order", [0, 17, 2.5])
def test_debruijn_rejects(order):
    with pytest.raises(ValueError):
        debruijn_probe(order)


def test_build_frame(cfg):
    frame = build_frame([1], cfg, probe_order=6)
    assert frame.n_probe == 64 + 5 and frame.n_payload == 1
    assert frame.symbols.size == frame.n_probe + frame.n_payload
    assert set(np.unique(frame.symbols)) <= {-1.0, 1.0}
    assert frame.symbols[-1] == 1.0
    np.testing.assert_array_equal(bits_to_symbols([0, 1]), [-1.0, 1.0])
    with pytest.raises(ValueError):
        build_frame([], cfg)
