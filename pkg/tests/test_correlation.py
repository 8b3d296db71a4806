from __future__ import annotations

import math

import numpy as np
import pytest

from cespdc.correlation import (DetectionEventStream, FitError, G2Histogram, G2Model,
                                bin_coincidences, comb_period_estimate,
                                comb_power_ratio, correct_rates, fit_envelope,
                                g2_envelope, g2_multimode, model_from_source,
                                simulate_events)
from cespdc.spectrum import enumerate_mode_pairs

GAMMA_S = 2 * math.pi * 6.9e6
GAMMA_I = 2 * math.pi * 6.3e6


@pytest.fixture(scope="module")
def model():
    return G2Model(gamma_s=GAMMA_S, gamma_i=GAMMA_I, round_trip_time_s=1 / 496e6)


@pytest.fixture(scope="module")
def stream(model):
    return simulate_events(model, duration_s=20.0, pair_rate_hz=5e4, seed=7)


@pytest.fixture(scope="module")
def hist(stream):
    return bin_coincidences(stream, bin_width_s=625e-12, window_s=100e-9)


def test_envelope_shape(model):
    assert g2_envelope(model, 0.0) == pytest.approx(1.0)
    tau = 50e-9
    assert g2_envelope(model, tau) == pytest.approx(
        math.exp(-GAMMA_S * tau / 2), rel=1e-12)
    assert g2_envelope(model, -tau) == pytest.approx(
        math.exp(-GAMMA_I * tau / 2), rel=1e-12)
    # idler side decays slower (smaller gamma)
    assert g2_envelope(model, -tau) > g2_envelope(model, tau)


def test_multimode_reduces_to_envelope_for_single_pair(model):
    tau = np.linspace(-100e-9, 100e-9, 501)
    np.testing.assert_allclose(g2_multimode(model, tau),
                               g2_envelope(model, tau), rtol=1e-12)


def test_multimode_comb_oscillates():
    deltas = np.arange(-3, 4) * 497.75e6
    weights = np.exp(-np.abs(np.arange(-3, 4)) * 0.8)
    model = G2Model(GAMMA_S, GAMMA_I, 1 / 496e6,
                    mode_deltas_hz=tuple(deltas), mode_weights=tuple(weights))
    tau = np.linspace(-20e-9, 20e-9, 4001)
    g2 = g2_multimode(model, tau)
    env = g2_envelope(model, tau)
    assert g2.max() == pytest.approx(env.max(), rel=1e-6)
    assert g2.min() < 0.1 * env.min()  # deep beat notes between revivals


def test_simulation_is_deterministic(model):
    a = simulate_events(model, 0.2, 5e4, seed=42)
    b = simulate_events(model, 0.2, 5e4, seed=42)
    np.testing.assert_array_equal(a.signal_ps, b.signal_ps)
    np.testing.assert_array_equal(a.idler_ps, b.idler_ps)
    c = simulate_events(model, 0.2, 5e4, seed=43)
    assert len(c.signal_ps) != len(a.signal_ps) or \
        bool(np.any(c.signal_ps != a.signal_ps))


def test_simulated_counts_near_expectation(stream):
    # Poisson pair number: 20 s x 5e4 /s = 1e6 +- ~1e3
    assert len(stream.signal_ps) == pytest.approx(1e6, abs=5e3)
    assert len(stream.idler_ps) == pytest.approx(1e6, abs=5e3)
    assert np.all(np.diff(stream.signal_ps) >= 0)


def test_background_adds_uncorrelated_singles(model):
    import dataclasses
    noisy = dataclasses.replace(model, background_rate=2e4)
    s = simulate_events(noisy, 1.0, 1e4, seed=1)
    # 1e4 pairs + 2e4 background per channel
    assert len(s.signal_ps) == pytest.approx(3e4, rel=0.05)


def test_histogram_covers_window(hist):
    assert len(hist.counts) == 320  # 2 * 100 ns / 625 ps
    assert hist.tau_edges_s[hist.delay_origin] == 0.0
    assert hist.tau_centers_s[0] == pytest.approx(-100e-9 + 312.5e-12)


def test_histogram_matches_bruteforce_small():
    sig = np.array([1000, 5000, 9000], dtype=np.int64)
    idl = np.array([1100, 4500, 20_000], dtype=np.int64)
    stream = DetectionEventStream(sig, idl, duration_s=1e-6)
    hist = bin_coincidences(stream, bin_width_s=1e-9, window_s=5e-9)
    # tau = t_signal - t_idler, bins over [-5 ns, 5 ns), left-edge convention
    expect = np.zeros(10, dtype=np.int64)
    for s in sig:
        for i in idl:
            tau = s - i
            if -5000 <= tau < 5000:
                expect[(tau + 5000) // 1000] += 1
    np.testing.assert_array_equal(hist.counts, expect)


def test_fit_recovers_rates(hist):
    fit = fit_envelope(hist)
    assert fit.gamma_s == pytest.approx(GAMMA_S, rel=0.05)
    assert fit.gamma_i == pytest.approx(GAMMA_I, rel=0.05)
    assert not fit.degenerate
    assert fit.errors["gamma_s"] < 0.05 * fit.gamma_s
    assert fit.photon_fwhm_hz == pytest.approx(4.25e6, rel=0.05)


def test_fit_needs_enough_data():
    counts = np.zeros(320, dtype=np.int64)
    counts[150] = 3
    with pytest.raises(FitError):
        fit_envelope(G2Histogram(625e-12, counts, 160))


def test_comb_power_ratio_flat_for_single_pair(hist):
    ratio = comb_power_ratio(hist, 496e6)
    assert ratio < 1e-3


def test_comb_period_estimate_analytic():
    deltas = np.arange(-3, 4) * 497.75e6
    weights = np.exp(-np.abs(np.arange(-3, 4)) * 0.8)
    model = G2Model(GAMMA_S, GAMMA_I, 1 / 496e6,
                    mode_deltas_hz=tuple(deltas), mode_weights=tuple(weights))
    period = comb_period_estimate(model, 496e6)
    assert period == pytest.approx(1 / 497.75e6, rel=5e-3)


def test_model_from_source_uses_brightness(source):
    pairs = enumerate_mode_pairs(source, window_hz=2e9, weight_floor=1e-3)
    model = model_from_source(source, pairs)
    assert len(model.mode_deltas_hz) == len(pairs)
    assert 0.0 in model.mode_deltas_hz
    assert max(model.mode_weights) == pytest.approx(1.0, rel=1e-9)
    assert model.round_trip_time_s == pytest.approx(1 / source.cavity.fsr_mean(),
                                                    rel=1e-12)


def test_correct_rates_paper_point():
    rep = correct_rates(180.0, 0.09, 0.49)
    assert rep.corrected_pair_rate == pytest.approx(367.35, abs=0.01)
    assert rep.corrected_heralding == pytest.approx(0.1837, abs=1e-3)
    with pytest.raises(ValueError):
        correct_rates(180.0, 0.09, 0.0)
    with pytest.raises(ValueError):
        correct_rates(-1.0, 0.09, 0.5)


def test_model_validation():
    with pytest.raises(ValueError):
        G2Model(-1.0, GAMMA_I, 1 / 496e6)
    with pytest.raises(ValueError):
        G2Model(GAMMA_S, GAMMA_I, 1 / 496e6, mode_deltas_hz=(0.0, 1e6),
                mode_weights=(1.0,))
