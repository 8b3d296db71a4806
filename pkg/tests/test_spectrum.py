from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest

from cespdc.spectrum import (SourceConfig, brightest_pair, cluster_report,
                             cluster_spacing, dfg_scan, enumerate_mode_pairs,
                             jsi_slice, modes_per_cluster)


def test_jsi_peaks_at_anchor(source):
    assert jsi_slice(source, source.signal_anchor_hz) == pytest.approx(1.0, rel=1e-6)


def test_jsi_idler_is_pump_minus_signal(source):
    # moving the pump moves the idler comb, so the same signal frequency
    # changes weight: energy conservation is structural, not optional
    shifted = replace(source, pump_frequency_hz=source.pump_frequency_hz + 120e6)
    a = jsi_slice(source, source.signal_anchor_hz)
    b = jsi_slice(shifted, source.signal_anchor_hz)
    assert b < a


def test_jsi_accepts_arrays(source):
    det = np.linspace(-1e9, 1e9, 101)
    w = jsi_slice(source, source.signal_anchor_hz + det)
    assert np.shape(w) == det.shape
    assert float(np.max(w)) == pytest.approx(1.0, rel=1e-6)


def test_cluster_spacing_formula():
    assert cluster_spacing(497.75e6, 494.25e6) == pytest.approx(
        497.75e6 * 494.25e6 / 3.5e6, rel=1e-12)
    assert math.isinf(cluster_spacing(496e6, 496e6))


def test_modes_per_cluster_formula(cavity):
    gamma = cavity.decay_rate()
    got = modes_per_cluster(gamma, 3.5e6)
    assert got == pytest.approx(gamma / (4 * math.pi * 3.5e6), rel=1e-12)
    assert math.isinf(modes_per_cluster(gamma, 0.0))


def test_enumerate_finds_central_pair(source):
    pairs = enumerate_mode_pairs(source, window_hz=2e9)
    best = brightest_pair(pairs)
    assert best.signal_index == 0 and best.idler_index == 0
    assert best.signal_freq_hz == pytest.approx(source.signal_anchor_hz)
    assert best.weight == pytest.approx(1.0, rel=1e-6)


def test_enumerate_respects_weight_floor(source):
    loose = enumerate_mode_pairs(source, window_hz=30e9, weight_floor=1e-6)
    tight = enumerate_mode_pairs(source, window_hz=30e9, weight_floor=1e-2)
    assert len(tight) < len(loose)
    assert all(p.weight >= 1e-2 for p in tight)


def test_pair_brightness_normalized_to_best(source):
    pairs = enumerate_mode_pairs(source, window_hz=2e9)
    best = brightest_pair(pairs)
    assert best.brightness == pytest.approx(1.0, rel=1e-9)
    assert all(p.brightness <= 1.0 + 1e-9 for p in pairs)


def test_cluster_report_shape(source):
    rep = cluster_report(source, window_hz=150e9, weight_floor=1e-4)
    assert rep.predicted_spacing_hz == pytest.approx(70.29e9, rel=1e-3)
    # window covers the central cluster and one neighbor either side
    assert len(rep.clusters) >= 3
    centers = sorted(c.center_hz for c in rep.clusters)
    mid = centers[len(centers) // 2]
    assert mid == pytest.approx(source.signal_anchor_hz, abs=1e9)


def test_cluster_centers_near_predicted_grid(source):
    rep = cluster_report(source, window_hz=150e9, weight_floor=1e-4)
    fsr = source.signal_comb.fsr_hz
    for c in rep.clusters:
        k = round((c.center_hz - source.signal_anchor_hz) / rep.predicted_spacing_hz)
        predicted = source.signal_anchor_hz + k * rep.predicted_spacing_hz
        assert abs(c.center_hz - predicted) <= fsr


def test_central_cluster_fwhm_count(source):
    rep = cluster_report(source, window_hz=2e9, weight_floor=1e-4)
    assert rep.empirical_fwhm_count == 3


def test_dfg_scan_reproduces_cluster_recurrence(source):
    lo = source.signal_anchor_hz - 80e9
    hi = source.signal_anchor_hz + 80e9
    det, power = dfg_scan(source, lo, hi, 16001)
    assert det.shape == power.shape == (16001,)
    spacing = cluster_spacing(source.signal_comb.fsr_hz, source.idler_comb.fsr_hz)
    # a recurrence should sit within half an FSR of +spacing
    sel = np.abs(det - spacing) < 5e9
    peak_det = det[sel][np.argmax(power[sel])]
    assert abs(peak_det - spacing) < source.signal_comb.fsr_hz


def test_dfg_scan_background(source):
    det, power = dfg_scan(source, source.signal_anchor_hz + 30e9,
                          source.signal_anchor_hz + 31e9, 101, background=0.01)
    assert np.all(power >= 0.01)


def test_tuning_offset_bound(source):
    with pytest.raises(ValueError):
        replace(source, tuning_offset_hz=2e9)


def test_pump_must_be_near_second_harmonic(source):
    with pytest.raises(ValueError):
        replace(source, pump_frequency_hz=source.pump_frequency_hz + 10e12)


def test_source_combs_share_pump(source):
    assert source.idler_anchor_hz == source.pump_frequency_hz - source.signal_anchor_hz
