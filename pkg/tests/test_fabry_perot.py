from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest

from cespdc.fabry_perot import (DesignInfeasibleError, FilterConstraints, FpFilter,
                                calibrated_mirror_thickness, design_filter,
                                extinction_report, filtered_jsi, fp_fsr,
                                fp_transmission, kelvin_per_fsr,
                                temperature_for_shift, thermal_resonance_shift,
                                transmission_at)
from cespdc.spectrum import cluster_report, enumerate_mode_pairs, jsi_slice

C = 299_792_458.0


def test_fsr_from_spacer(fp):
    assert fp_fsr(fp) == pytest.approx(C / (2 * 3.8e-3), rel=1e-12)
    assert fp_fsr(fp) == pytest.approx(39.45e9, rel=1e-3)


def test_finesse_prefers_measured_linewidth(fp):
    # the preset carries a measured 96.6 MHz linewidth, overriding R
    assert fp.finesse == pytest.approx(fp_fsr(fp) / 96.6e6, rel=1e-9)
    bare = replace(fp, measured_linewidth_hz=None)
    assert bare.finesse == pytest.approx(math.pi * math.sqrt(0.992) / (1 - 0.992),
                                         rel=1e-9)


def test_transmission_peak_and_periodicity(fp):
    # peak_transmission is the on-resonance power transmission (T_max^2)
    t0 = fp_transmission(fp, 0.0)
    assert t0 == pytest.approx(fp.peak_transmission, rel=1e-12)
    assert fp_transmission(fp, fp_fsr(fp)) == pytest.approx(t0, rel=1e-9)
    assert fp_transmission(fp, fp_fsr(fp) / 2) < t0 * 1e-4


def test_transmission_at_uses_tuned_resonance(fp):
    tuned = fp.tuned_to(377.104e12)
    assert transmission_at(tuned, 377.104e12) == pytest.approx(
        fp.peak_transmission, rel=1e-12)


def test_thermal_shift_sign_and_linearity(fp):
    one = thermal_resonance_shift(fp, 1.0)
    ten = thermal_resonance_shift(fp, 10.0)
    assert ten == pytest.approx(10 * one, rel=1e-9)
    # net expansion lengthens the cavity, so resonance moves down in frequency
    assert one < 0


def test_kelvin_per_fsr_calibration(fp):
    assert kelvin_per_fsr(fp) == pytest.approx(31.7, rel=1e-3)
    assert abs(thermal_resonance_shift(fp, kelvin_per_fsr(fp))) == pytest.approx(
        fp_fsr(fp), rel=1e-9)


def test_millikelvin_sensitivity(fp):
    assert abs(thermal_resonance_shift(fp, 5e-3)) == pytest.approx(6.2e6, rel=0.05)


def test_temperature_for_shift_inverse(fp):
    shift = -250e6
    dt = temperature_for_shift(fp, shift)
    assert thermal_resonance_shift(fp, dt) == pytest.approx(shift, rel=1e-9)


def test_thermal_model_range_guard(fp):
    with pytest.raises(ValueError):
        thermal_resonance_shift(fp, 80.0)


def test_calibrated_mirror_thickness_round_trip(fp):
    t_eff = calibrated_mirror_thickness(
        spacer_length_m=fp.spacer_length_m,
        kelvin_per_fsr_target=31.7,
        reference_resonance_hz=fp.reference_resonance_hz,
        spacer_expansion_per_k=fp.spacer_expansion_per_k,
        mirror_expansion_per_k=fp.mirror_expansion_per_k)
    rebuilt = replace(fp, mirror_effective_thickness_m=t_eff)
    assert kelvin_per_fsr(rebuilt) == pytest.approx(31.7, rel=1e-9)


def test_filtered_jsi_bounded_by_unfiltered(source, fp):
    tuned = fp.tuned_to(source.signal_anchor_hz)
    det = np.linspace(-2e9, 2e9, 401)
    raw = jsi_slice(source, source.signal_anchor_hz + det)
    filt = filtered_jsi(source, tuned, None, source.signal_anchor_hz + det)
    assert np.all(filt <= raw * (1 + 1e-12))
    assert np.all(filt >= 0)


def test_extinction_report_selects_brightest(source, fp):
    pairs = enumerate_mode_pairs(source, window_hz=120e9, weight_floor=1e-4)
    rep = extinction_report(pairs, fp)
    best = max(pairs, key=lambda p: p.brightness)
    assert rep.selected_signal_hz == pytest.approx(best.signal_freq_hz)
    assert 0 <= rep.unwanted_fraction < 1
    sel_rows = [r for r in rep.rows if r.signal_freq_hz == rep.selected_signal_hz]
    assert sel_rows and sel_rows[0].suppression_db == pytest.approx(0.0, abs=1e-9)


def test_design_filter_meets_target(source):
    rep = cluster_report(source, window_hz=150e9, weight_floor=1e-4)
    design = design_filter(rep, purity_target=0.05)
    assert design.unwanted_fraction <= 0.05
    lo, hi = FilterConstraints().spacer_range_m
    assert lo <= design.fp.spacer_length_m <= hi


def test_design_filter_infeasible_carries_best(source):
    rep = cluster_report(source, window_hz=150e9, weight_floor=1e-4)
    tight = FilterConstraints(spacer_range_m=(2e-3, 2.5e-3),
                              reflectivity_range=(0.5, 0.6),
                              spacer_points=3, reflectivity_points=3)
    with pytest.raises(DesignInfeasibleError) as err:
        design_filter(rep, purity_target=1e-6, constraints=tight)
    assert err.value.best is not None
    assert err.value.best.unwanted_fraction > 1e-6


def test_filter_validation():
    with pytest.raises(ValueError):
        FpFilter(spacer_length_m=-1.0, reflectivity=0.99)
    with pytest.raises(ValueError):
        FpFilter(spacer_length_m=3.8e-3, reflectivity=1.2)
