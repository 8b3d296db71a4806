"""Cavity-enhanced SPDC photon-pair source simulator and design toolkit.

Models a doubly resonant ring cavity around a quasi-phase-matched PPKTP
crystal pumped for degenerate type-II down-conversion near 795 nm, the
Fabry-Perot mode-cleaning filter behind it, the rubidium vapor cell used
for spectral characterization, and the Rb-referenced frequency chain that
locks and tunes the whole source.
"""

from __future__ import annotations

__version__ = "0.1.0"

from ._kernels import BACKEND as KERNEL_BACKEND
from .cavity import (Calibration, CavityError, CavityRegion, ModeComb, RingCavity,
                     airy_fwhm, airy_weight, calibrate_fsr, finesse_and_decay,
                     pair_photon_fwhm)
from .config import ConfigError, RunBundle, load_bundle
from .correlation import (DetectionEventStream, EnvelopeFit, FitError, G2Histogram,
                          G2Model, RateReport, bin_coincidences, comb_period_estimate,
                          comb_power_ratio, correct_rates, fit_envelope, g2_envelope,
                          g2_multimode, model_from_source, simulate_events)
from .dispersion import (CrystalDispersion, PolingSpec, SellmeierModel, group_index_fd,
                         load_dispersion, phase_matching_bandwidth, phase_mismatch,
                         sinc2_efficiency, solve_phase_matching)
from .fabry_perot import (DesignInfeasibleError, ExtinctionReport, FilterConstraints,
                          FilterDesign, FpFilter, calibrated_mirror_thickness,
                          design_filter, extinction_report, filtered_jsi, fp_fsr,
                          fp_transmission, kelvin_per_fsr, temperature_for_shift,
                          thermal_resonance_shift, transmission_at)
from .planning import (AOM_CENTER_HZ, FrequencyPlan, PlanConstraints,
                       PlanInfeasibleError, Violation, d1_reference_features,
                       delta_nu_to_tuning_temperature, solve_plan, validate_plan)
from .rubidium import (RbD1Data, VaporCell, blocked_band_center_hz, blocked_spacings_hz,
                       blocked_transitions, cell_transmission, doppler_fwhm,
                       filter_scan, load_rb_data, optical_depth, photon_spectroscopy,
                       vapor_density)
from .spectrum import (Cluster, ClusterReport, ModePair, SourceConfig, brightest_pair,
                       cluster_report, cluster_spacing, dfg_scan, enumerate_mode_pairs,
                       jsi_slice, modes_per_cluster)

__all__ = [
    "__version__", "KERNEL_BACKEND",
    # cavity
    "Calibration", "CavityError", "CavityRegion", "ModeComb", "RingCavity",
    "airy_fwhm", "airy_weight", "calibrate_fsr", "finesse_and_decay",
    "pair_photon_fwhm",
    # config
    "ConfigError", "RunBundle", "load_bundle",
    # correlation
    "DetectionEventStream", "EnvelopeFit", "FitError", "G2Histogram", "G2Model",
    "RateReport", "bin_coincidences", "comb_period_estimate", "comb_power_ratio",
    "correct_rates", "fit_envelope", "g2_envelope", "g2_multimode",
    "model_from_source", "simulate_events",
    # dispersion
    "CrystalDispersion", "PolingSpec", "SellmeierModel", "group_index_fd",
    "load_dispersion", "phase_matching_bandwidth", "phase_mismatch",
    "sinc2_efficiency", "solve_phase_matching",
    # fabry_perot
    "DesignInfeasibleError", "ExtinctionReport", "FilterConstraints", "FilterDesign",
    "FpFilter", "calibrated_mirror_thickness", "design_filter", "extinction_report",
    "filtered_jsi", "fp_fsr", "fp_transmission", "kelvin_per_fsr",
    "temperature_for_shift", "thermal_resonance_shift", "transmission_at",
    # planning
    "AOM_CENTER_HZ", "FrequencyPlan", "PlanConstraints", "PlanInfeasibleError",
    "Violation", "d1_reference_features", "delta_nu_to_tuning_temperature",
    "solve_plan", "validate_plan",
    # rubidium
    "RbD1Data", "VaporCell", "blocked_band_center_hz", "blocked_spacings_hz",
    "blocked_transitions", "cell_transmission", "doppler_fwhm", "filter_scan",
    "load_rb_data", "optical_depth", "photon_spectroscopy", "vapor_density",
    # spectrum
    "Cluster", "ClusterReport", "ModePair", "SourceConfig", "brightest_pair",
    "cluster_report", "cluster_spacing", "dfg_scan", "enumerate_mode_pairs",
    "jsi_slice", "modes_per_cluster",
]
