"""Tunable air-spaced Fabry-Perot mode filter.

Transmission is the Airy function scaled by the on-resonance peak T_max^2,
periodic in FSR_FP = c/2L. Thermal tuning is linear: the resonance moves by
-nu dL/L, with dL from the spacer expansion plus a signed mirror-substrate
term whose effective thickness is a stored calibration constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.constants import c as C_LIGHT

from . import _kernels
from .cavity import airy_coefficient
from .spectrum import brightest_pair

BOROFLOAT_EXPANSION = 3.2e-6   # 1/K
FUSED_SILICA_EXPANSION = 5.1e-7  # 1/K


class DesignInfeasibleError(ValueError):
    """Purity target unreachable inside the constraint box; carries the best
    design found so the caller can inspect how close it got."""

    def __init__(self, message, best):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class FpFilter:
    spacer_length_m: float
    reflectivity: float
    peak_transmission: float = 1.0
    spacer_expansion_per_k: float = BOROFLOAT_EXPANSION
    mirror_expansion_per_k: float = FUSED_SILICA_EXPANSION
    # Signed effective substrate thickness of the two mirror faces. Positive
    # shortens the cavity on heating (faces bulge inward); the value shipped
    # in the preset is calibrated against the measured K-per-FSR tuning rate.
    mirror_effective_thickness_m: float = 0.0
    reference_temperature_c: float = 25.0
    reference_resonance_hz: float = 377.107e12
    measured_linewidth_hz: float | None = None

    def __post_init__(self):
        if self.spacer_length_m <= 0:
            raise ValueError("spacer length must be positive")
        if not 0.0 < self.reflectivity < 1.0:
            raise ValueError("mirror reflectivity must be in (0, 1)")
        if not 0.0 < self.peak_transmission <= 1.0:
            raise ValueError("peak transmission must be in (0, 1]")

    @property
    def fsr_hz(self) -> float:
        return C_LIGHT / (2.0 * self.spacer_length_m)

    @property
    def finesse(self) -> float:
        """pi sqrt(R)/(1-R), unless a measured linewidth overrides it."""
        if self.measured_linewidth_hz is not None:
            return self.fsr_hz / self.measured_linewidth_hz
        return math.pi * math.sqrt(self.reflectivity) / (1.0 - self.reflectivity)

    @property
    def linewidth_hz(self) -> float:
        return self.fsr_hz / self.finesse

    def tuned_to(self, resonance_hz: float) -> "FpFilter":
        return replace(self, reference_resonance_hz=float(resonance_hz))


def fp_fsr(fp: FpFilter) -> float:
    return fp.fsr_hz


def fp_transmission(fp: FpFilter, detuning_hz):
    """Transmission at a detuning from the reference resonance (Eq.-(7) Airy
    form times T_max^2); periodic in the filter FSR."""
    det = np.asarray(detuning_hz, dtype=float)
    out = fp.peak_transmission * _kernels.airy(det, fp.fsr_hz, airy_coefficient(fp.finesse))
    return out if out.ndim else float(out)


def transmission_at(fp: FpFilter, frequency_hz):
    return fp_transmission(fp, np.asarray(frequency_hz, dtype=float) - fp.reference_resonance_hz)


def length_rate_per_k(fp: FpFilter) -> float:
    """dL/dT in m/K: spacer lengthens, mirror faces move by the signed
    effective-thickness term."""
    return (fp.spacer_expansion_per_k * fp.spacer_length_m
            - 2.0 * fp.mirror_expansion_per_k * fp.mirror_effective_thickness_m)


def thermal_resonance_shift(fp: FpFilter, delta_t_k: float) -> float:
    """Resonance shift (Hz) for a temperature change; linear model, valid to
    ~+-60 K."""
    if abs(delta_t_k) > 60.0:
        raise ValueError("linear expansion model only trusted to +-60 K")
    rel = length_rate_per_k(fp) * delta_t_k / fp.spacer_length_m
    return -fp.reference_resonance_hz * rel


def kelvin_per_fsr(fp: FpFilter) -> float:
    """Temperature change that moves the comb by exactly one FSR."""
    per_k = abs(thermal_resonance_shift(fp, 1.0))
    return fp.fsr_hz / per_k


def temperature_for_shift(fp: FpFilter, shift_hz: float) -> float:
    return shift_hz / thermal_resonance_shift(fp, 1.0)


def calibrated_mirror_thickness(spacer_length_m: float, kelvin_per_fsr_target: float,
                                reference_resonance_hz: float,
                                spacer_expansion_per_k: float = BOROFLOAT_EXPANSION,
                                mirror_expansion_per_k: float = FUSED_SILICA_EXPANSION) -> float:
    """Solve the signed mirror effective thickness so one FSR costs exactly
    the given temperature change."""
    fsr = C_LIGHT / (2.0 * spacer_length_m)
    needed = fsr * spacer_length_m / (reference_resonance_hz * kelvin_per_fsr_target)
    return (spacer_expansion_per_k * spacer_length_m - needed) / (2.0 * mirror_expansion_per_k)


def filtered_jsi(config, signal_filter: FpFilter | None, idler_filter: FpFilter | None,
                 signal_freq_hz):
    """JSI slice times the transmission of whichever arm filters are present;
    an absent filter contributes a factor of exactly 1."""
    from .spectrum import jsi_slice

    w = jsi_slice(config, signal_freq_hz)
    sig = np.asarray(signal_freq_hz, dtype=float)
    if signal_filter is not None:
        w = w * transmission_at(signal_filter, sig)
    if idler_filter is not None:
        w = w * transmission_at(idler_filter, config.pump_frequency_hz - sig)
    return w if np.ndim(w) else float(w)


@dataclass(frozen=True)
class ExtinctionRow:
    signal_freq_hz: float
    raw_weight: float
    filtered_weight: float
    suppression_db: float


@dataclass(frozen=True)
class ExtinctionReport:
    selected_signal_hz: float
    unwanted_fraction: float
    worst_suppression_db: float
    rows: tuple


def extinction_report(pairs, signal_filter: FpFilter | None,
                      idler_filter: FpFilter | None = None,
                      selected=None) -> ExtinctionReport:
    """Filtered mode budget: what fraction of collected pairs is not the
    selected mode, and how far down every other mode sits.

    Mode contributions use the linewidth-integrated pair brightness times the
    filter transmission at the mode centers (filters are broad compared to the
    7 MHz cavity lines, so the transmission is flat across each line).
    """
    if not pairs:
        raise ValueError("empty mode-pair list")
    if selected is None:
        selected = brightest_pair(pairs)
    sig = signal_filter.tuned_to(selected.signal_freq_hz) if signal_filter else None
    idl = idler_filter.tuned_to(selected.idler_freq_hz) if idler_filter else None
    rows = []
    contributions = []
    for p in pairs:
        t = 1.0
        if sig is not None:
            t *= float(transmission_at(sig, p.signal_freq_hz))
        if idl is not None:
            t *= float(transmission_at(idl, p.idler_freq_hz))
        contributions.append(p.brightness * t)
        rows.append((p, p.brightness, p.brightness * t))
    total = sum(contributions)
    sel_idx = pairs.index(selected)
    sel_contribution = contributions[sel_idx]
    unwanted = (total - sel_contribution) / total
    out_rows = []
    worst = -math.inf
    for (p, raw, filt) in rows:
        if p is selected:
            db = 0.0
        else:
            db = 10.0 * math.log10(filt / sel_contribution) if filt > 0 else -math.inf
            worst = max(worst, db)
        out_rows.append(ExtinctionRow(p.signal_freq_hz, raw, filt, db))
    return ExtinctionReport(
        selected_signal_hz=selected.signal_freq_hz,
        unwanted_fraction=float(unwanted),
        worst_suppression_db=float(worst),
        rows=tuple(out_rows),
    )


@dataclass(frozen=True)
class FilterConstraints:
    spacer_range_m: tuple = (2.0e-3, 6.0e-3)
    reflectivity_range: tuple = (0.95, 0.998)
    spacer_points: int = 41
    reflectivity_points: int = 16


@dataclass(frozen=True)
class FilterDesign:
    fp: FpFilter
    unwanted_fraction: float
    worst_suppression_db: float


def design_filter(spectrum, purity_target: float,
                  constraints: FilterConstraints = FilterConstraints(),
                  peak_transmission: float = 1.0) -> FilterDesign:
    """Grid search over (spacer length, reflectivity) for a signal-arm filter
    whose unwanted-photon fraction meets the target on the given spectrum.

    A single-mode spectrum is trivially pure, so the minimal-finesse corner of
    the box is returned. An unreachable target raises DesignInfeasibleError
    carrying the best design found.
    """
    pairs = list(spectrum.pairs) if hasattr(spectrum, "pairs") else list(spectrum)
    if not pairs:
        raise ValueError("empty spectrum")
    lo_s, hi_s = constraints.spacer_range_m
    lo_r, hi_r = constraints.reflectivity_range
    if not (0 < lo_s <= hi_s and 0 < lo_r <= hi_r < 1):
        raise ValueError("malformed constraint ranges")
    if len(pairs) == 1:
        fp = FpFilter(lo_s, lo_r, peak_transmission,
                      reference_resonance_hz=pairs[0].signal_freq_hz)
        return FilterDesign(fp, 0.0, -math.inf)
    best = None
    for spacer in np.linspace(lo_s, hi_s, constraints.spacer_points):
        for refl in np.linspace(lo_r, hi_r, constraints.reflectivity_points):
            fp = FpFilter(float(spacer), float(refl), peak_transmission)
            rep = extinction_report(pairs, fp)
            cand = FilterDesign(fp.tuned_to(rep.selected_signal_hz),
                                rep.unwanted_fraction, rep.worst_suppression_db)
            if best is None or cand.unwanted_fraction < best.unwanted_fraction:
                best = cand
    if best.unwanted_fraction > purity_target:
        raise DesignInfeasibleError(
            f"best unwanted fraction {best.unwanted_fraction:.4f} misses the "
            f"{purity_target:.4f} target", best)
    return best
