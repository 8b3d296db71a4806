"""Ring-cavity model: per-polarization FSRs, finesse, decay rate, Airy weights.

The free spectral range for polarization eps is the inverse group round-trip
time, FSR_eps = c / sum_x n_g,x L_x, summed over the regions of the ring in
round-trip order. Air regions have n = n_g = 1 exactly. The resonance
enhancement of an intracavity field at detuning d from a resonance is the
normalized Airy weight

    |A(d)|^2 = 1 / (1 + (2 F / pi)^2 sin^2(pi d / FSR)),

unity on resonance, periodic in the FSR, FWHM ~= FSR / F.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.constants import c as C_LIGHT

from . import _kernels

#: FWHM of each photon of a cavity-enhanced pair divided by the cavity
#: linewidth gamma/2pi: sqrt(sqrt(2) - 1), the sub-natural narrowing of the
#: Airy-squared line (approximately 0.64).
PAIR_NARROWING_FACTOR = math.sqrt(math.sqrt(2.0) - 1.0)


class CavityError(ValueError):
    pass


@dataclass(frozen=True)
class CavityRegion:
    """One segment of the ring in round-trip order.

    axes maps polarization labels to crystal axes, e.g. {"V": "y", "H": "z"};
    None means vacuum/air (index exactly 1 for both polarizations).
    """

    name: str
    length_m: float
    axes: dict | None = None
    temperature_c: float = 25.0

    def __post_init__(self):
        if self.length_m <= 0:
            raise CavityError(f"region {self.name!r} must have positive length")


@dataclass(frozen=True)
class Calibration:
    """Documented FSR calibration: air-length shift plus per-polarization
    multiplicative corrections on crystal group index."""

    air_length_delta_m: float = 0.0
    group_scale: dict = field(default_factory=dict)

    def scale(self, polarization: str) -> float:
        return self.group_scale.get(polarization, 1.0)


@dataclass(frozen=True)
class RingCavity:
    regions: tuple
    outcoupler_transmission: float
    residual_loss: float
    dispersion: object = None
    reference_wavelength_m: float = 794.98e-9
    calibration: Calibration | None = None

    def __post_init__(self):
        if not self.regions:
            raise CavityError("cavity needs at least one region")
        if not 0.0 < self.outcoupler_transmission < 1.0:
            raise CavityError("outcoupler transmission must be in (0, 1)")
        if not 0.0 <= self.residual_loss < 1.0:
            raise CavityError("residual loss must be in [0, 1)")
        if self.outcoupler_transmission + self.residual_loss >= 1.0:
            raise CavityError("total round-trip loss must stay below 1")

    def region(self, name: str) -> CavityRegion:
        for reg in self.regions:
            if reg.name == name:
                return reg
        raise KeyError(f"no cavity region named {name!r}")

    def group_path(self, polarization: str, wavelength_m=None, use_calibration: bool = True) -> float:
        """Round-trip group optical path (m) for one polarization."""
        lam = self.reference_wavelength_m if wavelength_m is None else wavelength_m
        cal = self.calibration if use_calibration else None
        total = 0.0
        for reg in self.regions:
            length = reg.length_m
            if reg.axes is None:
                if cal is not None:
                    length += cal.air_length_delta_m
                total += length
            else:
                ng = self.dispersion.group_index(reg.axes[polarization], lam, reg.temperature_c)
                if cal is not None:
                    ng *= cal.scale(polarization)
                total += ng * length
        return total

    def fsr(self, polarization: str, wavelength_m=None, use_calibration: bool = True) -> float:
        return C_LIGHT / self.group_path(polarization, wavelength_m, use_calibration)

    def fsr_mean(self, pol_a: str = "V", pol_b: str = "H", use_calibration: bool = True) -> float:
        return 0.5 * (self.fsr(pol_a, use_calibration=use_calibration)
                      + self.fsr(pol_b, use_calibration=use_calibration))

    def finesse(self) -> float:
        loss = self.outcoupler_transmission + self.residual_loss
        return 2.0 * math.pi / loss

    def decay_rate(self) -> float:
        """Cavity power decay rate gamma (angular Hz), from FSR_mean / finesse."""
        return 2.0 * math.pi * self.fsr_mean() / self.finesse()

    def linewidth_hz(self) -> float:
        return self.fsr_mean() / self.finesse()

    def mode_comb(self, polarization: str, anchor_hz: float, use_calibration: bool = True) -> "ModeComb":
        return ModeComb(polarization, float(anchor_hz),
                        self.fsr(polarization, use_calibration=use_calibration))


@dataclass(frozen=True)
class ModeComb:
    """Resonance ladder anchor + m * fsr for one polarization."""

    polarization: str
    anchor_hz: float
    fsr_hz: float

    def __post_init__(self):
        if self.fsr_hz <= 0:
            raise CavityError("fsr must be positive")

    def frequency(self, m):
        return self.anchor_hz + np.asarray(m) * self.fsr_hz

    def nearest_index(self, frequency_hz):
        return np.rint((np.asarray(frequency_hz) - self.anchor_hz) / self.fsr_hz).astype(int)

    def detuning(self, frequency_hz):
        """Offset from the nearest comb resonance, in (-fsr/2, fsr/2]."""
        d = (np.asarray(frequency_hz) - self.anchor_hz) % self.fsr_hz
        d = np.where(d > self.fsr_hz / 2, d - self.fsr_hz, d)
        return d if d.ndim else float(d)


def fsr(cavity: RingCavity, polarization: str, wavelength_m=None, use_calibration: bool = True) -> float:
    return cavity.fsr(polarization, wavelength_m, use_calibration)


def finesse_and_decay(cavity: RingCavity):
    """(finesse, gamma) with finesse = 2 pi / round-trip loss and
    gamma = 2 pi FSR_mean / finesse (angular Hz)."""
    return cavity.finesse(), cavity.decay_rate()


def airy_coefficient(finesse: float) -> float:
    if finesse <= 1.0:
        raise CavityError("finesse must exceed 1")
    return (2.0 * finesse / math.pi) ** 2


def airy_weight(comb: ModeComb, finesse: float, frequency_hz):
    """Normalized resonance weight |A|^2 at an absolute frequency."""
    det = np.asarray(frequency_hz, dtype=float) - comb.anchor_hz
    out = _kernels.airy(det, comb.fsr_hz, airy_coefficient(finesse))
    return out if out.ndim else float(out)


def airy_fwhm(fsr_hz: float, finesse: float) -> float:
    """Exact full width at half maximum of the Airy peak (~ FSR / finesse)."""
    return 2.0 * fsr_hz / math.pi * math.asin(math.pi / (2.0 * finesse))


def pair_photon_fwhm(gamma: float) -> float:
    """FWHM (Hz) of each emitted photon given the cavity decay rate gamma
    (angular Hz): the squared cavity Lorentzian narrows the line to
    sqrt(sqrt(2)-1) ~= 0.64 of the cavity linewidth."""
    return PAIR_NARROWING_FACTOR * gamma / (2.0 * math.pi)


def calibrate_fsr(cavity: RingCavity, fsr_signal_hz: float, fsr_idler_hz: float,
                  signal_pol: str = "V", idler_pol: str = "H",
                  air_region: str | None = None) -> RingCavity:
    """Fit the calibration so the cavity reproduces the given per-polarization FSRs.

    Solves for a shared air-length shift and a symmetric pair of group-index
    factors (1 -+ eps): two targets, two parameters, exact solution. The air
    shift absorbs the common FSR error (the nominal ring length is only known
    to ~1%), the tiny eps the differential one.
    """
    if not any(reg.axes is None for reg in cavity.regions):
        raise CavityError("calibration needs an air region to absorb the length correction")
    base = replace(cavity, calibration=None)
    lam = cavity.reference_wavelength_m
    path_s_target = C_LIGHT / fsr_signal_hz
    path_i_target = C_LIGHT / fsr_idler_hz
    air_total = sum(reg.length_m for reg in cavity.regions if reg.axes is None)
    n_air = sum(1 for reg in cavity.regions if reg.axes is None)
    crystal_s = base.group_path(signal_pol, lam, use_calibration=False) - air_total
    crystal_i = base.group_path(idler_pol, lam, use_calibration=False) - air_total
    eps = (path_i_target - path_s_target - (crystal_i - crystal_s)) / (crystal_i + crystal_s)
    delta_air = (path_s_target - crystal_s * (1.0 - eps) - air_total) / n_air
    cal = Calibration(air_length_delta_m=float(delta_air),
                      group_scale={signal_pol: 1.0 - float(eps), idler_pol: 1.0 + float(eps)})
    return replace(cavity, calibration=cal)
