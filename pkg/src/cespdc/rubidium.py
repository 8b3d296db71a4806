"""Rubidium D1 vapor-cell absorption model, Doppler-broadened, natural abundance.

Line data (hyperfine offsets, relative strengths, ground-level populations,
vapor-pressure coefficients) ship in data/rb_d1_steck.toml, derived from the
Steck alkali data compilation. Profiles are pure Gaussians: the 5.75 MHz
natural width is negligible against the ~550 MHz Doppler width, so no Voigt.

Optical depth per transition:

    OD(nu) = scale * N(T) * L * pi r_e c f * w * g(nu),

with w = isotope abundance x ground-level population x relative strength and
g the area-normalized Doppler Gaussian. `scale` is a single global calibration
constant (the cell anchors are qualitative transmission levels, not an
absolute cross-section measurement).
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, replace
from importlib import resources

import numpy as np
from scipy.constants import c as C_LIGHT
from scipy.constants import k as K_BOLTZMANN
from scipy.constants import physical_constants

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

R_ELECTRON = physical_constants["classical electron radius"][0]
TORR_TO_PA = 133.322368
_FOUR_LN2 = 4.0 * math.log(2.0)


@dataclass(frozen=True)
class AtomicTransition:
    isotope: int
    ground_f: int
    excited_f: int
    frequency_offset_hz: float
    relative_strength: float
    ground_fraction: float

    def __post_init__(self):
        if self.isotope not in (85, 87):
            raise ValueError("isotope must be 85 or 87")


@dataclass(frozen=True)
class RbD1Data:
    reference_frequency_hz: float
    oscillator_strength: float
    transitions: tuple
    abundance: dict
    mass_kg: dict
    vapor_solid: tuple
    vapor_liquid: tuple
    melting_point_k: float

    def line_frequency(self, t: AtomicTransition) -> float:
        return self.reference_frequency_hz + t.frequency_offset_hz


def load_rb_data(path=None) -> RbD1Data:
    """Load the bundled (or an alternative) D1 line data file."""
    if path is None:
        src = resources.files("cespdc").joinpath("data/rb_d1_steck.toml")
        raw = tomllib.loads(src.read_text())
    else:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    if raw.get("schema") != "alkali-lines/1":
        raise ValueError("unrecognized atomic data schema")
    amu = physical_constants["atomic mass constant"][0]
    abundance, mass = {}, {}
    for iso in raw["isotope"]:
        key = int(iso["name"].removeprefix("Rb"))
        abundance[key] = float(iso["abundance"])
        mass[key] = float(iso["mass_u"]) * amu
    if abs(sum(abundance.values()) - 1.0) > 1e-6:
        raise ValueError("isotope abundances must sum to 1")
    lines = tuple(
        AtomicTransition(
            isotope=int(ln["isotope"].removeprefix("Rb")),
            ground_f=int(ln["f_lower"]),
            excited_f=int(ln["f_upper"]),
            frequency_offset_hz=float(ln["offset_hz"]),
            relative_strength=float(ln["strength"]),
            ground_fraction=float(ln["ground_fraction"]),
        )
        for ln in raw["line"]
    )
    vp = raw["vapor_pressure"]
    return RbD1Data(
        reference_frequency_hz=float(raw["reference_frequency_hz"]),
        oscillator_strength=float(raw["oscillator_strength"]),
        transitions=lines,
        abundance=abundance,
        mass_kg=mass,
        vapor_solid=tuple(vp["solid"]),
        vapor_liquid=tuple(vp["liquid"]),
        melting_point_k=float(vp["melting_point_k"]),
    )


@dataclass(frozen=True)
class VaporCell:
    length_m: float
    temperature_c: float
    data: RbD1Data
    density_scale: float = 1.0

    def __post_init__(self):
        if self.length_m <= 0:
            raise ValueError("cell length must be positive")
        if not -40.0 <= self.temperature_c <= 200.0:
            raise ValueError("vapor-pressure model valid for -40..200 C only")

    def at_temperature(self, temperature_c: float) -> "VaporCell":
        return replace(self, temperature_c=temperature_c)


def vapor_density(temperature_c: float, data: RbD1Data) -> float:
    """Rb number density (atoms/m^3) from the two-branch vapor-pressure
    correlation log10(P/torr) = a - b/T."""
    t_k = temperature_c + 273.15
    a, b = data.vapor_solid if t_k < data.melting_point_k else data.vapor_liquid
    p_pa = 10.0 ** (a - b / t_k) * TORR_TO_PA
    return p_pa / (K_BOLTZMANN * t_k)


def doppler_fwhm(frequency_hz: float, temperature_c: float, mass_kg: float) -> float:
    t_k = temperature_c + 273.15
    return frequency_hz * math.sqrt(8.0 * math.log(2.0) * K_BOLTZMANN * t_k
                                    / (mass_kg * C_LIGHT ** 2))


def doppler_profile(transition: AtomicTransition, data: RbD1Data,
                    temperature_c: float, probe_hz):
    """Area-normalized Doppler Gaussian (1/Hz) for one transition."""
    if not 0.0 <= temperature_c <= 150.0:
        raise ValueError("profile validated for 0..150 C")
    nu0 = data.line_frequency(transition)
    fwhm = doppler_fwhm(nu0, temperature_c, data.mass_kg[transition.isotope])
    x = (np.asarray(probe_hz, dtype=float) - nu0) / fwhm
    peak = 2.0 * math.sqrt(math.log(2.0) / math.pi) / fwhm
    out = peak * np.exp(-_FOUR_LN2 * x * x)
    return out if out.ndim else float(out)


def optical_depth(cell: VaporCell, probe_hz):
    data = cell.data
    dens = vapor_density(cell.temperature_c, data) * cell.density_scale
    sigma_int = math.pi * R_ELECTRON * C_LIGHT * data.oscillator_strength
    od = np.zeros_like(np.asarray(probe_hz, dtype=float))
    for t in data.transitions:
        w = data.abundance[t.isotope] * t.ground_fraction * t.relative_strength
        od = od + w * doppler_profile(t, data, cell.temperature_c, probe_hz)
    od = od * dens * cell.length_m * sigma_int
    return od if od.ndim else float(od)


def cell_transmission(cell: VaporCell, probe_hz):
    """Beer-Lambert transmission through the cell, in [0, 1]."""
    out = np.exp(-optical_depth(cell, probe_hz))
    return out if np.ndim(out) else float(out)


def blocked_transitions(data: RbD1Data) -> tuple:
    """The four lines inside the source's tuning band: 87Rb F=2 -> F'=1,2 and
    85Rb F=3 -> F'=2,3, sorted by frequency."""
    picked = [t for t in data.transitions
              if (t.isotope == 87 and t.ground_f == 2)
              or (t.isotope == 85 and t.ground_f == 3)]
    return tuple(sorted(picked, key=lambda t: t.frequency_offset_hz))


def blocked_spacings_hz(data: RbD1Data) -> tuple:
    lines = blocked_transitions(data)
    offs = [t.frequency_offset_hz for t in lines]
    return tuple(b - a for a, b in zip(offs, offs[1:]))


def blocked_band_center_hz(data: RbD1Data) -> float:
    lines = blocked_transitions(data)
    return (data.line_frequency(lines[0]) + data.line_frequency(lines[-1])) / 2.0


def filter_scan(config, fp, cell: VaporCell | None, scan_range_hz: float,
                step_hz: float, background: float = 0.0):
    """Singles rate vs filter detuning: every mode pair contributes its
    brightness times the (periodic, hence aliasing) filter transmission at
    its signal frequency, times the cell transmission if a cell is present.

    Returns (detuning_hz, singles) arrays. The filter reference resonance is
    re-anchored to the brightest pair so detuning 0 is the selected mode.
    """
    from .fabry_perot import fp_transmission
    from .spectrum import brightest_pair, enumerate_mode_pairs

    if scan_range_hz >= fp.fsr_hz:
        raise ValueError("scan range must stay below one filter FSR")
    pairs = enumerate_mode_pairs(config, window_hz=3.5 * fp.fsr_hz, weight_floor=1e-6)
    anchor = brightest_pair(pairs).signal_freq_hz
    det = np.arange(-scan_range_hz / 2.0, scan_range_hz / 2.0 + step_hz / 2.0, step_hz)
    singles = np.full(det.shape, float(background))
    for p in pairs:
        t_cell = float(cell_transmission(cell, p.signal_freq_hz)) if cell else 1.0
        if p.brightness * t_cell < 1e-9:
            continue
        singles = singles + p.brightness * t_cell * fp_transmission(
            fp, p.signal_freq_hz - anchor - det)
    return det, singles


@dataclass(frozen=True)
class SpectroscopyPoint:
    arm: str
    frequency_hz: float
    transmission: float


def photon_spectroscopy(sweep, fp, cell: VaporCell,
                        tuning_bound_hz: float = 1.18e9) -> list:
    """Transmission of signal photons and their idler partners through the
    cell, for a sweep of (signal frequency, idler-minus-signal offset) pairs.

    The filter selects the mode; the cell sets the transmission. Far-detuned
    points read 1 by construction (zero optical depth), matching the
    measurement's normalization.
    """
    rows = []
    for nu_s, delta_nu in sweep:
        if abs(delta_nu) > tuning_bound_hz:
            raise ValueError(
                f"idler offset {delta_nu/1e6:.0f} MHz exceeds the "
                f"{tuning_bound_hz/1e6:.0f} MHz tuning bound")
        rows.append(SpectroscopyPoint("signal", float(nu_s),
                                      float(cell_transmission(cell, nu_s))))
        rows.append(SpectroscopyPoint("idler", float(nu_s + delta_nu),
                                      float(cell_transmission(cell, nu_s + delta_nu))))
    return rows
