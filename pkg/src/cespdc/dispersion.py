"""Refractive-index and quasi-phase-matching model for the source crystal.

The crystal dispersion is described per principal axis by a two-pole
Sellmeier form with a linear thermo-optic correction,

    n(lam, T)^2|_Tref = c0 + sum_k b_k / (lam^2 - c_k)      (lam in um)
    n(lam, T) = n(lam, Tref) + (t0 + t1/lam + t2/lam^2 + t3/lam^3) 1e-5 (T - Tref)

with coefficients shipped as a versioned data file (see cespdc/data).
Group indices are computed from the analytic Sellmeier derivative; the
finite-difference version exists only as a test oracle.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace
from importlib import resources

import numpy as np
from scipy.constants import c as C_LIGHT
from scipy.optimize import brentq

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class DispersionRangeError(ValueError):
    """Raised when an evaluation point falls outside the model's validity window."""


@dataclass(frozen=True)
class SellmeierModel:
    """One crystal axis: Sellmeier poles plus a linear thermo-optic term.

    Parameters
    ----------
    axis : str
        Principal-axis label ("y" or "z" for an x-cut crystal).
    nsq_constant : float
        Constant term of n^2.
    nsq_poles : tuple of (b, c) pairs
        Pole strengths/positions, wavelength in micrometers squared.
    thermo_optic : tuple
        (t0, t1, t2, t3) of dn/dT = (t0 + t1/lam + t2/lam^2 + t3/lam^3)*1e-5.
    wavelength_window_um, temperature_window_c : (low, high)
        Validity window; evaluation outside raises DispersionRangeError.
    """

    axis: str
    nsq_constant: float
    nsq_poles: tuple
    thermo_optic: tuple
    wavelength_window_um: tuple = (0.35, 1.2)
    temperature_window_c: tuple = (-200.0, 200.0)
    reference_temperature_c: float = 25.0
    citation: str = ""

    def _check(self, lam_um, temperature_c) -> None:
        lo, hi = self.wavelength_window_um
        if np.any(lam_um < lo) or np.any(lam_um > hi):
            raise DispersionRangeError(
                f"wavelength outside validity window [{lo}, {hi}] um for axis {self.axis!r}"
            )
        tlo, thi = self.temperature_window_c
        if np.any(np.asarray(temperature_c) < tlo) or np.any(np.asarray(temperature_c) > thi):
            raise DispersionRangeError(
                f"temperature outside validity window [{tlo}, {thi}] C for axis {self.axis!r}"
            )

    def _dndt(self, lam_um):
        t0, t1, t2, t3 = self.thermo_optic
        return (t0 + t1 / lam_um + t2 / lam_um**2 + t3 / lam_um**3) * 1e-5

    def index(self, wavelength_m, temperature_c=25.0):
        """Refractive index n(lam, T). Accepts scalars or arrays (meters, Celsius)."""
        lam = np.asarray(wavelength_m, dtype=float) * 1e6
        self._check(lam, temperature_c)
        nsq = self.nsq_constant + sum(b / (lam**2 - c) for b, c in self.nsq_poles)
        n = np.sqrt(nsq) + self._dndt(lam) * (np.asarray(temperature_c) - self.reference_temperature_c)
        return n if n.ndim else float(n)

    def group_index(self, wavelength_m, temperature_c=25.0):
        """Group index n - lam dn/dlam from the analytic Sellmeier derivative."""
        lam = np.asarray(wavelength_m, dtype=float) * 1e6
        self._check(lam, temperature_c)
        u = lam**2
        nsq = self.nsq_constant + sum(b / (u - c) for b, c in self.nsq_poles)
        dnsq_du = -sum(b / (u - c) ** 2 for b, c in self.nsq_poles)
        n_ref = np.sqrt(nsq)
        # d/dlam of the thermo-optic polynomial contributes at finite T offset
        t0, t1, t2, t3 = self.thermo_optic
        dt = np.asarray(temperature_c) - self.reference_temperature_c
        dn_dlam = lam * dnsq_du / n_ref + (-t1 / lam**2 - 2 * t2 / lam**3 - 3 * t3 / lam**4) * 1e-5 * dt
        ng = n_ref + self._dndt(lam) * dt - lam * dn_dlam
        return ng if ng.ndim else float(ng)

    def dn_dt(self, wavelength_m):
        """Thermo-optic coefficient dn/dT (1/K) at the given wavelength."""
        lam = np.asarray(wavelength_m, dtype=float) * 1e6
        self._check(lam, self.reference_temperature_c)
        out = self._dndt(lam)
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class CrystalDispersion:
    """Both principal axes of one crystal material."""

    material: str
    axes: dict
    citation: str = ""

    def axis(self, name: str) -> SellmeierModel:
        try:
            return self.axes[name]
        except KeyError:
            raise KeyError(f"no axis {name!r}; have {sorted(self.axes)}") from None

    def index(self, axis, wavelength_m, temperature_c=25.0):
        return self.axis(axis).index(wavelength_m, temperature_c)

    def group_index(self, axis, wavelength_m, temperature_c=25.0):
        return self.axis(axis).group_index(wavelength_m, temperature_c)


def load_dispersion(path=None) -> CrystalDispersion:
    """Load a crystal dispersion data file (TOML). Default: the bundled KTP set."""
    if path is None:
        source = resources.files("cespdc.data").joinpath("ktp_kato_takaoka_2002.toml")
        raw = tomllib.loads(source.read_text(encoding="utf-8"))
    else:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    validity = raw.get("validity", {})
    window_um = tuple(validity.get("wavelength_um", (0.35, 1.2)))
    window_c = tuple(validity.get("temperature_c", (-200.0, 200.0)))
    t_ref = float(raw.get("reference_temperature_c", 25.0))
    citation = raw.get("citation", "")
    axes = {}
    for name, coeffs in raw["axis"].items():
        axes[name] = SellmeierModel(
            axis=name,
            nsq_constant=float(coeffs["nsq_constant"]),
            nsq_poles=tuple((float(b), float(c)) for b, c in coeffs["nsq_poles"]),
            thermo_optic=tuple(float(t) for t in coeffs["thermo_optic"]),
            wavelength_window_um=window_um,
            temperature_window_c=window_c,
            reference_temperature_c=t_ref,
            citation=citation,
        )
    return CrystalDispersion(material=raw.get("material", "?"), axes=axes, citation=citation)


@dataclass(frozen=True)
class PolingSpec:
    """Quasi-phase-matching grating and interaction geometry.

    The polarization-to-axis assignment is configurable. The default maps the
    vertically polarized pump and signal onto the crystal y axis and the
    horizontal idler onto z: with the shipped coefficient set this is the only
    assignment for which the first-order grating at a ~9.4 um period can
    cancel the bulk mismatch, and it makes the signal FSR the larger one.

    ``effective_length_m`` is the interaction length used inside the sinc
    argument. It defaults to the physical length; a shorter value models the
    bandwidth broadening of a tightly focused pump and doubles as the
    documented bandwidth calibration (see the paper-2020 preset).
    """

    period_m: float
    length_m: float
    temperature_c: float = 25.0
    pump_axis: str = "y"
    signal_axis: str = "y"
    idler_axis: str = "z"
    effective_length_m: float | None = None

    def __post_init__(self):
        if self.period_m <= 0 or self.length_m <= 0:
            raise ValueError("poling period and crystal length must be positive")

    @property
    def sinc_length_m(self) -> float:
        return self.length_m if self.effective_length_m is None else self.effective_length_m


def _wavevector(dispersion, axis, frequency_hz, temperature_c):
    lam = C_LIGHT / np.asarray(frequency_hz, dtype=float)
    n = dispersion.axis(axis).index(lam, temperature_c)
    return 2.0 * np.pi * n * np.asarray(frequency_hz, dtype=float) / C_LIGHT


def phase_mismatch(dispersion, poling: PolingSpec, signal_hz, idler_hz, pump_hz=None):
    """Quasi-phase-matched wave-vector mismatch (rad/m).

    Delta_k = k_p - k_s - k_i - 2 pi / Lambda with k = 2 pi n(lam, T) nu / c.
    The pump frequency defaults to signal + idler; if given explicitly it must
    satisfy energy conservation to within 1 Hz.
    """
    s = np.asarray(signal_hz, dtype=float)
    i = np.asarray(idler_hz, dtype=float)
    if pump_hz is None:
        p = s + i
    else:
        p = np.asarray(pump_hz, dtype=float)
        if np.any(np.abs(p - s - i) > 1.0):
            raise ValueError("pump frequency must equal signal + idler to within 1 Hz")
    T = poling.temperature_c
    dk = (
        _wavevector(dispersion, poling.pump_axis, p, T)
        - _wavevector(dispersion, poling.signal_axis, s, T)
        - _wavevector(dispersion, poling.idler_axis, i, T)
        - 2.0 * np.pi / poling.period_m
    )
    return dk if dk.ndim else float(dk)


def sinc2_efficiency(dispersion, poling: PolingSpec, signal_hz, idler_hz, pump_hz=None):
    """Normalized phase-matching efficiency sinc^2(Delta_k L_eff / 2)."""
    dk = phase_mismatch(dispersion, poling, signal_hz, idler_hz, pump_hz)
    x = np.asarray(dk) * poling.sinc_length_m / 2.0
    out = np.sinc(x / np.pi) ** 2
    return out if out.ndim else float(out)


def solve_phase_matching(dispersion, poling: PolingSpec, degenerate_hz,
                         vary: str = "temperature", bracket=None) -> PolingSpec:
    """Return a PolingSpec tuned so Delta_k = 0 at the degenerate point.

    vary="temperature" scans the crystal temperature at fixed period (the
    root may land far outside realistic oven settings when the coefficient
    data is extrapolated; the residual is exact either way). vary=
    "poling_period" solves for an effective grating period at the stored
    temperature, which is the calibration the paper-2020 preset uses.
    """
    nu = float(degenerate_hz)
    if vary == "temperature":
        lo, hi = bracket if bracket is not None else (-200.0, 200.0)
        f = lambda t: phase_mismatch(dispersion, replace(poling, temperature_c=t), nu, nu)
        t_pm = brentq(f, lo, hi, xtol=1e-9)
        return replace(poling, temperature_c=float(t_pm))
    if vary == "poling_period":
        lo, hi = bracket if bracket is not None else (poling.period_m * 0.5, poling.period_m * 2.0)
        f = lambda per: phase_mismatch(dispersion, replace(poling, period_m=per), nu, nu)
        per = brentq(f, lo, hi, xtol=1e-18)
        return replace(poling, period_m=float(per))
    raise ValueError("vary must be 'temperature' or 'poling_period'")


def phase_matching_bandwidth(dispersion, poling: PolingSpec, degenerate_hz) -> float:
    """FWHM (Hz, in signal frequency) of sinc^2 vs signal detuning at fixed pump.

    The efficiency is evaluated with the full dispersion model; the half-power
    points are found by bisection on each side of the degenerate point.
    """
    nu = float(degenerate_hz)
    peak = sinc2_efficiency(dispersion, poling, nu, nu)
    if peak < 0.5:
        raise ValueError("sinc^2 below one half at the degenerate point; solve phase matching first")

    def half(det):
        return sinc2_efficiency(dispersion, poling, nu + det, nu - det) - peak / 2.0

    hi = 1e9
    while half(hi) > 0:
        hi *= 2.0
        if hi > 1e14:
            raise RuntimeError("no half-power point below 100 THz detuning")
    upper = brentq(half, 1.0, hi, xtol=1e3)
    lo = -1e9
    while half(lo) > 0:
        lo *= 2.0
    lower = brentq(half, lo, -1.0, xtol=1e3)
    return float(upper - lower)


def group_index_fd(model: SellmeierModel, wavelength_m, temperature_c=25.0, rel_step=1e-5):
    """Finite-difference group index. Test oracle; prefer group_index."""
    lam = float(wavelength_m)
    h = lam * rel_step
    n_plus = model.index(lam + h, temperature_c)
    n_minus = model.index(lam - h, temperature_c)
    return model.index(lam, temperature_c) - lam * (n_plus - n_minus) / (2 * h)
