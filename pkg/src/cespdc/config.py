"""Run-configuration loading: one TOML document describes the source, filter,
cell, correlation settings, and planner constraints for every CLI command.

Either a bundled preset (by name) or a user file can be loaded; when both are
given the user file is deep-merged over the preset, so a config may override
a single key. Seeds are always explicit.
"""

from __future__ import annotations

import hashlib
import math
import sys
from dataclasses import dataclass
from importlib import resources

from .cavity import CavityRegion, RingCavity, calibrate_fsr
from .dispersion import PolingSpec, load_dispersion
from .fabry_perot import FpFilter
from .planning import PlanConstraints
from .rubidium import RbD1Data, VaporCell, load_rb_data
from .spectrum import SourceConfig

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class CorrelationSettings:
    gamma_s: float
    gamma_i: float
    background_rate_hz: float
    pair_rate_hz: float
    duration_s: float
    bin_width_s: float
    window_s: float


@dataclass(frozen=True)
class ScanSettings:
    jsi_span_hz: float
    jsi_points: int
    dfg_span_hz: float
    dfg_points: int
    filter_scan_range_hz: float
    filter_scan_step_hz: float
    enumeration_window_hz: float
    weight_floor: float
    spectroscopy_span_hz: float
    spectroscopy_step_hz: float


@dataclass(frozen=True)
class RunBundle:
    source: SourceConfig
    fp: FpFilter
    cell: VaporCell
    correlation: CorrelationSettings
    plan_constraints: PlanConstraints
    tuning_region: str
    scan: ScanSettings
    seed: int
    rb_data: RbD1Data
    raw: dict
    digest: str


def preset_text(name: str) -> str:
    src = resources.files("cespdc").joinpath(f"data/presets/{name}.toml")
    try:
        return src.read_text()
    except FileNotFoundError:
        raise ConfigError(f"no bundled preset named {name!r}") from None


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, val in override.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = val
    return out


def _need(raw: dict, section: str) -> dict:
    try:
        return raw[section]
    except KeyError:
        raise ConfigError(f"config is missing the [{section}] section") from None


def _build_cavity(raw: dict, dispersion) -> RingCavity:
    sec = _need(raw, "cavity")
    regions = []
    for reg in sec.get("region", []):
        axes = reg.get("axes")
        if reg.get("medium", "air") == "air":
            axes = None
        elif axes is None:
            raise ConfigError(f"crystal region {reg.get('name')!r} needs an axes map")
        regions.append(CavityRegion(
            name=reg["name"],
            length_m=float(reg["length_mm"]) * 1e-3,
            axes=dict(axes) if axes else None,
            temperature_c=float(reg.get("temperature_c", 25.0)),
        ))
    if not regions:
        raise ConfigError("cavity needs at least one [[cavity.region]]")
    cavity = RingCavity(
        regions=tuple(regions),
        outcoupler_transmission=float(sec["outcoupler_transmission"]),
        residual_loss=float(sec["residual_loss"]),
        dispersion=dispersion,
        reference_wavelength_m=float(sec["reference_wavelength_nm"]) * 1e-9,
    )
    cal = sec.get("calibration")
    if cal:
        cavity = calibrate_fsr(cavity,
                               float(cal["fsr_signal_mhz"]) * 1e6,
                               float(cal["fsr_idler_mhz"]) * 1e6)
    return cavity


def _build_poling(raw: dict) -> PolingSpec:
    sec = _need(raw, "poling")
    eff = sec.get("effective_length_mm")
    return PolingSpec(
        period_m=float(sec["period_um"]) * 1e-6,
        length_m=float(sec["length_mm"]) * 1e-3,
        temperature_c=float(sec.get("temperature_c", 25.0)),
        effective_length_m=None if eff is None else float(eff) * 1e-3,
    )


def _build_source(raw: dict, cavity, poling) -> SourceConfig:
    sec = _need(raw, "source")
    anchor = float(sec["signal_anchor_hz"])
    offset = float(sec.get("tuning_offset_mhz", 0.0)) * 1e6
    return SourceConfig(
        cavity=cavity,
        poling=poling,
        pump_frequency_hz=2.0 * anchor + offset,
        signal_anchor_hz=anchor,
        tuning_offset_hz=offset,
        background=float(sec.get("background", 0.0)),
    )


def _build_filter(raw: dict, anchor_hz: float) -> FpFilter:
    sec = _need(raw, "filter")
    lw = sec.get("measured_linewidth_mhz")
    return FpFilter(
        spacer_length_m=float(sec["spacer_mm"]) * 1e-3,
        reflectivity=float(sec["reflectivity"]),
        peak_transmission=float(sec.get("peak_transmission", 1.0)),
        spacer_expansion_per_k=float(sec.get("spacer_expansion_per_k", 3.2e-6)),
        mirror_expansion_per_k=float(sec.get("mirror_expansion_per_k", 5.1e-7)),
        mirror_effective_thickness_m=float(sec.get("mirror_effective_thickness_mm", 0.0)) * 1e-3,
        reference_temperature_c=float(sec.get("reference_temperature_c", 25.0)),
        reference_resonance_hz=anchor_hz,
        measured_linewidth_hz=None if lw is None else float(lw) * 1e6,
    )


def _build_cell(raw: dict, data: RbD1Data) -> VaporCell:
    sec = _need(raw, "cell")
    return VaporCell(
        length_m=float(sec["length_cm"]) * 1e-2,
        temperature_c=float(sec["temperature_c"]),
        data=data,
        density_scale=float(sec.get("density_scale", 1.0)),
    )


def _build_correlation(raw: dict) -> CorrelationSettings:
    sec = _need(raw, "correlation")
    return CorrelationSettings(
        gamma_s=2.0 * math.pi * float(sec["gamma_s_mhz"]) * 1e6,
        gamma_i=2.0 * math.pi * float(sec["gamma_i_mhz"]) * 1e6,
        background_rate_hz=float(sec.get("background_rate_hz", 0.0)),
        pair_rate_hz=float(sec.get("pair_rate_hz", 5e4)),
        duration_s=float(sec.get("duration_s", 20.0)),
        bin_width_s=float(sec.get("bin_ps", 625)) * 1e-12,
        window_s=float(sec.get("window_ns", 200.0)) * 1e-9,
    )


def _build_plan(raw: dict) -> tuple:
    sec = raw.get("plan", {})
    cons = PlanConstraints(
        aom_min_hz=float(sec.get("aom_min_mhz", 156.0)) * 1e6,
        aom_max_hz=float(sec.get("aom_max_mhz", 164.0)) * 1e6,
        pump_offset_min_hz=float(sec.get("pump_offset_min_mhz", 80.0)) * 1e6,
        pump_offset_max_hz=float(sec.get("pump_offset_max_ghz", 1.5)) * 1e9,
        delta_nu_max_hz=float(sec.get("delta_nu_max_ghz", 1.18)) * 1e9,
        aom_double_pass_factor=int(sec.get("aom_double_pass_factor", 1)),
    )
    return cons, str(sec.get("tuning_region", "ktp-tuning"))


def _build_scan(raw: dict) -> ScanSettings:
    sec = raw.get("scan", {})
    return ScanSettings(
        jsi_span_hz=float(sec.get("jsi_span_ghz", 2.0)) * 1e9,
        jsi_points=int(sec.get("jsi_points", 4001)),
        dfg_span_hz=float(sec.get("dfg_span_ghz", 160.0)) * 1e9,
        dfg_points=int(sec.get("dfg_points", 32001)),
        filter_scan_range_hz=float(sec.get("filter_scan_range_ghz", 30.0)) * 1e9,
        filter_scan_step_hz=float(sec.get("filter_scan_step_mhz", 20.0)) * 1e6,
        enumeration_window_hz=float(sec.get("enumeration_window_ghz", 475.0)) * 1e9,
        weight_floor=float(sec.get("weight_floor", 1e-4)),
        spectroscopy_span_hz=float(sec.get("spectroscopy_span_ghz", 4.0)) * 1e9,
        spectroscopy_step_hz=float(sec.get("spectroscopy_step_mhz", 40.0)) * 1e6,
    )


def load_bundle(config_path=None, preset: str | None = None,
                seed: int | None = None) -> RunBundle:
    """Resolve preset and/or config file into live model objects.

    The SHA-256 digest covers the merged document plus any seed override, so
    a manifest carrying it pins the run's full input state.
    """
    if config_path is None and preset is None:
        raise ConfigError("need a --preset name or a --config file")
    user_text = user_raw = None
    if config_path is not None:
        try:
            with open(config_path, "r") as fh:
                user_text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        try:
            user_raw = tomllib.loads(user_text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"config parse error: {exc}") from None
        # a config file may name its base preset inline
        if preset is None:
            preset = user_raw.get("preset")
    raw: dict = {}
    pieces = []
    if preset is not None:
        text = preset_text(preset)
        pieces.append(text)
        raw = tomllib.loads(text)
    if user_raw is not None:
        pieces.append(user_text)
        raw = _merge(raw, user_raw)
    if raw.get("schema") != "cespdc-run/1":
        raise ConfigError("config must declare schema = 'cespdc-run/1'")
    if seed is None:
        seed = raw.get("seed")
    if seed is None:
        raise ConfigError("no RNG seed: set seed = <int> in the config or pass --seed")
    digest = hashlib.sha256(
        ("\n---\n".join(pieces) + f"\nseed={int(seed)}").encode()).hexdigest()
    dispersion = load_dispersion()
    rb = load_rb_data()
    cavity = _build_cavity(raw, dispersion)
    poling = _build_poling(raw)
    try:
        source = _build_source(raw, cavity, poling)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    cons, tuning_region = _build_plan(raw)
    return RunBundle(
        source=source,
        fp=_build_filter(raw, source.signal_anchor_hz),
        cell=_build_cell(raw, rb),
        correlation=_build_correlation(raw),
        plan_constraints=cons,
        tuning_region=tuning_region,
        scan=_build_scan(raw),
        seed=int(seed),
        rb_data=rb,
        raw=raw,
        digest=digest,
    )
