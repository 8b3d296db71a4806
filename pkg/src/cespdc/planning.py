"""Frequency-chain planning for the locked source.

The probe laser locks to a saturated-absorption feature nu_ref, offset by two
AOMs: nu_laser = nu_ref - nu_aom1 and nu_signal = nu_laser + nu_aom2, so the
lock can sit up to |aom range| away from the feature. The pump is offset-
locked at nu_pump = nu_signal + nu_idler (exact, by construction), constrained
by the offset-lock capture range; the idler is placed by the tuning-crystal
temperature, periodic in the idler FSR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from scipy.optimize import brentq

from .cavity import RingCavity


@dataclass(frozen=True)
class Violation:
    constraint: str
    message: str


class PlanInfeasibleError(ValueError):
    """No settings satisfy the constraint set; lists what was violated."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(v.message for v in self.violations))


@dataclass(frozen=True)
class PlanConstraints:
    aom_min_hz: float = 156e6
    aom_max_hz: float = 164e6
    pump_offset_min_hz: float = 80e6
    pump_offset_max_hz: float = 1.5e9
    delta_nu_max_hz: float = 1.18e9
    # 1 treats each configured AOM frequency as the total shift of its step;
    # set 2 to count a physical double pass per drive frequency instead.
    aom_double_pass_factor: int = 1

    def __post_init__(self):
        if self.aom_double_pass_factor not in (1, 2):
            raise ValueError("aom_double_pass_factor must be 1 or 2")


AOM_CENTER_HZ = 160e6


@dataclass(frozen=True)
class FrequencyPlan:
    reference_name: str
    nu_ref: float
    nu_aom1: float
    nu_aom2: float
    delta_nu: float
    nu_laser: float
    nu_signal: float
    nu_idler: float
    nu_pump: float
    pump_offset: float
    constraints: PlanConstraints = field(default_factory=PlanConstraints)

    @property
    def nu_lock(self) -> float:
        return self.nu_signal


def d1_reference_features(data) -> list:
    """Saturated-absorption lock candidates: every D1 line plus the crossover
    midway between lines sharing an isotope and ground level."""
    feats = []
    by_group: dict = {}
    for t in data.transitions:
        nu = data.line_frequency(t)
        feats.append((f"{t.isotope}Rb F{t.ground_f}->F'{t.excited_f}", nu))
        by_group.setdefault((t.isotope, t.ground_f), []).append((t.excited_f, nu))
    for (iso, f), lines in by_group.items():
        if len(lines) == 2:
            (fa, va), (fb, vb) = sorted(lines)
            feats.append((f"{iso}Rb F{f} co({fa},{fb})", (va + vb) / 2.0))
    return sorted(feats, key=lambda kv: kv[1])


def _aom_candidates(delta, dp, delta_nu, cons: PlanConstraints):
    """Feasible nu_aom2 values worth checking: the objective and constraints
    are piecewise linear in nu_aom2, so optima sit on breakpoints."""
    lo = max(cons.aom_min_hz, cons.aom_min_hz + delta)
    hi = min(cons.aom_max_hz, cons.aom_max_hz + delta)
    if lo > hi:
        return []
    pts = {lo, hi, AOM_CENTER_HZ + delta / 2.0, AOM_CENTER_HZ, AOM_CENTER_HZ + delta}
    for bound in (cons.pump_offset_min_hz, -cons.pump_offset_min_hz,
                  cons.pump_offset_max_hz, -cons.pump_offset_max_hz):
        pts.add((bound - delta_nu) / (2.0 * dp))
    out = []
    for a2 in pts:
        a2 = min(max(a2, lo), hi)
        off = 2.0 * dp * a2 + delta_nu
        if cons.pump_offset_min_hz <= abs(off) <= cons.pump_offset_max_hz:
            out.append(a2)
    return out


def solve_plan(target_signal_hz: float, target_idler_hz: float,
               reference_features, constraints: PlanConstraints | None = None) -> FrequencyPlan:
    """Pick the lock feature and AOM pair bridging the laser to the target
    signal frequency with maximal margin (AOMs nearest their 160 MHz center),
    subject to the AOM range, pump-offset window, and signal-idler bound."""
    cons = constraints or PlanConstraints()
    features = list(reference_features)
    if not features:
        raise ValueError("need at least one reference feature")
    delta_nu = target_idler_hz - target_signal_hz
    if abs(delta_nu) > cons.delta_nu_max_hz:
        raise PlanInfeasibleError([Violation(
            "delta_nu_max",
            f"|nu_idler - nu_signal| = {abs(delta_nu)/1e9:.3f} GHz exceeds the "
            f"{cons.delta_nu_max_hz/1e9:.2f} GHz bound")])
    dp = float(cons.aom_double_pass_factor)
    span = dp * (cons.aom_max_hz - cons.aom_min_hz)
    best = None
    nearest_miss = math.inf
    for name, nu_ref in features:
        delta = (target_signal_hz - nu_ref) / dp  # required aom2 - aom1
        if abs(delta) > cons.aom_max_hz - cons.aom_min_hz:
            nearest_miss = min(nearest_miss, abs(target_signal_hz - nu_ref))
            continue
        for a2 in _aom_candidates(delta, dp, delta_nu, cons):
            a1 = a2 - delta
            cost = abs(a1 - AOM_CENTER_HZ) + abs(a2 - AOM_CENTER_HZ)
            key = (cost, abs(target_signal_hz - nu_ref), nu_ref)
            if best is None or key < best[0]:
                best = (key, name, nu_ref, a1, a2)
    if best is None:
        raise PlanInfeasibleError([
            Violation("aom_range",
                      f"no lock feature within the +-{span/1e6:.0f} MHz AOM bridge of the "
                      f"signal target (closest miss {nearest_miss/1e6:.1f} MHz)"),
            Violation("pump_offset",
                      f"or no AOM setting keeps |pump offset| within "
                      f"[{cons.pump_offset_min_hz/1e6:.0f} MHz, "
                      f"{cons.pump_offset_max_hz/1e9:.2f} GHz]"),
        ])
    _, name, nu_ref, a1, a2 = best
    nu_laser = nu_ref - dp * a1
    nu_signal = nu_laser + dp * a2
    nu_idler = nu_signal + delta_nu
    nu_pump = nu_signal + nu_idler
    plan = FrequencyPlan(
        reference_name=name, nu_ref=nu_ref, nu_aom1=a1, nu_aom2=a2,
        delta_nu=delta_nu, nu_laser=nu_laser, nu_signal=nu_signal,
        nu_idler=nu_idler, nu_pump=nu_pump,
        pump_offset=nu_pump - 2.0 * nu_laser, constraints=cons)
    leftovers = validate_plan(plan)
    if leftovers:
        raise PlanInfeasibleError(leftovers)
    return plan


def validate_plan(plan: FrequencyPlan) -> list:
    """Re-check every invariant; returns machine-readable violations
    (empty list = valid plan)."""
    cons = plan.constraints
    dp = float(cons.aom_double_pass_factor)
    out = []
    if not cons.aom_min_hz <= plan.nu_aom1 <= cons.aom_max_hz:
        out.append(Violation("aom_range", f"nu_aom1 = {plan.nu_aom1/1e6:.3f} MHz outside "
                             f"[{cons.aom_min_hz/1e6:.0f}, {cons.aom_max_hz/1e6:.0f}] MHz"))
    if not cons.aom_min_hz <= plan.nu_aom2 <= cons.aom_max_hz:
        out.append(Violation("aom_range", f"nu_aom2 = {plan.nu_aom2/1e6:.3f} MHz outside "
                             f"[{cons.aom_min_hz/1e6:.0f}, {cons.aom_max_hz/1e6:.0f}] MHz"))
    if abs(plan.nu_laser - (plan.nu_ref - dp * plan.nu_aom1)) > 1e-3:
        out.append(Violation("laser_chain", "nu_laser != nu_ref - nu_aom1"))
    if abs(plan.nu_signal - (plan.nu_laser + dp * plan.nu_aom2)) > 1e-3:
        out.append(Violation("laser_chain", "nu_signal != nu_laser + nu_aom2"))
    if plan.nu_pump != plan.nu_signal + plan.nu_idler:
        out.append(Violation("energy_conservation", "nu_pump != nu_signal + nu_idler"))
    if abs(plan.delta_nu - (plan.nu_idler - plan.nu_signal)) > 1e-3:
        out.append(Violation("delta_nu", "delta_nu != nu_idler - nu_signal"))
    if abs(plan.delta_nu) > cons.delta_nu_max_hz:
        out.append(Violation("delta_nu_max",
                             f"|delta_nu| = {abs(plan.delta_nu)/1e9:.3f} GHz exceeds "
                             f"{cons.delta_nu_max_hz/1e9:.2f} GHz"))
    off = abs(plan.pump_offset)
    if not cons.pump_offset_min_hz - 1e-3 <= off <= cons.pump_offset_max_hz + 1e-3:
        out.append(Violation("pump_offset",
                             f"|pump offset| = {off/1e6:.1f} MHz outside "
                             f"[{cons.pump_offset_min_hz/1e6:.0f} MHz, "
                             f"{cons.pump_offset_max_hz/1e9:.2f} GHz]"))
    return out


def _relocked_idler_shift(cavity: RingCavity, region_name: str, dt_k: float,
                          signal_pol: str, idler_pol: str, nu_idler: float) -> float:
    """Idler-comb shift when the tuning crystal warms by dt while the cavity
    lock holds the signal comb fixed (air path absorbs the signal-path change)."""
    cavity.region(region_name)  # fail fast on a bad name
    warmed = replace(cavity, regions=tuple(
        replace(r, temperature_c=r.temperature_c + dt_k) if r.name == region_name else r
        for r in cavity.regions))
    p_s0 = cavity.group_path(signal_pol)
    p_i0 = cavity.group_path(idler_pol)
    relock = p_s0 - warmed.group_path(signal_pol)
    p_i = warmed.group_path(idler_pol) + relock
    return -nu_idler * (p_i - p_i0) / p_i0


def delta_nu_to_tuning_temperature(delta_nu_hz: float, cavity: RingCavity,
                                   region_name: str = "ktp-tuning",
                                   signal_pol: str = "V", idler_pol: str = "H",
                                   nu_idler_hz: float = 377.107e12,
                                   window_k: float = 15.0):
    """Temperature offset of the tuning crystal that moves the idler comb by
    delta_nu relative to the locked signal comb.

    The comb is periodic, so the request is folded into +-FSR_i/2 first.
    Returns (temperature_offset_k, residual_hz).
    """
    if delta_nu_hz == 0.0:
        return 0.0, 0.0
    fsr_i = cavity.fsr(idler_pol)
    target = math.remainder(delta_nu_hz, fsr_i)

    def f(dt):
        return _relocked_idler_shift(cavity, region_name, dt, signal_pol,
                                     idler_pol, nu_idler_hz) - target

    lo, hi = f(-window_k), f(window_k)
    span = sorted((lo + target, hi + target))
    if not min(lo, hi) <= 0.0 <= max(lo, hi):
        raise PlanInfeasibleError([Violation(
            "tuning_range",
            f"delta_nu folded to {target/1e6:.1f} MHz is outside the "
            f"[{span[0]/1e6:.1f}, {span[1]/1e6:.1f}] MHz reachable within "
            f"+-{window_k:.0f} K")])
    dt = brentq(f, -window_k, window_k, xtol=1e-6)
    return float(dt), float(f(dt))
