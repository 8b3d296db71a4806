from __future__ import annotations

import pytest

from cespdc.planning import (AOM_CENTER_HZ, PlanConstraints, PlanInfeasibleError,
                             d1_reference_features, delta_nu_to_tuning_temperature,
                             solve_plan, validate_plan)


@pytest.fixture(scope="module")
def features(rb_data):
    return d1_reference_features(rb_data)


@pytest.fixture(scope="module")
def anchor(rb_data):
    from cespdc.rubidium import blocked_transitions
    lines = blocked_transitions(rb_data)
    return rb_data.line_frequency(lines[0])


def test_reference_features_count(features):
    # 8 lines + 4 same-isotope, same-ground-state crossovers
    assert len(features) == 12
    names = [f[0] for f in features]
    assert len(set(names)) == 12
    assert any("co" in n.lower() or "/" in n for n in names)


def test_plan_chain_identities(features, anchor):
    plan = solve_plan(anchor, anchor + 250e6, features)
    assert plan.nu_laser == plan.nu_ref - plan.constraints.aom_double_pass_factor * plan.nu_aom1
    assert plan.nu_signal == plan.nu_laser + plan.constraints.aom_double_pass_factor * plan.nu_aom2
    assert plan.nu_pump == plan.nu_signal + plan.nu_idler
    assert plan.delta_nu == pytest.approx(250e6, abs=1e-3)
    assert validate_plan(plan) == []


def test_plan_hits_target_exactly(features, anchor):
    plan = solve_plan(anchor, anchor - 170e6, features)
    assert plan.nu_signal == pytest.approx(anchor, abs=1e-3)
    assert plan.nu_idler == pytest.approx(anchor - 170e6, abs=1e-3)
    assert validate_plan(plan) == []


def test_plan_prefers_aom_centers(features, anchor):
    plan = solve_plan(anchor, anchor + 250e6, features)
    cost = (abs(plan.nu_aom1 - AOM_CENTER_HZ)
            + abs(plan.nu_aom2 - AOM_CENTER_HZ))
    # no other feature could do better than the chosen one
    for name, f in features:
        lo, hi = plan.constraints.aom_min_hz, plan.constraints.aom_max_hz
        for a1 in (lo, AOM_CENTER_HZ, hi):
            a2 = anchor - (f - a1)
            if lo <= a2 <= hi:
                alt = abs(a1 - AOM_CENTER_HZ) + abs(a2 - AOM_CENTER_HZ)
                assert cost <= alt + 1e-6


def test_aom_outputs_inside_range(features, anchor):
    for delta in (-1.0e9, -170e6, 0.0, 250e6, 1.0e9):
        plan = solve_plan(anchor, anchor + delta, features)
        c = plan.constraints
        assert c.aom_min_hz <= plan.nu_aom1 <= c.aom_max_hz
        assert c.aom_min_hz <= plan.nu_aom2 <= c.aom_max_hz
        assert validate_plan(plan) == []


def test_wide_offset_rejected_citing_bound(features, anchor):
    with pytest.raises(PlanInfeasibleError) as err:
        solve_plan(anchor, anchor + 2e9, features)
    names = [v.constraint for v in err.value.violations]
    assert "delta_nu_max" in names
    assert "1.18" in str(err.value)


def test_pump_offset_window(features, anchor):
    plan = solve_plan(anchor, anchor + 250e6, features)
    c = plan.constraints
    assert c.pump_offset_min_hz <= abs(plan.pump_offset) <= c.pump_offset_max_hz


def test_double_pass_factor(features, anchor):
    c = PlanConstraints(aom_double_pass_factor=2)
    plan = solve_plan(anchor, anchor + 250e6, features, c)
    assert plan.nu_laser == plan.nu_ref - 2 * plan.nu_aom1
    assert validate_plan(plan) == []


def test_constraints_validation():
    with pytest.raises(ValueError):
        PlanConstraints(aom_double_pass_factor=3)


def test_tuning_temperature_zero_offset(cavity):
    dt, residual = delta_nu_to_tuning_temperature(0.0, cavity)
    assert dt == 0.0 and residual == 0.0


def test_tuning_temperature_regressions(cavity):
    dt, residual = delta_nu_to_tuning_temperature(250e6, cavity)
    assert dt == pytest.approx(1.948, abs=0.01)
    assert abs(residual) < 1.0
    dt2, _ = delta_nu_to_tuning_temperature(-170e6, cavity)
    assert dt2 == pytest.approx(1.356, abs=0.01)


def test_tuning_folds_by_idler_fsr(cavity):
    fsr_i = cavity.fsr("H")
    dt_a, _ = delta_nu_to_tuning_temperature(100e6, cavity)
    dt_b, _ = delta_nu_to_tuning_temperature(100e6 + fsr_i, cavity)
    assert dt_b == pytest.approx(dt_a, abs=1e-6)


def test_tuning_range_exhaustion(cavity):
    with pytest.raises(PlanInfeasibleError) as err:
        delta_nu_to_tuning_temperature(200e6, cavity, window_k=0.5)
    assert any(v.constraint == "tuning_range" for v in err.value.violations)
