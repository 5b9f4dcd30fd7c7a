import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from loadreduce.blocks import (
    VP_FRESH,
    DeadbandLimits,
    InputSignal,
    SatLimits,
    VoltageProtectionParams,
    VpMemory,
    constant_signal,
    deadband,
    evaluate_input,
    saturate,
    voltage_protection,
    vp_curve,
)

# Table 3 protection settings used throughout
VP_TABLE3 = VoltageProtectionParams(
    v_l0=0.44, v_l1=0.49, v_h1=1.15, v_h0=1.2,
    t_vl0=0.16, t_vl1=0.16, t_vh1=0.16, t_vh0=0.16,
    v_rfrac=0.7,
)


def test_saturate_interior_and_clamps():
    lim = SatLimits(-1.0, 1.0)
    assert saturate(0.5, lim) == 0.5
    assert saturate(2.0, lim) == 1.0
    assert saturate(-1.3, lim) == -1.0


@given(st.floats(-1e6, 1e6))
def test_saturate_idempotent(x):
    lim = SatLimits(-1.0, 1.0)
    assert saturate(saturate(x, lim), lim) == saturate(x, lim)


def test_sat_limits_validated():
    with pytest.raises(ValueError):
        SatLimits(1.0, -1.0)


def test_deadband_offset_convention():
    db = DeadbandLimits(-0.05, 0.05)
    assert deadband(0.03, db) == 0.0
    assert deadband(0.10, db) == pytest.approx(0.05)
    # frequency deadband edge from the DER parameter set
    fdb = DeadbandLimits(-0.0006, 0.0006)
    assert deadband(-0.0006, fdb) == 0.0


def test_deadband_continuous_at_edges():
    db = DeadbandLimits(-0.05, 0.05)
    eps = 1e-12
    assert abs(deadband(0.05 + eps, db)) < 1e-9
    assert abs(deadband(-0.05 - eps, db)) < 1e-9


def test_deadband_rejects_band_not_bracketing_zero():
    with pytest.raises(ValueError):
        DeadbandLimits(0.01, 0.05)


def test_vp_nominal_and_cutout():
    m, _ = voltage_protection(1.0, VP_TABLE3, VP_FRESH)
    assert m == 1.0
    m, _ = voltage_protection(0.44, VP_TABLE3, VP_FRESH)
    assert m == 0.0


def test_vp_linear_midpoint():
    # midpoint of [0.44, 0.49] sits halfway down the low-side ramp
    m, _ = voltage_protection(0.465, VP_TABLE3, VP_FRESH)
    assert m == pytest.approx(0.5)


def test_vp_params_validated():
    with pytest.raises(ValueError):
        VoltageProtectionParams(v_l0=0.5, v_l1=0.49, v_h1=1.15, v_h0=1.2)
    with pytest.raises(ValueError):
        VoltageProtectionParams(v_l0=0.44, v_l1=0.49, v_h1=1.15, v_h0=1.2, v_rfrac=1.5)


def test_vp_latch_and_partial_recovery():
    vp = VP_TABLE3
    mem = VP_FRESH
    # sit at the low-side midpoint past the persistence timer
    _, mem = voltage_protection(0.465, vp, mem, t=0.0)
    m, mem = voltage_protection(0.465, vp, mem, t=0.2)
    assert m == pytest.approx(0.5)
    assert mem.min_latched == pytest.approx(0.5)
    # recovery: only min + v_rfrac*(1 - min) of the fleet comes back
    m, mem = voltage_protection(1.0, vp, mem, t=0.3)
    assert m == pytest.approx(0.5 + 0.7 * 0.5)


def test_vp_no_latch_before_timer():
    vp = VP_TABLE3
    _, mem = voltage_protection(0.465, vp, VP_FRESH, t=0.0)
    m, mem = voltage_protection(0.465, vp, mem, t=0.1)  # 0.1 < 0.16
    assert mem.min_latched == 1.0
    m, mem = voltage_protection(1.0, vp, mem, t=0.15)
    assert m == 1.0  # nothing latched, full recovery


def test_vp_full_cutout_latches_zero_after_t_vl0():
    vp = VP_TABLE3
    _, mem = voltage_protection(0.3, vp, VP_FRESH, t=0.0)
    _, mem = voltage_protection(0.3, vp, mem, t=0.2)
    assert mem.min_latched == 0.0
    m, _ = voltage_protection(1.0, vp, mem, t=0.4)
    assert m == pytest.approx(0.7)  # v_rfrac of the fleet returns


def test_vp_latched_min_non_increasing_outside_band():
    vp = VP_TABLE3
    mem = VP_FRESH
    prev = mem.min_latched
    for k, v in enumerate([0.48, 0.47, 0.46, 0.45, 0.46, 0.47]):
        _, mem = voltage_protection(v, vp, mem, t=0.5 * k)
        assert mem.min_latched <= prev
        prev = mem.min_latched


@given(st.floats(0.0, 2.0))
def test_vp_multiplier_in_unit_interval(v):
    m, _ = voltage_protection(v, VP_TABLE3, VP_FRESH)
    assert 0.0 <= m <= 1.0


def test_vp_curve_continuity_at_breakpoints():
    for v0 in (0.44, 0.49, 1.15, 1.2):
        lo = vp_curve(v0 - 1e-9, VP_TABLE3)
        hi = vp_curve(v0 + 1e-9, VP_TABLE3)
        assert abs(lo - hi) < 1e-6


def test_evaluate_constant_signal():
    sig = constant_signal(1.0)
    assert evaluate_input(sig, 3.7) == pytest.approx(1.0)
    # pure: repeated calls bit-identical
    a = evaluate_input(sig, 3.7)
    b = evaluate_input(sig, 3.7)
    assert np.array_equal(a, b)


def test_evaluate_input_outside_horizon():
    sig = InputSignal(evaluator=lambda t: np.array([1.0]), t_start=0.0, t_end=5.0)
    with pytest.raises(ValueError):
        evaluate_input(sig, 6.0)


def test_frequency_channel_constant_sixty_hz():
    sig = constant_signal(1.0, 60.0)
    for t in (0.0, 1.0, 2.5, math.pi):
        assert evaluate_input(sig, t)[1] == 60.0
