"""DER_A model: full/reduced dynamics, QSS block, boundary layer, and dispatch."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from loadreduce.blocks import VP_FRESH, InputSignal, vp_curve
from loadreduce.dera import (
    DERA_BOUNDS,
    DERA_DEFAULTS,
    DERA_FAST_INDICES,
    DERA_SETTLE_TIME,
    DERA_SLOW_INDICES,
    DeraFlags,
    DeraParams,
    InitializationFailure,
    advance_protection,
    dera_boundary_rhs,
    dera_currents,
    dera_full_rhs,
    dera_gamma,
    dera_initialize,
    dera_outputs,
    dera_qss_h,
    dera_reduced_rhs,
    dera_system,
    freq_to_pu,
    merge_full_state,
    split_full_state,
)
from loadreduce.odesolve import OdeProblem, SolverConfig, integrate
from loadreduce.timescale import (
    QSS_PLUS_BOUNDARY_LAYER,
    assess,
    build_boundary_layer,
    build_reduced,
    estimate_decay,
)

NOMINAL = (1.0, 1.0)


def dispatch(p0=0.5, q0=0.05, prm=DERA_DEFAULTS, u0=NOMINAL):
    return dera_initialize(u0, prm, p0, q0)


# ---------------------------------------------------------------------------
# parameter and flag validation
# ---------------------------------------------------------------------------

def test_flags_reject_non_binary():
    with pytest.raises(ValueError):
        DeraFlags(pf_flag=2)
    with pytest.raises(ValueError):
        DeraFlags(typeflag=-1)


def test_params_reject_bad_values():
    with pytest.raises(ValueError):
        DeraParams(Tg=0.0)
    with pytest.raises(ValueError):
        DeraParams(Trf=0.01)  # frequency transducer floor
    with pytest.raises(ValueError):
        DeraParams(Pmin=1.0, Pmax=0.5)
    with pytest.raises(ValueError):
        DeraParams(dbd1=0.1, dbd2=-0.1)


def test_frequency_normalization():
    assert freq_to_pu(60.0) == 1.0
    assert freq_to_pu(59.4) == pytest.approx(0.99)


# ---------------------------------------------------------------------------
# full model
# ---------------------------------------------------------------------------

def test_full_rhs_voltage_filter_row():
    # lag with Trv = 0.1 pulling a unit state toward a 0.8 pu terminal
    state, cfg = dispatch()
    s = state.copy()
    s[0] = 1.0
    d, _ = dera_full_rhs(s, (0.8, 1.0), cfg)
    assert d[0] == pytest.approx(-2.0, abs=1e-12)


def test_full_rhs_stationary_at_dispatch():
    state, cfg = dispatch(0.5, 0.0)
    d, _ = dera_full_rhs(state, NOMINAL, cfg)
    assert np.max(np.abs(d)) <= 1e-9


def test_full_rhs_stationary_with_reactive_dispatch():
    state, cfg = dispatch(0.5, 0.05)
    d, _ = dera_full_rhs(state, NOMINAL, cfg)
    assert np.max(np.abs(d)) <= 1e-9
    # terminal outputs match the dispatch
    p, q = dera_outputs(state[3], state[9], NOMINAL)
    assert p == pytest.approx(0.5, abs=1e-9)
    assert q == pytest.approx(0.05, abs=1e-9)


def test_full_rhs_stationary_with_constant_q_control():
    prm = DeraParams(flags=DeraFlags(pf_flag=0))
    state, cfg = dispatch(0.4, -0.1, prm=prm)
    d, _ = dera_full_rhs(state, NOMINAL, cfg)
    assert np.max(np.abs(d)) <= 1e-9


def test_full_rhs_power_order_row_is_gated_off():
    state, cfg = dispatch()
    rng = np.random.default_rng(3)
    for _ in range(20):
        s = rng.uniform(0.1, 1.0, size=10)
        d, _ = dera_full_rhs(s, (rng.uniform(0.5, 1.1), 1.0), cfg)
        assert d[7] == 0.0


def test_power_order_constant_along_sag_trajectory():
    state, cfg = dispatch()

    def sag(t):
        return np.array([0.8 if 1.0 <= t < 1.0 + 5.0 / 60.0 else 1.0, 1.0])

    mem = [VP_FRESH]
    prob = OdeProblem(
        rhs=lambda t, y, u: dera_full_rhs(y, u, cfg, mem[0], t)[0],
        input=InputSignal(sag, breakpoints=(1.0, 1.0 + 5.0 / 60.0)),
        initial_state=state,
        t_span=(0.0, 2.0),
        discontinuity_times=(1.0, 1.0 + 5.0 / 60.0),
        on_accept=lambda t, y: mem.__setitem__(0, advance_protection(mem[0], y, cfg, t)),
    )
    traj = integrate(prob, SolverConfig(rel_tol=1e-6, abs_tol=1e-9))
    assert np.max(np.abs(traj.states[:, 7] - state[7])) == 0.0


def test_full_rhs_rejects_non_finite_state():
    state, cfg = dispatch()
    bad = state.copy()
    bad[2] = math.inf
    from loadreduce.odesolve import NumericalBlowup

    with pytest.raises(NumericalBlowup):
        dera_full_rhs(bad, NOMINAL, cfg)


def test_protection_memory_latches_during_deep_sag():
    state, cfg = dispatch()
    mem = advance_protection(VP_FRESH, np.array([0.46] + list(state[1:])), cfg, 0.0)
    mem = advance_protection(mem, np.array([0.46] + list(state[1:])), cfg, 0.2)
    assert mem.min_latched < 1.0


# ---------------------------------------------------------------------------
# reduced model
# ---------------------------------------------------------------------------

def test_reduced_rhs_zero_at_aligned_state():
    _, cfg = dispatch()
    x = np.array([0.97, 0.31, 1.01, 0.31])
    assert np.max(np.abs(dera_reduced_rhs(x, (0.97, 1.01), cfg))) == 0.0


def test_reduced_rhs_voltage_filter_row():
    _, cfg = dispatch()
    x = np.array([1.0, 0.5, 1.0, 0.5])
    d = dera_reduced_rhs(x, (0.8, 1.0), cfg)
    assert d[0] == pytest.approx(-2.0, abs=1e-12)


def test_reduced_rhs_power_order_row_always_zero():
    _, cfg = dispatch()
    rng = np.random.default_rng(5)
    for _ in range(20):
        x = rng.uniform(0.0, 1.2, size=4)
        u = (rng.uniform(0.3, 1.2), rng.uniform(0.97, 1.03))
        assert dera_reduced_rhs(x, u, cfg)[3] == 0.0


def test_reduced_rhs_matches_generic_builder():
    state, cfg = dispatch()
    sys = dera_system(cfg)
    prob = build_reduced(sys, initial_state=state[list(DERA_SLOW_INDICES)])
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(100):
        x = np.array([rng.uniform(0.3, 1.2), rng.uniform(0.0, 1.0),
                      rng.uniform(0.97, 1.03), rng.uniform(0.0, 1.0)])
        u = np.array([rng.uniform(0.3, 1.2), rng.uniform(0.97, 1.03)])
        worst = max(worst, np.max(np.abs(prob.rhs(0.0, x, u) - dera_reduced_rhs(x, u, cfg))))
    assert worst <= 1e-12


# ---------------------------------------------------------------------------
# gamma and QSS block
# ---------------------------------------------------------------------------

def test_gamma_zero_inside_deadband():
    prm = DeraParams(pfaref=0.0, Vref0=1.0)
    assert dera_gamma(np.array([1.02, 0.0, 1.0, 0.0]), prm) == 0.0


def test_gamma_voltage_support_term():
    # 0.1 pu error less the 0.05 deadband, times the gain of 5
    prm = DeraParams(pfaref=0.0, Vref0=1.1)
    assert dera_gamma(np.array([1.0, 0.0, 1.0, 0.0]), prm) == pytest.approx(0.25, abs=1e-12)


def test_gamma_power_factor_term():
    # tan at a 0.95 power factor is 0.3287; half power gives 0.16435
    prm = DeraParams(pfaref=math.atan(0.3287), Vref0=1.0)
    assert dera_gamma(np.array([1.0, 0.5, 1.0, 0.5]), prm) == pytest.approx(0.16435, abs=1e-12)


def test_qss_matches_equilibrium_fast_block():
    state, cfg = dispatch()
    x, z = split_full_state(state)
    assert np.max(np.abs(dera_qss_h(x, NOMINAL, cfg) - z)) <= 1e-12
    assert np.max(np.abs(merge_full_state(x, z) - state)) == 0.0


def test_qss_residual_zero_on_regular_rows():
    _, cfg = dispatch()
    sys = dera_system(cfg)
    rng = np.random.default_rng(7)
    regular = [i for i in range(6) if i != 3]
    for _ in range(100):
        x = np.array([rng.uniform(0.02, 1.3), rng.uniform(-0.5, 1.5),
                      rng.uniform(0.9, 1.1), rng.uniform(-0.2, 1.4)])
        u = np.array([x[0], 1.0])
        res = sys.g(x, dera_qss_h(x, u, cfg), u, 0.0)
        assert np.max(np.abs(res[regular])) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(
    v=st.floats(0.0, 1.4),
    p=st.floats(-0.5, 1.5),
    f=st.floats(0.95, 1.05),
    w=st.floats(-0.5, 1.5),
)
def test_qss_residual_property(v, p, f, w):
    # saturated and tripped regimes included: the closed form tracks every branch
    state, cfg = dispatch()
    sys = dera_system(cfg)
    x = np.array([v, p, f, w])
    u = np.array([v, f])
    res = sys.g(x, dera_qss_h(x, u, cfg), u, 0.0)
    regular = [i for i in range(6) if i != 3]
    assert np.max(np.abs(res[regular])) <= 1e-10


# ---------------------------------------------------------------------------
# boundary layer
# ---------------------------------------------------------------------------

def test_boundary_origin_is_equilibrium():
    state, cfg = dispatch()
    x, _ = split_full_state(state)
    d = dera_boundary_rhs(np.zeros(6), x, NOMINAL, cfg)
    assert np.max(np.abs(d)) <= 1e-10


def test_boundary_filter_rows_decay_at_unit_rate():
    state, cfg = dispatch()
    x, _ = split_full_state(state)
    rng = np.random.default_rng(13)
    for _ in range(10):
        y = rng.uniform(-0.4, 0.4, size=6)
        d = dera_boundary_rhs(y, x, NOMINAL, cfg)
        assert d[0] == pytest.approx(-y[0], abs=1e-14)
        assert d[2] == pytest.approx(-y[2], abs=1e-14)
        assert d[4] == pytest.approx(-y[4], abs=1e-14)


def test_boundary_matches_generic_deviation_form():
    state, cfg = dispatch()
    sys = dera_system(cfg)
    rng = np.random.default_rng(17)
    worst = 0.0
    for _ in range(100):
        x = np.array([rng.uniform(0.4, 1.2), rng.uniform(0.0, 1.0),
                      rng.uniform(0.97, 1.03), rng.uniform(0.0, 1.0)])
        u = np.array([x[0], 1.0])
        y = rng.uniform(-0.5, 0.5, size=6)
        prob = build_boundary_layer(sys, x, u)
        gen = prob.rhs(0.0, y, np.zeros(2))
        worst = max(worst, np.max(np.abs(gen - dera_boundary_rhs(y, x, u, cfg))))
    assert worst <= 1e-9


def test_boundary_layer_decays_from_random_starts():
    state, cfg = dispatch()
    sys = dera_system(cfg)
    x, _ = split_full_state(state)
    rng = np.random.default_rng(19)
    for _ in range(5):
        y0 = rng.uniform(-1.0, 1.0, size=6)
        y0 *= rng.uniform(0.1, 0.5) / np.linalg.norm(y0)
        prob = build_boundary_layer(sys, x, NOMINAL, y0=y0, tau_span=(0.0, 10.0))
        traj = integrate(prob, SolverConfig(rel_tol=1e-9, abs_tol=1e-12))
        k1, a = estimate_decay(traj)
        assert a > 0.0
        # the current deviations themselves are gone at the end of the layer
        assert abs(traj.states[-1][1]) <= 1e-3
        assert abs(traj.states[-1][5]) <= 1e-3


# ---------------------------------------------------------------------------
# currents and outputs
# ---------------------------------------------------------------------------

def test_currents_qss_passthrough():
    _, cfg = dispatch(0.5, 0.0)
    # inside the deadband, unsaturated, protection fully online
    x = np.array([1.0, 0.4, 1.0, 0.4])
    iq, idc = dera_currents(x, None, NOMINAL, cfg)
    assert iq == pytest.approx(dera_gamma(x, cfg), abs=1e-12)
    assert idc == pytest.approx(0.4, abs=1e-12)


def test_currents_vanish_when_protection_trips():
    _, cfg = dispatch()
    x = np.array([0.3, 0.4, 1.0, 0.4])  # 0.3 pu is below the 0.44 cutoff
    assert vp_curve(x[0], cfg.vp) == 0.0
    iq, idc = dera_currents(x, np.zeros(6), (0.3, 1.0), cfg)
    assert iq == 0.0
    assert idc == 0.0


def test_currents_boundary_correction_shifts_d_axis():
    _, cfg = dispatch(0.5, 0.0)
    x = np.array([1.0, 0.5, 1.0, 0.5])
    y = np.zeros(6)
    y[5] = 0.01
    iq, idc = dera_currents(x, y, NOMINAL, cfg)
    assert idc == pytest.approx(0.51, abs=1e-12)


def test_outputs_examples():
    assert dera_outputs(0.0, 0.0, NOMINAL) == (0.0, 0.0)
    p, q = dera_outputs(0.0, 0.5, (1.0, 1.0))
    assert p == pytest.approx(0.5) and q == 0.0
    p1, q1 = dera_outputs(0.3, 0.5, NOMINAL)
    p2, q2 = dera_outputs(-0.3, 0.5, NOMINAL)
    assert p1 == p2 and q1 == -q2


# ---------------------------------------------------------------------------
# initialization
# ---------------------------------------------------------------------------

def test_initialize_zero_dispatch_is_dark():
    state, cfg = dispatch(0.0, 0.0)
    assert state[8] == 0.0 and state[9] == 0.0
    d, _ = dera_full_rhs(state, NOMINAL, cfg)
    assert np.max(np.abs(d)) <= 1e-9


def test_initialize_rejects_power_beyond_ceiling():
    with pytest.raises(InitializationFailure, match="Pmax"):
        dispatch(1.2, 0.0)


def test_initialize_rejects_overcurrent_dispatch():
    # 1.05 pu active with 0.6 pu reactive exceeds the 1.2 pu current circle
    with pytest.raises(InitializationFailure, match="Imax"):
        dispatch(1.05, -0.6)


def test_initialize_sets_voltage_reference_to_terminal():
    _, cfg = dispatch(u0=(0.98, 1.0))
    assert cfg.Vref0 == pytest.approx(0.98)
    # an explicit positive reference survives
    prm = DeraParams(Vref0=1.02)
    _, cfg2 = dispatch(prm=prm)
    assert cfg2.Vref0 == pytest.approx(1.02)


# ---------------------------------------------------------------------------
# two-time-scale embedding
# ---------------------------------------------------------------------------

def test_split_embedding_recovers_full_model():
    state, cfg = dispatch()
    sys = dera_system(cfg)
    rng = np.random.default_rng(23)
    worst_f = worst_g = 0.0
    for _ in range(50):
        w = rng.uniform(0.1, 1.1, size=10)
        u = np.array([rng.uniform(0.4, 1.2), rng.uniform(0.97, 1.03)])
        full, _ = dera_full_rhs(w, u, cfg)
        x, z = split_full_state(w)
        worst_f = max(worst_f, np.max(np.abs(sys.f(x, z, u, sys.epsilon)
                                             - full[list(DERA_SLOW_INDICES)])))
        worst_g = max(worst_g, np.max(np.abs(sys.g(x, z, u, sys.epsilon)
                                             - sys.epsilon * full[list(DERA_FAST_INDICES)])))
    assert worst_f <= 1e-11
    assert worst_g <= 1e-11


def test_system_requires_shared_fast_scale():
    _, cfg = dispatch()
    from dataclasses import replace

    with pytest.raises(ValueError):
        dera_system(replace(cfg, Tg=0.004))
    with pytest.raises(ValueError):
        dera_system(replace(cfg, flags=DeraFlags(freq_flag=1)))


def test_assess_wants_boundary_layer_correction():
    state, cfg = dispatch()
    sys = dera_system(cfg)
    decision = assess(sys, DERA_BOUNDS, DERA_SETTLE_TIME)
    assert decision.verdict == QSS_PLUS_BOUNDARY_LAYER
    assert decision.eps_double_star < sys.epsilon <= decision.eps_star
