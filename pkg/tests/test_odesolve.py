import math

import numpy as np
import pytest

from loadreduce.blocks import InputSignal, constant_signal
from loadreduce.odesolve import (
    NumericalBlowup,
    OdeProblem,
    SolverConfig,
    StiffnessOrSingularity,
    dense_output,
    integrate,
    numerical_jacobian,
    resample,
)


def decay_problem(t_end=1.0):
    return OdeProblem(
        rhs=lambda t, y, u: -y,
        input=constant_signal(0.0),
        initial_state=np.array([1.0]),
        t_span=(0.0, t_end),
    )


@pytest.mark.parametrize("method", ["nonstiff", "stiff"])
def test_exponential_decay_endpoint(method):
    traj = integrate(decay_problem(), SolverConfig(rel_tol=1e-8, abs_tol=1e-10, method=method))
    assert abs(traj.states[-1, 0] - math.exp(-1.0)) < 1e-6
    assert traj.times[0] == 0.0 and traj.times[-1] == 1.0


@pytest.mark.parametrize("method", ["nonstiff", "stiff"])
def test_constant_rhs_zero(method):
    prob = OdeProblem(
        rhs=lambda t, y, u: np.zeros_like(y),
        input=constant_signal(0.0),
        initial_state=np.array([3.25, -1.5]),
        t_span=(0.0, 2.0),
    )
    traj = integrate(prob, SolverConfig(method=method))
    assert np.all(traj.states == np.array([3.25, -1.5]))


def test_stiff_uses_far_fewer_steps():
    # classic stiff test: fast relaxation onto a slowly varying manifold
    def rhs(t, y, u):
        return np.array([-1e4 * (y[0] - math.cos(t))])

    prob = OdeProblem(rhs=rhs, input=constant_signal(0.0),
                      initial_state=np.array([0.0]), t_span=(0.0, 1.0))
    cfg = dict(rel_tol=1e-4, abs_tol=1e-7)
    explicit = integrate(prob, SolverConfig(method="nonstiff", **cfg))
    implicit = integrate(prob, SolverConfig(method="stiff", **cfg))
    assert explicit.stats.steps_accepted >= 50 * implicit.stats.steps_accepted


def test_stiff_a_stability_monotone_decay():
    prob = OdeProblem(
        rhs=lambda t, y, u: -1e6 * y,
        input=constant_signal(0.0),
        initial_state=np.array([1.0]),
        t_span=(0.0, 1.0),
    )
    traj = integrate(prob, SolverConfig(method="stiff", max_step=0.1))
    mags = np.abs(traj.states[:, 0])
    assert np.all(np.diff(mags) <= 1e-15)


@pytest.mark.parametrize("method,min_slope", [("nonstiff", 0.7), ("stiff", 0.5)])
def test_error_vs_tolerance_slope(method, min_slope):
    # endpoint error should fall roughly in proportion to rel_tol
    rtols = np.array([1e-4, 1e-5, 1e-6, 1e-7, 1e-8])
    errs = []
    for rt in rtols:
        traj = integrate(decay_problem(), SolverConfig(rel_tol=rt, abs_tol=1e-14, method=method))
        errs.append(abs(traj.states[-1, 0] - math.exp(-1.0)) + 1e-16)
    slope = np.polyfit(np.log(rtols), np.log(errs), 1)[0]
    assert min_slope <= slope <= 1.3


def test_halving_tolerance_never_hurts():
    rt = 1e-5
    prev = None
    while rt > 1e-9:
        traj = integrate(decay_problem(), SolverConfig(rel_tol=rt, abs_tol=1e-14))
        err = abs(traj.states[-1, 0] - math.exp(-1.0))
        if prev is not None:
            assert err <= prev * (1.0 + 1e-12)
        prev = err
        rt /= 2.0


@pytest.mark.parametrize("method", ["nonstiff", "stiff"])
def test_determinism(method):
    cfg = SolverConfig(method=method)
    a = integrate(decay_problem(), cfg)
    b = integrate(decay_problem(), cfg)
    assert np.array_equal(a.times, b.times)
    assert np.array_equal(a.states, b.states)


@pytest.mark.parametrize("method", ["nonstiff", "stiff"])
def test_stats_populated(method):
    traj = integrate(decay_problem(), SolverConfig(method=method))
    assert traj.stats.rhs_evaluations > 0
    assert traj.stats.wall_clock > 0.0
    assert traj.stats.steps_accepted == len(traj.times) - 1
    if method == "stiff":
        assert traj.stats.jacobian_evaluations > 0


def test_breakpoint_restart_lands_node_exactly():
    # rhs switches sign at t=1; the switch must coincide with a node
    def rhs(t, y, u):
        return np.array([u[0]])

    def step_input(t):
        return np.array([1.0 if t < 1.0 else -1.0])

    prob = OdeProblem(
        rhs=rhs,
        input=InputSignal(evaluator=step_input, breakpoints=(1.0,)),
        initial_state=np.array([0.0]),
        t_span=(0.0, 2.0),
        discontinuity_times=(1.0,),
    )
    traj = integrate(prob, SolverConfig(rel_tol=1e-9, abs_tol=1e-12))
    assert 1.0 in traj.times
    # triangular solution: peak 1 at t=1, back to 0 at t=2
    assert abs(dense_output(traj, 1.0)[0] - 1.0) < 1e-9
    assert abs(traj.states[-1, 0]) < 1e-9


def test_blowup_reported():
    def rhs(t, y, u):
        return np.array([y[0] ** 2])  # finite-time escape from y0=1 at t=1

    prob = OdeProblem(rhs=rhs, input=constant_signal(0.0),
                      initial_state=np.array([1.0]), t_span=(0.0, 2.0))
    with pytest.raises((NumericalBlowup, StiffnessOrSingularity)):
        integrate(prob, SolverConfig())


def test_dense_output_node_and_midpoint():
    traj = integrate(decay_problem(), SolverConfig(rel_tol=1e-8, abs_tol=1e-12))
    k = len(traj.times) // 2
    assert np.array_equal(dense_output(traj, float(traj.times[k])), traj.states[k])
    assert abs(dense_output(traj, 0.5)[0] - math.exp(-0.5)) < 1e-6


def test_dense_output_linear_exact():
    prob = OdeProblem(
        rhs=lambda t, y, u: np.array([1.0]),
        input=constant_signal(0.0),
        initial_state=np.array([0.0]),
        t_span=(0.0, 1.0),
    )
    for method in ("nonstiff", "stiff"):
        traj = integrate(prob, SolverConfig(method=method))
        for tq in (0.137, 0.5, 0.961):
            assert abs(dense_output(traj, tq)[0] - tq) < 1e-12


def test_dense_output_out_of_range():
    traj = integrate(decay_problem(), SolverConfig())
    with pytest.raises(ValueError):
        dense_output(traj, 1.5)


def test_resample_shape():
    traj = integrate(decay_problem(), SolverConfig())
    grid = np.linspace(0.0, 1.0, 11)
    vals = resample(traj, grid)
    assert vals.shape == (11, 1)
    assert np.allclose(vals[:, 0], np.exp(-grid), atol=1e-4)


def test_numerical_jacobian_linear_maps():
    A = np.array([[0.3, -1.2], [2.0, 0.7]])
    jac = numerical_jacobian(lambda t, x, u: A @ x, 0.0, np.array([0.4, -0.2]), np.zeros(1))
    assert np.allclose(jac, A, atol=1e-6)

    rot = numerical_jacobian(
        lambda t, x, u: np.array([x[1], -x[0]]), 0.0, np.array([5.0, 2.0]), np.zeros(1)
    )
    assert np.allclose(rot, [[0.0, 1.0], [-1.0, 0.0]], atol=1e-6)


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(rel_tol=-1.0)
    with pytest.raises(ValueError):
        SolverConfig(method="rk4")
    with pytest.raises(ValueError):
        OdeProblem(rhs=lambda t, y, u: y, input=constant_signal(0.0),
                   initial_state=np.array([1.0]), t_span=(1.0, 0.0))
