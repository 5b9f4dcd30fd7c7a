"""Shared problem/config/trajectory types for the two integrators.

Both methods produce a Trajectory holding the accepted nodes plus per-step
interpolation data, so comparison runs can resample full and reduced models
onto one grid without re-integrating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..blocks import InputSignal, evaluate_input


class OdeError(RuntimeError):
    """Base class for integration failures."""

    def __init__(self, message: str, t: float):
        super().__init__(message)
        self.t = t


class StiffnessOrSingularity(OdeError):
    """Step size underflowed: problem too stiff for the method, or singular."""


class NumericalBlowup(OdeError):
    """Right-hand side (or state) became non-finite."""


@dataclass
class SolverStats:
    steps_accepted: int = 0
    steps_rejected: int = 0
    rhs_evaluations: int = 0
    jacobian_evaluations: int = 0
    wall_clock: float = 0.0


@dataclass
class OdeProblem:
    """Initial-value problem dx/dt = rhs(t, x, u(t)).

    discontinuity_times lists the input's jump/kink times: the integrators
    land a node exactly on each one and restart there, so no step straddles
    a discontinuity.  on_accept (optional) is called with (t, state) after
    every accepted step -- models with protection memory advance it there.
    """

    rhs: Callable[[float, np.ndarray, np.ndarray], np.ndarray]
    input: InputSignal
    initial_state: np.ndarray
    t_span: tuple
    discontinuity_times: tuple = ()
    on_accept: Optional[Callable[[float, np.ndarray], None]] = None

    def __post_init__(self):
        self.initial_state = np.asarray(self.initial_state, dtype=float)
        t0, tf = self.t_span
        if not t0 < tf:
            raise ValueError(f"t_span must satisfy t0 < tf, got {self.t_span}")


@dataclass
class SolverConfig:
    rel_tol: float = 1e-6
    abs_tol: float = 1e-9
    max_step: float = math.inf
    initial_step: float = 0.0  # 0 -> choose automatically
    method: str = "nonstiff"  # "nonstiff" (embedded RK 5(4)) or "stiff" (TR-BDF2)

    def __post_init__(self):
        if self.rel_tol <= 0.0 or self.abs_tol <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.max_step <= 0.0:
            raise ValueError("max_step must be positive")
        if self.method not in ("nonstiff", "stiff"):
            raise ValueError(f"unknown method {self.method!r}")


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # shape (len(times), dim)
    stats: SolverStats
    # per-step interpolation records: (t_left, h, kind, payload)
    segments: list = field(default_factory=list, repr=False)


def scaled_rms(v: np.ndarray, scale: np.ndarray) -> float:
    """Component-wise scaled RMS norm used for error control."""
    return float(np.sqrt(np.mean((v / scale) ** 2)))


def error_scale(y0: np.ndarray, y1: np.ndarray, cfg: SolverConfig) -> np.ndarray:
    return cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y0), np.abs(y1))


def numerical_jacobian(rhs, t: float, state: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Forward-difference Jacobian of rhs w.r.t. state.

    Per-component step max(1e-8, 1e-8*|component|); column j approximates
    d rhs / d state_j.
    """
    state = np.asarray(state, dtype=float)
    f0 = np.asarray(rhs(t, state, u), dtype=float)
    n = state.size
    jac = np.empty((f0.size, n))
    for j in range(n):
        h = max(1e-8, 1e-8 * abs(state[j]))
        pert = state.copy()
        pert[j] += h
        jac[:, j] = (np.asarray(rhs(t, pert, u), dtype=float) - f0) / h
    if not np.all(np.isfinite(jac)):
        raise NumericalBlowup(f"non-finite Jacobian entries at t={t}", t)
    return jac


# ---------------------------------------------------------------------------
# integration driver
# ---------------------------------------------------------------------------

def _segment_times(problem: OdeProblem) -> list:
    """Split [t0, tf] at the known discontinuities."""
    t0, tf = problem.t_span
    cuts = sorted({float(t) for t in problem.discontinuity_times if t0 < t < tf})
    return [t0] + cuts + [tf]


def integrate(problem: OdeProblem, cfg: SolverConfig) -> Trajectory:
    """Integrate the problem with the configured method.

    Restarts exactly at every discontinuity time.  Raises
    StiffnessOrSingularity on step underflow and NumericalBlowup on
    non-finite values.
    """
    import time as _time

    from . import rk45, trbdf2

    step_segment = rk45.solve_segment if cfg.method == "nonstiff" else trbdf2.solve_segment

    stats = SolverStats()
    times = [problem.t_span[0]]
    states = [problem.initial_state.copy()]
    segments: list = []

    def collect(t: float, y: np.ndarray, record) -> None:
        times.append(t)
        states.append(y.copy())
        segments.append(record)
        stats.steps_accepted += 1
        if problem.on_accept is not None:
            problem.on_accept(t, y)

    tic = _time.perf_counter()
    y = problem.initial_state.copy()
    if not np.all(np.isfinite(y)):
        raise NumericalBlowup("non-finite initial state", problem.t_span[0])
    cuts = _segment_times(problem)
    for a, b in zip(cuts[:-1], cuts[1:]):
        u_eval = _segment_input(problem.input, a, b)
        y = step_segment(problem.rhs, u_eval, a, b, y, cfg, stats, collect)
    stats.wall_clock = _time.perf_counter() - tic

    return Trajectory(
        times=np.array(times),
        states=np.vstack(states),
        stats=stats,
        segments=segments,
    )


def _segment_input(sig: InputSignal, a: float, b: float):
    """Input evaluator for one smooth segment [a, b].

    At exactly t == b the *left* limit is used, so the final (clipped) step
    of a segment never sees the post-jump input; the next segment starts at
    b with the right limit.
    """
    delta = 1e-10 * max(1.0, abs(b))
    t_left = max(a, b - delta)

    def u_eval(t: float) -> np.ndarray:
        if t >= b:
            t = t_left
        return evaluate_input(sig, t)

    return u_eval


# ---------------------------------------------------------------------------
# dense output
# ---------------------------------------------------------------------------

def dense_output(traj: Trajectory, t_query: float) -> np.ndarray:
    """Interpolated state at t_query using the per-step dense records.

    Exact at stored nodes; raises on queries outside the trajectory range.
    """
    times = traj.times
    if not (times[0] <= t_query <= times[-1]):
        raise ValueError(f"t={t_query} outside trajectory range [{times[0]}, {times[-1]}]")
    idx = int(np.searchsorted(times, t_query, side="right")) - 1
    if idx >= 0 and times[min(idx, len(times) - 1)] == t_query:
        return traj.states[idx].copy()
    idx = min(max(idx, 0), len(traj.segments) - 1)
    t0, h, kind, payload = traj.segments[idx]
    theta = (t_query - t0) / h
    if kind == "rk45":
        r1, r2, r3, r4, r5 = payload
        th1 = 1.0 - theta
        return r1 + theta * (r2 + th1 * (r3 + theta * (r4 + th1 * r5)))
    # cubic Hermite on (y0, f0) -- (y1, f1)
    y0, y1, f0, f1 = payload
    h00 = (1 + 2 * theta) * (1 - theta) ** 2
    h10 = theta * (1 - theta) ** 2
    h01 = theta**2 * (3 - 2 * theta)
    h11 = theta**2 * (theta - 1)
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


def resample(traj: Trajectory, grid: np.ndarray) -> np.ndarray:
    """dense_output evaluated on a whole grid, stacked row-wise."""
    return np.vstack([dense_output(traj, float(t)) for t in grid])
