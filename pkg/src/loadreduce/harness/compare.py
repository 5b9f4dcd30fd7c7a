"""Run full and reduced variants of a scenario and compare them.

The comparison contract: both variants are integrated on identical inputs
and identical tolerances, resampled onto the same uniform output grid
through the solvers' dense output, and scored by mean squared error on the
terminal powers (and every state the two variants share).  Timing covers
the integration loop only -- model evaluation plus solver overhead -- so
reconstruction and exports never flatter the speedup.
"""

import math
import statistics
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..blocks import evaluate_input
from ..odesolve import OdeError, OdeProblem, SolverConfig, Trajectory, dense_output, integrate, resample
from ..timescale import build_boundary_layer
from .scenarios import PreparedScenario, ScenarioConfig, prepare_scenario, sag_voltage

# Fast-time horizon cap for boundary-layer integrations.  Past tau = 80 the
# deviations the current reconstruction reads have decayed below double
# precision, so longer windows are evaluated as zero (the inert
# PI-integrator offset is carried across events separately).
TAU_CAP = 80.0

# Deviations smaller than this start no boundary-layer run at all: the gap
# is equilibrium-polish or integrator tail noise (the layer solver resolves
# nothing below its absolute tolerance), not a layer worth correcting for.
Y0_SKIP = 1e-10

_BL_SOLVER = SolverConfig(rel_tol=1e-8, abs_tol=1e-12)


# ---------------------------------------------------------------------------
# results
# ---------------------------------------------------------------------------

@dataclass
class SimulationResult:
    """One variant of one scenario, resampled onto the output grid."""

    model: str
    variant: str              # "full" or "reduced"
    state_names: tuple
    times: np.ndarray         # uniform output grid [s]
    states: np.ndarray        # (len(times), dim), dense-output resampled
    outputs: dict             # column name -> array; P and Q always present
    stats: object             # SolverStats from the integration
    qss_residual_max: float = 0.0  # reduced runs: max ||g(x, h, u, 0)||_inf
    config: Optional[ScenarioConfig] = None


@dataclass
class ComparisonReport:
    """Accuracy and cost of the reduced variant against the full one.

    When the scenario's variant is "full" or "reduced" the same variant is
    run twice and compared to itself (a determinism check); the timing
    fields then refer to the first and second run.
    """

    config: ScenarioConfig
    mse_P: float
    mse_Q: float
    state_mse: dict           # shared state name -> mean squared error
    timing_full: float        # [s] integration wall clock
    timing_reduced: float     # [s]
    speedup: float            # timing_full / timing_reduced
    stats_full: object
    stats_reduced: object
    qss_residual_max: float   # worst QSS defect over the reduced run's steps
    full: SimulationResult = field(repr=False, default=None)
    reduced: SimulationResult = field(repr=False, default=None)


@dataclass
class BenchResult:
    """Median timings over repeated comparisons of one scenario."""

    config: ScenarioConfig
    repeats: int
    timing_full: float        # [s] median over repeats
    timing_reduced: float     # [s] median
    speedup: float            # median of per-repeat speedups
    runs: list                # (timing_full, timing_reduced, speedup) triples
    report: ComparisonReport  # accuracy numbers from the first repeat


# ---------------------------------------------------------------------------
# grid and runs
# ---------------------------------------------------------------------------

def output_grid(cfg: ScenarioConfig) -> np.ndarray:
    """Uniform sampling grid over the scenario window, including t0."""
    t0, t1 = cfg.t_span
    n = int(math.floor((t1 - t0) / cfg.output_grid_step + 1e-9))
    grid = t0 + cfg.output_grid_step * np.arange(n + 1)
    if grid[-1] > t1:
        grid[-1] = t1
    return grid


def _annotate(err: OdeError, variant: str, cfg: ScenarioConfig) -> OdeError:
    t = getattr(err, "t", math.nan)
    return type(err)(f"{variant} variant of '{cfg.model}' ({cfg.solver}): {err}", t)


def _run_variant(prep: PreparedScenario, variant: str) -> SimulationResult:
    cfg = prep.cfg
    solver_cfg = SolverConfig(rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol,
                              max_step=cfg.max_step, method=cfg.solver)
    if variant == "full":
        rhs, on_accept = prep.full_run_factory()
        problem = OdeProblem(rhs, prep.input_signal, prep.full_x0, cfg.t_span,
                             discontinuity_times=prep.breakpoints,
                             on_accept=on_accept)
    else:
        problem = OdeProblem(prep.reduced_rhs, prep.input_signal, prep.reduced_x0,
                             cfg.t_span, discontinuity_times=prep.breakpoints)

    try:
        traj = integrate(problem, solver_cfg)
    except OdeError as err:
        raise _annotate(err, variant, cfg) from err

    grid = output_grid(cfg)
    states = resample(traj, grid)
    v = np.array([sag_voltage(t, cfg.sag) for t in grid])

    if variant == "full":
        outputs = prep.outputs_full(states, v)
        names = prep.full_state_names
        residual_max = 0.0
    else:
        y = _boundary_corrections(prep, traj, grid) if prep.boundary_layer else None
        outputs = prep.outputs_reduced(states, v, y)
        names = prep.reduced_state_names
        residual_max = _max_qss_residual(prep, traj)

    return SimulationResult(model=prep.model, variant=variant, state_names=names,
                            times=grid, states=states, outputs=outputs,
                            stats=traj.stats, qss_residual_max=residual_max,
                            config=cfg)


def _max_qss_residual(prep: PreparedScenario, traj: Trajectory) -> float:
    """Worst ||g(x, h(x,u), u, 0)||_inf over the run's accepted steps."""
    sys = prep.system()
    worst = 0.0
    for t, x in zip(traj.times, traj.states):
        u = evaluate_input(prep.input_signal, float(t))
        z = prep.qss(x, u)
        defect = np.abs(sys.residual(x, u, z)).max()
        if defect > worst:
            worst = float(defect)
    return worst


def _left_input(prep: PreparedScenario, t: float) -> np.ndarray:
    """Input just before t (left limit at a jump)."""
    return evaluate_input(prep.input_signal, t - 1e-9 * max(1.0, abs(t)))


def _boundary_corrections(prep: PreparedScenario, traj: Trajectory,
                          grid: np.ndarray) -> np.ndarray:
    """Boundary-layer deviation of the fast block on the output grid.

    A fresh layer launches at the window start and at every input jump: its
    initial value is the gap between the fast state carried in from the left
    and the new quasi-steady-state sheet.  Between events the deviation rides
    in stretched time on frozen slow state and input; whatever survives at
    the next event seeds the carry-over.
    """
    cfg = prep.cfg
    eps = prep.epsilon
    t0, t1 = cfg.t_span
    events = [t0] + [b for b in prep.breakpoints if t0 < b < t1]

    # the reduced run starts from the full model's fast block
    z_carry = prep.full_x0[list(prep.fast_indices)]

    y = np.zeros((len(grid), len(prep.fast_indices)))
    for k, t_k in enumerate(events):
        t_next = events[k + 1] if k + 1 < len(events) else t1
        x_k = dense_output(traj, t_k)
        u_plus = evaluate_input(prep.input_signal, t_k)
        h_k = prep.qss(x_k, u_plus)
        y0 = z_carry - h_k

        layer = None
        tau_window = (t_next - t_k) / eps
        if np.abs(y0).max() > Y0_SKIP:
            problem = build_boundary_layer(prep.system(), x_k, u_plus, y0=y0,
                                           tau_span=(0.0, min(tau_window, TAU_CAP)))
            try:
                layer = integrate(problem, _BL_SOLVER)
            except OdeError as err:
                raise _annotate(err, "boundary layer", cfg) from err

        if k + 1 < len(events):
            sel = (grid >= t_k) & (grid < t_next)
        else:
            sel = grid >= t_k
        if layer is not None:
            tau_max = layer.times[-1]
            for i in np.nonzero(sel)[0]:
                tau = (grid[i] - t_k) / eps
                if tau <= tau_max:
                    y[i] = dense_output(layer, tau)

        if k + 1 < len(events):
            x_next = dense_output(traj, t_next)
            u_minus = _left_input(prep, t_next)
            if layer is not None:
                y_end = dense_output(layer, min(tau_window, layer.times[-1]))
            else:
                y_end = np.zeros(len(prep.fast_indices))
            z_carry = prep.qss(x_next, u_minus) + y_end
    return y


# ---------------------------------------------------------------------------
# public entry points
# ---------------------------------------------------------------------------

def simulate_scenario(cfg: ScenarioConfig) -> SimulationResult:
    """Integrate one variant of the scenario and resample it onto the grid."""
    if cfg.variant == "both":
        raise ValueError("simulate runs a single variant; pick 'full' or 'reduced'")
    prep = prepare_scenario(cfg)
    return _run_variant(prep, cfg.variant)


def run_comparison(cfg: ScenarioConfig) -> ComparisonReport:
    """Integrate full and reduced variants on identical inputs and score them.

    variant "both" (the default) compares full against reduced; "full" or
    "reduced" compares that variant against a second identical run, which
    must agree to machine precision (the determinism check).
    """
    prep = prepare_scenario(cfg)
    if cfg.variant == "both":
        first, second = "full", "reduced"
    else:
        first = second = cfg.variant
    res_full = _run_variant(prep, first)
    res_red = _run_variant(prep, second)

    mse_p = float(np.mean((res_full.outputs["P"] - res_red.outputs["P"]) ** 2))
    mse_q = float(np.mean((res_full.outputs["Q"] - res_red.outputs["Q"]) ** 2))

    state_mse = {}
    for j, name in enumerate(res_red.state_names):
        if name in res_full.state_names:
            i = res_full.state_names.index(name)
            diff = res_full.states[:, i] - res_red.states[:, j]
            state_mse[name] = float(np.mean(diff ** 2))

    timing_full = res_full.stats.wall_clock
    timing_reduced = res_red.stats.wall_clock
    speedup = timing_full / timing_reduced if timing_reduced > 0.0 else math.inf

    return ComparisonReport(
        config=cfg,
        mse_P=mse_p,
        mse_Q=mse_q,
        state_mse=state_mse,
        timing_full=timing_full,
        timing_reduced=timing_reduced,
        speedup=speedup,
        stats_full=res_full.stats,
        stats_reduced=res_red.stats,
        qss_residual_max=max(res_full.qss_residual_max, res_red.qss_residual_max),
        full=res_full,
        reduced=res_red,
    )


def bench_scenario(cfg: ScenarioConfig, repeats: int = 5) -> BenchResult:
    """run_comparison repeated (sequentially) with median timings.

    The accuracy numbers are identical across repeats -- the runs are
    deterministic -- so only the first report is kept.
    """
    if repeats < 1:
        raise ValueError("bench needs at least one repeat")
    reports = [run_comparison(cfg) for _ in range(repeats)]
    return BenchResult(
        config=cfg,
        repeats=repeats,
        timing_full=statistics.median(r.timing_full for r in reports),
        timing_reduced=statistics.median(r.timing_reduced for r in reports),
        speedup=statistics.median(r.speedup for r in reports),
        runs=[(r.timing_full, r.timing_reduced, r.speedup) for r in reports],
        report=reports[0],
    )
