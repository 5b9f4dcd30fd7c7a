"""Scenario definitions: the voltage sag, the model registry, and the wiring
that turns a scenario description into integrable problems.

Every experiment in the package runs the same kind of disturbance: the
terminal voltage sags to a retained level for a few cycles, recovers linearly,
and then holds at nominal.  A ScenarioConfig picks the model, the variant,
the solver, the window, and the sag shape; prepare_scenario resolves it into
initial states, right-hand sides, an input signal, and the slow/fast split
metadata the comparison and assessment code consumes.
"""

import dataclasses
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np

from ..blocks import VP_FRESH, InputSignal
from ..dera import (
    DERA_BOUNDS,
    DERA_DEFAULTS,
    DERA_FAST_INDICES,
    DERA_FULL_STATE_NAMES,
    DERA_REDUCED_STATE_NAMES,
    DERA_SETTLE_TIME,
    DERA_SLOW_INDICES,
    advance_protection,
    dera_currents,
    dera_full_rhs,
    dera_initialize,
    dera_qss_h,
    dera_reduced_rhs,
    dera_system,
)
from ..motor import (
    MOTOR_A,
    MOTOR_B,
    MOTOR_BOUNDS,
    MOTOR_C,
    MOTOR_FULL_STATE_NAMES,
    MOTOR_REDUCED_STATE_NAMES,
    MOTOR_SETTLE_TIME,
    MOTOR_SLOW_INDICES,
    full_currents,
    motor_full_rhs,
    motor_initialize,
    motor_qss_h,
    motor_reduced_rhs,
    motor_system,
    reduced_currents,
)
from ..timescale import AccuracyBounds

MODEL_NAMES = ("motor-a", "motor-b", "motor-c", "dera")
VARIANTS = ("full", "reduced", "both")
SOLVERS = ("nonstiff", "stiff")

_MOTOR_PARAMS = {"motor-a": MOTOR_A, "motor-b": MOTOR_B, "motor-c": MOTOR_C}

# Dispatch defaults: initial slip for the motors, terminal dispatch and
# frequency level for the distributed-generation model.
MOTOR_DEFAULT_SLIP = 0.05
DERA_DEFAULT_P0 = 0.5    # active power delivered pre-event [pu]
DERA_DEFAULT_Q0 = 0.05   # reactive power delivered pre-event [pu]
DERA_DEFAULT_FREQ = 1.0  # frequency input level [pu of 60 Hz]


# ---------------------------------------------------------------------------
# voltage sag
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SagParams:
    """Sag-with-linear-recovery disturbance on the terminal voltage.

    The voltage is 1 pu until t = 1 s, drops to `a` for `b` cycles of 60 Hz,
    jumps back up to `d` and ramps linearly to nominal, reaching 1 pu at
    t = 1 + c.  The ramp must outlast the sag (c > b/60).
    """

    a: float = 0.8  # retained voltage during the sag [pu]
    b: float = 5.0  # sag duration [cycles at 60 Hz]
    c: float = 1.0  # time from sag onset to full recovery [s]
    d: float = 0.9  # voltage at the start of the recovery ramp [pu]

    def __post_init__(self):
        if not 0.0 <= self.a <= 1.0:
            raise ValueError(f"retained voltage a={self.a} must lie in [0, 1]")
        if self.b <= 0.0:
            raise ValueError(f"sag duration b={self.b} cycles must be positive")
        if self.c <= self.b / 60.0:
            raise ValueError(
                f"recovery ramp c={self.c} s must outlast the sag ({self.b / 60.0:.4f} s)")
        if not 0.0 <= self.d <= 1.0:
            raise ValueError(f"ramp start voltage d={self.d} must lie in [0, 1]")


def sag_voltage(t: float, sp: SagParams) -> float:
    """Terminal voltage magnitude [pu] at time t under the sag sp."""
    if 1.0 <= t < 1.0 + sp.b / 60.0:
        return sp.a
    if 1.0 + sp.b / 60.0 <= t < 1.0 + sp.c:
        return (1.0 - sp.d) * (sp.c + 1.0 - t) / (sp.b / 60.0 - sp.c) + 1.0
    return 1.0


def sag_breakpoints(sp: SagParams) -> tuple:
    """The two jump times of the sag (onset and ramp start).

    The ramp's end at 1 + c is continuous (only the slope changes), so the
    integrators do not need to restart there.
    """
    return (1.0, 1.0 + sp.b / 60.0)


# ---------------------------------------------------------------------------
# scenario configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScenarioConfig:
    """One comparison or simulation scenario, fully determined (no RNG).

    `overrides` is a flat map of dotted keys: bare paths override fields of
    the model's parameter record ("rs", "Trv", "flags.pf_flag", "vp.v_l0"),
    and "dispatch."-prefixed keys set the operating point ("dispatch.s0" for
    the motors; "dispatch.P0", "dispatch.Q0", "dispatch.freq_pu" for the
    distributed-generation model).  Unknown keys are rejected when the
    scenario is prepared, so typos fail loudly instead of silently running
    the default.
    """

    model: str = "motor-a"
    variant: str = "both"
    solver: str = "nonstiff"
    t_span: tuple = (0.0, 5.0)       # [s]
    output_grid_step: float = 1e-3   # [s] uniform grid for MSEs and exports
    sag: SagParams = field(default_factory=SagParams)
    rel_tol: float = 1e-4
    abs_tol: float = 1e-7
    max_step: float = 0.25           # [s] keeps the reduced runs honest between events
    overrides: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.model not in MODEL_NAMES:
            raise ValueError(f"unknown model '{self.model}' (choose from {MODEL_NAMES})")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant '{self.variant}' (choose from {VARIANTS})")
        if self.solver not in SOLVERS:
            raise ValueError(f"unknown solver '{self.solver}' (choose from {SOLVERS})")
        t0, t1 = float(self.t_span[0]), float(self.t_span[1])
        if not t0 < t1:
            raise ValueError(f"t_span {self.t_span} must be increasing")
        object.__setattr__(self, "t_span", (t0, t1))
        if not 0.0 < self.output_grid_step <= t1 - t0:
            raise ValueError(f"output_grid_step {self.output_grid_step} must be in (0, span]")
        if isinstance(self.sag, (tuple, list)):
            object.__setattr__(self, "sag", SagParams(*self.sag))
        if self.rel_tol <= 0.0 or self.abs_tol <= 0.0 or self.max_step <= 0.0:
            raise ValueError("tolerances and max_step must be positive")
        object.__setattr__(self, "overrides", dict(self.overrides))


_SCALAR_KEYS = ("model", "variant", "solver")
_SAG_KEYS = ("sag.a", "sag.b", "sag.c", "sag.d")
_FLOAT_KEYS = ("t_start", "t_end", "grid", "rel_tol", "abs_tol", "max_step")


def scenario_config_from_mapping(data: Mapping) -> ScenarioConfig:
    """ScenarioConfig from a flat mapping with dotted keys (the config-file
    grammar): scenario keys by name ("model", "solver", "t_end", "grid",
    "sag.a", "rel_tol", ...), everything else treated as a parameter or
    dispatch override and validated against the model when the scenario is
    prepared."""
    kwargs = {}
    overrides = {}
    sag_fields = {}
    t_start, t_end = 0.0, 5.0
    for key, value in data.items():
        if key in _SCALAR_KEYS:
            kwargs[key] = str(value)
        elif key in _SAG_KEYS:
            sag_fields[key.split(".", 1)[1]] = float(value)
        elif key == "t_start":
            t_start = float(value)
        elif key == "t_end":
            t_end = float(value)
        elif key == "grid":
            kwargs["output_grid_step"] = float(value)
        elif key in ("rel_tol", "abs_tol", "max_step"):
            kwargs[key] = float(value)
        else:
            overrides[key] = value
    kwargs["t_span"] = (t_start, t_end)
    if sag_fields:
        kwargs["sag"] = dataclasses.replace(SagParams(), **sag_fields)
    if overrides:
        kwargs["overrides"] = overrides
    return ScenarioConfig(**kwargs)


# ---------------------------------------------------------------------------
# overrides
# ---------------------------------------------------------------------------

def _replace_field(record, dotted: str, value):
    """dataclasses.replace along a dotted path, coercing ints for flag fields."""
    head, _, rest = dotted.partition(".")
    names = {f.name for f in dataclasses.fields(record)}
    if head not in names:
        raise ValueError(
            f"unknown parameter field '{head}' for {type(record).__name__}")
    current = getattr(record, head)
    if rest:
        if not dataclasses.is_dataclass(current):
            raise ValueError(f"parameter field '{head}' has no sub-fields")
        return dataclasses.replace(record, **{head: _replace_field(current, rest, value)})
    if isinstance(current, int) and not isinstance(current, bool):
        if float(value) != int(float(value)):
            raise ValueError(f"parameter field '{dotted}' takes an integer, got {value}")
        return dataclasses.replace(record, **{head: int(float(value))})
    return dataclasses.replace(record, **{head: float(value)})


def _split_overrides(overrides: Mapping, allowed_dispatch: tuple) -> tuple:
    """(dispatch dict, parameter-override dict) from the flat override map."""
    dispatch, params = {}, {}
    for key, value in overrides.items():
        if key.startswith("dispatch."):
            name = key[len("dispatch."):]
            if name not in allowed_dispatch:
                raise ValueError(
                    f"unknown dispatch key '{key}' (this model takes {allowed_dispatch})")
            dispatch[name] = float(value)
        else:
            params[key] = value
    return dispatch, params


def _apply_param_overrides(record, params: Mapping):
    for key, value in params.items():
        record = _replace_field(record, key, value)
    return record


# ---------------------------------------------------------------------------
# prepared scenarios
# ---------------------------------------------------------------------------

@dataclass
class PreparedScenario:
    """A scenario resolved into everything the runners need."""

    cfg: ScenarioConfig
    model: str
    input_signal: InputSignal
    breakpoints: tuple            # event times handed to the integrators
    epsilon: float                # fast time constant of the slow/fast split
    full_state_names: tuple
    reduced_state_names: tuple
    slow_indices: tuple           # full-state indices of the slow block
    fast_indices: tuple
    full_x0: np.ndarray
    reduced_x0: np.ndarray
    reduced_rhs: Callable         # (t, x, u) -> dx/dt
    full_run_factory: Callable    # () -> (rhs, on_accept or None), fresh memory
    make_system: Callable         # () -> TwoTimeScaleSystem
    qss: Callable                 # (x, u) -> fast block at quasi-steady state
    outputs_full: Callable        # (states, v) -> {"P": ..., "Q": ..., ...}
    outputs_reduced: Callable     # (states, v, y or None) -> same keys
    boundary_layer: bool          # reduced reconstruction adds the layer
    bounds: AccuracyBounds
    settle_time: float            # [s] required settling horizon for assess
    _system: Optional[object] = field(default=None, repr=False)

    def system(self):
        """The slow/fast split, built on first use and cached."""
        if self._system is None:
            self._system = self.make_system()
        return self._system


def _sag_signal(sag: SagParams, second_channel: float) -> InputSignal:
    def evaluator(t, _sag=sag, _lvl=second_channel):
        return np.array([sag_voltage(t, _sag), _lvl])

    return InputSignal(evaluator=evaluator, breakpoints=sag_breakpoints(sag))


def _prepare_motor(cfg: ScenarioConfig) -> PreparedScenario:
    dispatch, params = _split_overrides(cfg.overrides, ("s0",))
    prm = _apply_param_overrides(_MOTOR_PARAMS[cfg.model], params)
    s0 = dispatch.get("s0", MOTOR_DEFAULT_SLIP)

    v0 = sag_voltage(cfg.t_span[0], cfg.sag)
    state0, tm0 = motor_initialize((v0, 0.0), prm, s_guess=s0)
    signal = _sag_signal(cfg.sag, 0.0)  # (vq, vd) with the sag on the q axis

    def reduced_rhs(t, x, u, _prm=prm, _tm0=tm0):
        return motor_reduced_rhs(x, u, _prm, _tm0)

    def full_run_factory(_prm=prm, _tm0=tm0):
        def rhs(t, state, u):
            return motor_full_rhs(state, u, _prm, _tm0)

        return rhs, None

    def outputs_full(states, v, _prm=prm):
        i_d, i_q = full_currents(states[:, 2], states[:, 3], v, 0.0, _prm)
        return {"P": v * i_q, "Q": v * i_d}

    def outputs_reduced(states, v, y, _prm=prm):
        # QSS-only reconstruction: the reduced currents already have the
        # fast EMFs eliminated, and the verdict for these motors says the
        # boundary-layer correction is not needed (y is always None here).
        i_d, i_q = reduced_currents(states[:, 0], states[:, 1], v, 0.0, _prm)
        return {"P": v * i_q, "Q": v * i_d}

    return PreparedScenario(
        cfg=cfg,
        model=cfg.model,
        input_signal=signal,
        breakpoints=sag_breakpoints(cfg.sag),
        epsilon=prm.Tpp0,
        full_state_names=MOTOR_FULL_STATE_NAMES,
        reduced_state_names=MOTOR_REDUCED_STATE_NAMES,
        slow_indices=MOTOR_SLOW_INDICES,
        fast_indices=(2, 3),
        full_x0=state0,
        reduced_x0=state0[list(MOTOR_SLOW_INDICES)],
        reduced_rhs=reduced_rhs,
        full_run_factory=full_run_factory,
        make_system=lambda _prm=prm, _tm0=tm0: motor_system(_prm, _tm0),
        qss=lambda x, u, _prm=prm: motor_qss_h(x, u, _prm),
        outputs_full=outputs_full,
        outputs_reduced=outputs_reduced,
        boundary_layer=False,
        bounds=MOTOR_BOUNDS,
        settle_time=MOTOR_SETTLE_TIME,
    )


def _prepare_dera(cfg: ScenarioConfig) -> PreparedScenario:
    dispatch, params = _split_overrides(cfg.overrides, ("P0", "Q0", "freq_pu"))
    prm = _apply_param_overrides(DERA_DEFAULTS, params)
    p0 = dispatch.get("P0", DERA_DEFAULT_P0)
    q0 = dispatch.get("Q0", DERA_DEFAULT_Q0)
    freq = dispatch.get("freq_pu", DERA_DEFAULT_FREQ)

    v0 = sag_voltage(cfg.t_span[0], cfg.sag)
    state0, prm = dera_initialize((v0, freq), prm, p0, q0)
    signal = _sag_signal(cfg.sag, freq)  # (vt, freq), frequency held flat

    def reduced_rhs(t, x, u, _prm=prm):
        return dera_reduced_rhs(x, u, _prm)

    def full_run_factory(_prm=prm):
        # Each run gets its own protection memory, committed per accepted step.
        mem_box = [VP_FRESH]

        def rhs(t, state, u):
            deriv, _ = dera_full_rhs(state, u, _prm, mem_box[0], t)
            return deriv

        def on_accept(t, state):
            mem_box[0] = advance_protection(mem_box[0], state, _prm, t)

        return rhs, on_accept

    def outputs_full(states, v, _prm=prm):
        iq = states[:, 3]
        i_d = states[:, 9]
        return {"iq": iq.copy(), "id": i_d.copy(), "P": v * i_d, "Q": -v * iq}

    def outputs_reduced(states, v, y, _prm=prm, _freq=freq):
        n = len(v)
        iq = np.empty(n)
        i_d = np.empty(n)
        for i in range(n):
            y_i = None if y is None else y[i]
            iq[i], i_d[i] = dera_currents(states[i], y_i, (v[i], _freq), _prm)
        return {"iq": iq, "id": i_d, "P": v * i_d, "Q": -v * iq}

    return PreparedScenario(
        cfg=cfg,
        model=cfg.model,
        input_signal=signal,
        breakpoints=sag_breakpoints(cfg.sag),
        epsilon=prm.Tiq,
        full_state_names=DERA_FULL_STATE_NAMES,
        reduced_state_names=DERA_REDUCED_STATE_NAMES,
        slow_indices=DERA_SLOW_INDICES,
        fast_indices=DERA_FAST_INDICES,
        full_x0=state0,
        reduced_x0=state0[list(DERA_SLOW_INDICES)],
        reduced_rhs=reduced_rhs,
        full_run_factory=full_run_factory,
        make_system=lambda _prm=prm: dera_system(_prm),
        qss=lambda x, u, _prm=prm: dera_qss_h(x, u, _prm),
        outputs_full=outputs_full,
        outputs_reduced=outputs_reduced,
        boundary_layer=True,
        bounds=DERA_BOUNDS,
        settle_time=DERA_SETTLE_TIME,
    )


def prepare_scenario(cfg: ScenarioConfig) -> PreparedScenario:
    """Resolve a scenario: apply overrides, find the pre-event steady state,
    and wire up the right-hand sides and output reconstructions."""
    if cfg.model in _MOTOR_PARAMS:
        return _prepare_motor(cfg)
    return _prepare_dera(cfg)
