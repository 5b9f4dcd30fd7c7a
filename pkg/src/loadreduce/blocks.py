"""Piecewise nonlinear blocks shared by the load models.

Saturation, deadband and the inverter voltage-protection (fraction-online)
curve, plus a thin wrapper around time-dependent input signals that exposes
their discontinuities so the integrators can restart steps there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


# ---------------------------------------------------------------------------
# parameter records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SatLimits:
    lo: float  # pu
    hi: float  # pu

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"saturation limits must satisfy lo <= hi, got [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class DeadbandLimits:
    db_lo: float  # pu, <= 0
    db_hi: float  # pu, >= 0

    def __post_init__(self):
        if not (self.db_lo <= 0.0 <= self.db_hi):
            raise ValueError(f"deadband must bracket zero, got [{self.db_lo}, {self.db_hi}]")


@dataclass(frozen=True)
class VoltageProtectionParams:
    """Fraction-online curve break-points, persistence timers and recovery fraction."""

    v_l0: float  # pu, full cut-out below this
    v_l1: float  # pu, low edge of the normal band
    v_h1: float  # pu, high edge of the normal band
    v_h0: float  # pu, full cut-out above this
    t_vl0: float = 0.0  # s, persistence required below v_l0 before latching
    t_vl1: float = 0.0  # s
    t_vh1: float = 0.0  # s
    t_vh0: float = 0.0  # s
    v_rfrac: float = 1.0  # fraction of tripped devices that reconnects on recovery

    def __post_init__(self):
        if not (self.v_l0 < self.v_l1 < self.v_h1 < self.v_h0):
            raise ValueError("voltage break-points must satisfy v_l0 < v_l1 < v_h1 < v_h0")
        for name in ("t_vl0", "t_vl1", "t_vh1", "t_vh0"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be >= 0")
        if not (0.0 <= self.v_rfrac <= 1.0):
            raise ValueError("v_rfrac must lie in [0, 1]")


@dataclass(frozen=True)
class VpMemory:
    """Latching state threaded through voltage_protection calls.

    ``min_latched`` is the lowest fraction that has persisted long enough to
    latch; the ``*_since`` fields remember when the voltage last entered each
    out-of-band region (None = not currently in it).
    """

    min_latched: float = 1.0
    below_l1_since: Optional[float] = None
    below_l0_since: Optional[float] = None
    above_h1_since: Optional[float] = None
    above_h0_since: Optional[float] = None


VP_FRESH = VpMemory()


@dataclass(frozen=True)
class InputSignal:
    """Deterministic input u(t): an evaluator plus its known breakpoints.

    evaluator            t (s) -> input vector (pu)
    derivative_evaluator optional t -> du/dt, used by accuracy bounds
    breakpoints          times where u jumps or kinks (integrator restarts)
    t_start, t_end       horizon on which the evaluator is defined
    """

    evaluator: Callable[[float], np.ndarray]
    derivative_evaluator: Optional[Callable[[float], np.ndarray]] = None
    breakpoints: tuple = ()
    t_start: float = 0.0
    t_end: float = math.inf


# ---------------------------------------------------------------------------
# blocks
# ---------------------------------------------------------------------------

def saturate(x: float, lim: SatLimits) -> float:
    """Clamp x into [lim.lo, lim.hi]."""
    if x < lim.lo:
        return lim.lo
    if x > lim.hi:
        return lim.hi
    return x


def deadband(x: float, db: DeadbandLimits) -> float:
    """Deadzone with the offset convention: output picks up where the band ends.

    Zero inside [db_lo, db_hi]; x - db_hi above; x - db_lo below.  Continuous
    at both edges (unlike the gap convention).
    """
    if x > db.db_hi:
        return x - db.db_hi
    if x < db.db_lo:
        return x - db.db_lo
    return 0.0


def vp_curve(v: float, vp: VoltageProtectionParams) -> float:
    """Stateless fraction-online curve: 1 in the normal band, ramps to 0 outside."""
    if v <= vp.v_l0 or v >= vp.v_h0:
        return 0.0
    if v < vp.v_l1:
        return (v - vp.v_l0) / (vp.v_l1 - vp.v_l0)
    if v > vp.v_h1:
        return (vp.v_h0 - v) / (vp.v_h0 - vp.v_h1)
    return 1.0


def vp_recovery_level(memory: VpMemory, vp: VoltageProtectionParams) -> float:
    """Ceiling the multiplier may return to after a latched excursion."""
    if memory.min_latched >= 1.0:
        return 1.0
    return memory.min_latched + vp.v_rfrac * (1.0 - memory.min_latched)


def voltage_protection(
    v: float,
    vp: VoltageProtectionParams,
    memory: VpMemory = VP_FRESH,
    t: float = 0.0,
) -> tuple[float, VpMemory]:
    """Fraction of devices still online at voltage v, with latched tripping.

    The instantaneous value follows vp_curve.  A break-point level that
    persists longer than its timer latches the minimum fraction reached;
    after recovery (v back inside [v_l1, v_h1]) only
    min_latched + v_rfrac*(1 - min_latched) of the fleet returns.

    Returns (multiplier, updated memory); thread the memory through
    successive calls with non-decreasing t.
    """
    m_now = vp_curve(v, vp)

    def _enter(since: Optional[float], inside: bool) -> Optional[float]:
        if not inside:
            return None
        return t if since is None else since

    below_l1 = _enter(memory.below_l1_since, v < vp.v_l1)
    below_l0 = _enter(memory.below_l0_since, v <= vp.v_l0)
    above_h1 = _enter(memory.above_h1_since, v > vp.v_h1)
    above_h0 = _enter(memory.above_h0_since, v >= vp.v_h0)

    latched = memory.min_latched
    # each break-point's timer gates latching for its own segment of the curve
    if below_l0 is not None:
        if t - below_l0 >= vp.t_vl0:
            latched = min(latched, 0.0)
    elif below_l1 is not None:
        if t - below_l1 >= vp.t_vl1:
            latched = min(latched, m_now)
    if above_h0 is not None:
        if t - above_h0 >= vp.t_vh0:
            latched = min(latched, 0.0)
    elif above_h1 is not None:
        if t - above_h1 >= vp.t_vh1:
            latched = min(latched, m_now)

    updated = VpMemory(
        min_latched=latched,
        below_l1_since=below_l1,
        below_l0_since=below_l0,
        above_h1_since=above_h1,
        above_h0_since=above_h0,
    )
    multiplier = min(m_now, vp_recovery_level(updated, vp))
    return multiplier, updated


def evaluate_input(sig: InputSignal, t: float) -> np.ndarray:
    """Evaluate sig at time t; raises outside the signal's horizon."""
    if not (sig.t_start <= t <= sig.t_end):
        raise ValueError(f"t={t} outside input horizon [{sig.t_start}, {sig.t_end}]")
    return np.asarray(sig.evaluator(t), dtype=float)


def constant_signal(*values: float) -> InputSignal:
    """Input fixed at the given vector for all time."""
    vec = np.array(values, dtype=float)
    return InputSignal(
        evaluator=lambda t: vec,
        derivative_evaluator=lambda t: np.zeros_like(vec),
        breakpoints=(),
    )
