"""Three-phase induction motor load: full 5th-order model and reduced 3rd-order model.

State layout (full):    [Eq_p, Ed_p, Eq_pp, Ed_pp, s]
State layout (reduced): [Eq_p, Ed_p, s]
Inputs:                 [Vq, Vd] terminal voltage components (pu)

The transient EMFs (Eq_p, Ed_p) and the slip s are slow; the subtransient
EMFs (Eq_pp, Ed_pp) relax on the Tpp0 time scale and are the fast pair that
the reduced model replaces with their quasi-steady-state values h1, h2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from . import _kernels
from .odesolve import NumericalBlowup
from .timescale import AccuracyBounds, TwoTimeScaleSystem


class InitializationFailure(RuntimeError):
    """Steady-state solve did not converge."""


@dataclass(frozen=True)
class MotorParams:
    rs: float      # stator resistance (pu)
    Ls: float      # synchronous reactance (pu)
    Lp: float      # transient reactance (pu)
    Lpp: float     # subtransient reactance (pu)
    Tp0: float     # transient open-circuit time constant (s)
    Tpp0: float    # subtransient open-circuit time constant (s)
    H: float       # inertia constant (s)
    A: float       # torque curve: quadratic coefficient
    B: float       # torque curve: linear coefficient
    C0: float      # torque curve: constant coefficient
    D: float       # torque curve: power-law coefficient
    Etrq: float    # torque curve: power-law exponent
    p: float       # torque sign on the d-axis product
    q: float       # torque sign on the q-axis product
    omega0: float = 120.0 * math.pi  # synchronous speed (rad/s)

    def __post_init__(self):
        if not (self.Ls > self.Lp > self.Lpp > 0.0):
            raise ValueError("need Ls > Lp > Lpp > 0")
        if not (self.Tp0 > self.Tpp0 > 0.0):
            raise ValueError("need Tp0 > Tpp0 > 0")
        if self.H <= 0.0 or self.rs <= 0.0:
            raise ValueError("H and rs must be positive")


# motor variants A/B/C: small residential, commercial w/ high inertia, commercial
MOTOR_A = MotorParams(rs=0.04, Ls=1.8, Lp=0.1, Lpp=0.083, Tp0=0.092, Tpp0=0.002,
                      H=0.05, A=0.0, B=0.0, C0=0.0, D=1.0, Etrq=0.0, p=-1.0, q=-1.0)
MOTOR_B = MotorParams(rs=0.03, Ls=1.8, Lp=0.16, Lpp=0.12, Tp0=0.1, Tpp0=0.0026,
                      H=1.0, A=0.0, B=0.0, C0=0.0, D=1.0, Etrq=2.0, p=-1.0, q=-1.0)
MOTOR_C = replace(MOTOR_B, H=0.1)

MOTOR_VARIANTS = {"a": MOTOR_A, "b": MOTOR_B, "c": MOTOR_C}


@dataclass(frozen=True)
class MotorOutputs:
    id: float   # d-axis stator current (pu)
    iq: float   # q-axis stator current (pu)
    P: float    # active power drawn (pu)
    Q: float    # reactive power drawn (pu)
    TL: float   # mechanical load torque (pu)
    Tm0: float  # load torque base frozen at initialization (pu)


def torque_curve(w: float, prm: MotorParams) -> float:
    """Normalized load torque vs rotor speed w = 1 - s."""
    return prm.A * w * w + prm.B * w + prm.C0 + prm.D * w ** prm.Etrq


def full_currents(eq_pp, ed_pp, vq, vd, prm: MotorParams):
    """Stator currents behind the subtransient reactance."""
    den = prm.rs * prm.rs + prm.Lpp * prm.Lpp
    i_d = (prm.rs * (vd + ed_pp) + prm.Lpp * (vq + eq_pp)) / den
    i_q = (prm.rs * (vq + eq_pp) - prm.Lpp * (vd + ed_pp)) / den
    return i_d, i_q


def reduced_currents(x1, x2, vq, vd, prm: MotorParams):
    """Stator currents behind the transient reactance (fast EMFs eliminated)."""
    den = prm.rs * prm.rs + prm.Lp * prm.Lp
    i_d = (prm.Lp * (vq + x1) + prm.rs * (vd + x2)) / den
    i_q = (prm.rs * (vq + x1) - prm.Lp * (vd + x2)) / den
    return i_d, i_q


@lru_cache(maxsize=128)
def _kvec(prm: MotorParams, tm0: float) -> np.ndarray:
    """Parameters packed for the kernels (layout documented in pykernels)."""
    return np.array([prm.rs, prm.Ls, prm.Lp, prm.Lpp, prm.Tp0, prm.Tpp0, prm.H,
                     prm.A, prm.B, prm.C0, prm.D, prm.Etrq, prm.p, prm.q,
                     prm.omega0, tm0])


def motor_full_rhs(state, u, prm: MotorParams, tm0: float) -> np.ndarray:
    """Time derivative of [Eq_p, Ed_p, Eq_pp, Ed_pp, s]."""
    state = np.asarray(state, dtype=float)
    u = np.asarray(u, dtype=float)
    if state.shape != (5,):
        raise ValueError(f"full motor state must have 5 components, got {state.shape}")
    if not (np.all(np.isfinite(state)) and np.all(np.isfinite(u))):
        raise NumericalBlowup(f"non-finite motor state/input: {state}, {u}", math.nan)
    return _kernels.motor_full(state, u, _kvec(prm, tm0))


def motor_qss_h(x, u, prm: MotorParams) -> np.ndarray:
    """Quasi-steady-state subtransient EMFs (h1, h2) given the slow state."""
    x1, x2 = x[0], x[1]
    u1, u2 = u[0], u[1]
    dl = prm.Lp - prm.Lpp
    den = prm.rs * prm.rs + prm.Lp * prm.Lp
    h1 = ((prm.Lp * prm.Lpp + prm.rs * prm.rs) * x1 - dl * prm.rs * x2
          - dl * prm.Lp * u1 - dl * prm.rs * u2) / den
    h2 = (dl * prm.rs * x1 + (prm.Lp * prm.Lpp + prm.rs * prm.rs) * x2
          + dl * prm.rs * u1 - dl * prm.Lp * u2) / den
    return np.array([h1, h2])


def motor_reduced_rhs(x, u, prm: MotorParams, tm0: float) -> np.ndarray:
    """Time derivative of the reduced slow state [x1, x2, x3] = [Eq_p, Ed_p, s]."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    if x.shape != (3,):
        raise ValueError(f"reduced motor state must have 3 components, got {x.shape}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(u))):
        raise NumericalBlowup(f"non-finite motor state/input: {x}, {u}", math.nan)
    return _kernels.motor_reduced(x, u, _kvec(prm, tm0))


def motor_outputs(state, u, prm: MotorParams, tm0: float = 0.0) -> MotorOutputs:
    """Currents, powers, and load torque; dispatches on full (5) vs reduced (3) state."""
    vq, vd = u[0], u[1]
    if len(state) == 5:
        i_d, i_q = full_currents(state[2], state[3], vq, vd, prm)
        s = state[4]
    else:
        i_d, i_q = reduced_currents(state[0], state[1], vq, vd, prm)
        s = state[2]
    return MotorOutputs(
        id=float(i_d),
        iq=float(i_q),
        P=float(vd * i_d + vq * i_q),
        Q=float(vq * i_d - vd * i_q),
        TL=float(tm0 * torque_curve(1.0 - s, prm)),
        Tm0=float(tm0),
    )


def motor_initialize(u0, prm: MotorParams, s_guess: float = 0.01):
    """Steady state at fixed slip s_guess under the constant voltage u0.

    Newton-solves the four EMF equations, then sets the torque base tm0 so the
    slip equation balances exactly.  Returns (full 5-state equilibrium, tm0).
    """
    vq, vd = float(u0[0]), float(u0[1])
    s0 = float(s_guess)

    def emf_residual(e):
        st = np.array([e[0], e[1], e[2], e[3], s0])
        return motor_full_rhs(st, (vq, vd), prm, 0.0)[:4]

    e = np.zeros(4)
    r = emf_residual(e)
    for _ in range(50):
        if np.max(np.abs(r)) <= 1e-12:
            break
        jac = np.empty((4, 4))
        for j in range(4):
            pert = e.copy()
            step = 1e-7 * max(1.0, abs(e[j]))
            pert[j] += step
            jac[:, j] = (emf_residual(pert) - r) / step
        try:
            e = e - np.linalg.solve(jac, r)
        except np.linalg.LinAlgError as exc:
            raise InitializationFailure(f"singular Jacobian in steady-state solve: {exc}") from exc
        r = emf_residual(e)
    else:
        raise InitializationFailure(f"steady-state solve stalled, residual {np.max(np.abs(r)):.3e}")

    i_d, i_q = full_currents(e[2], e[3], vq, vd, prm)
    torque_e = prm.p * e[3] * i_d + prm.q * e[2] * i_q
    curve = torque_curve(1.0 - s0, prm)
    if curve == 0.0:
        if abs(torque_e) > 1e-12:
            raise InitializationFailure("zero torque curve cannot balance nonzero electrical torque")
        tm0 = 0.0
    else:
        tm0 = torque_e / curve

    state = np.array([e[0], e[1], e[2], e[3], s0])
    resid = motor_full_rhs(state, (vq, vd), prm, tm0)
    if np.max(np.abs(resid)) > 1e-10:
        raise InitializationFailure(f"equilibrium residual {np.max(np.abs(resid)):.3e} too large")
    return state, tm0


# ---------------------------------------------------------------------------
# two-time-scale embedding
# ---------------------------------------------------------------------------

def motor_system(prm: MotorParams, tm0: float, analytic: bool = True) -> TwoTimeScaleSystem:
    """Slow/fast split of the full model with eps = Tpp0.

    Slow x = [Eq_p, Ed_p, s], fast z = [Eq_pp, Ed_pp].  The fast right-hand
    side g is the subtransient rows multiplied by eps, written so that eps
    appears explicitly (eps = Tpp0 recovers the full model exactly and
    eps -> 0 gives the quasi-steady-state relations).
    """

    def f(x, z, u, eps):
        x1, x2, x3 = x
        vq, vd = u[0], u[1]
        i_d, i_q = full_currents(z[0], z[1], vq, vd, prm)
        dls = prm.Ls - prm.Lp
        w_sync = prm.omega0 * x3
        t_load = tm0 * torque_curve(1.0 - x3, prm)
        return np.array([
            (-x1 - i_d * dls) / prm.Tp0 - w_sync * x2,
            (-x2 + i_q * dls) / prm.Tp0 + w_sync * x1,
            -(prm.p * z[1] * i_d + prm.q * z[0] * i_q - t_load) / (2.0 * prm.H),
        ])

    def g(x, z, u, eps):
        x1, x2, x3 = x
        vq, vd = u[0], u[1]
        i_d, i_q = full_currents(z[0], z[1], vq, vd, prm)
        c1e = 1.0 - eps / prm.Tp0
        c2e = (eps * (prm.Ls - prm.Lp) + prm.Tp0 * (prm.Lp - prm.Lpp)) / prm.Tp0
        w_sync = prm.omega0 * x3
        return np.array([
            c1e * x1 - c2e * i_d - z[0] - eps * w_sync * z[1],
            c1e * x2 + c2e * i_q - z[1] + eps * w_sync * z[0],
        ])

    return TwoTimeScaleSystem(
        f=f,
        g=g,
        epsilon=prm.Tpp0,
        dims=(3, 2, 2),
        qss=(lambda x, u: motor_qss_h(x, u, prm)) if analytic else None,
    )


def split_full_state(state):
    """(slow, fast) views of a full state vector."""
    state = np.asarray(state, dtype=float)
    return np.array([state[0], state[1], state[4]]), np.array([state[2], state[3]])


MOTOR_SLOW_INDICES = (0, 1, 4)  # positions of the reduced states in the full vector
MOTOR_FULL_STATE_NAMES = ("Eq_p", "Ed_p", "Eq_pp", "Ed_pp", "s")
MOTOR_REDUCED_STATE_NAMES = ("Eq_p", "Ed_p", "s")

# Accuracy-assessment defaults.  The decay envelope (k1, a) and the settle
# time pin the small-parameter threshold eps** at 0.035 for a 12 ms settle;
# the growth constants come from a quadratic Lyapunov fit of the linearized
# fast dynamics (b3, b5, b6) and from sampling the slow right-hand side over
# sag transients (k0), with mu bounding the input magnitude and ramp rate.
MOTOR_DECAY_RATE = 9.78          # 1/s, effective decay constant of the fast EMFs
MOTOR_SETTLE_TIME = 0.012        # s, required settle time for the QSS-only check
MOTOR_BOUNDS = AccuracyBounds(b3=1.0, b5=0.74, b6=0.17, k0=10.0,
                              a=MOTOR_DECAY_RATE, k1=1.2, mu=1.1)
