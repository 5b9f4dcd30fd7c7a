"""Adaptive embedded Runge-Kutta 5(4) pair (Dormand-Prince) with PI step control.

The non-stiff workhorse. First-same-as-last, so each accepted step costs six
fresh rhs evaluations; the dense output is the standard 4th-order continuous
extension.
"""

from __future__ import annotations

import numpy as np

from .common import (
    NumericalBlowup,
    SolverConfig,
    SolverStats,
    StiffnessOrSingularity,
    error_scale,
    scaled_rms,
)

# Dormand-Prince coefficients
C2, C3, C4, C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63 = 9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0
A64, A65 = 49.0 / 176.0, -5103.0 / 18656.0
A71, A73, A74 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0
A75, A76 = -2187.0 / 6784.0, 11.0 / 84.0
# error coefficients (5th-order weights minus embedded 4th-order weights)
E1, E3, E4 = 71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0
E5, E6, E7 = -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0
# dense-output coefficients
D1 = -12715105075.0 / 11282082432.0
D3 = 87487479700.0 / 32700410799.0
D4 = -10690763975.0 / 1880347072.0
D5 = 701980252875.0 / 199316789632.0
D6 = -1453857185.0 / 822651844.0
D7 = 69997945.0 / 29380423.0

SAFE = 0.9
BETA = 0.04  # PI stabilization
EXPO = 0.2 - BETA * 0.75
FAC_MIN, FAC_MAX = 0.2, 5.0


def _hinit(f, t0, t1, y0, f0, cfg: SolverConfig, stats: SolverStats) -> float:
    """Starting step from the classic two-sample curvature estimate."""
    sc = cfg.abs_tol + cfg.rel_tol * np.abs(y0)
    d0 = scaled_rms(y0, sc)
    d1 = scaled_rms(f0, sc)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, t1 - t0, cfg.max_step)
    f1 = f(t0 + h0, y0 + h0 * f0)
    stats.rhs_evaluations += 1
    d2 = scaled_rms(f1 - f0, sc) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100.0 * h0, h1, t1 - t0, cfg.max_step)


def solve_segment(rhs, u_eval, t0, t1, y0, cfg: SolverConfig, stats: SolverStats, collect):
    """Integrate one smooth segment [t0, t1]; returns y(t1).

    collect(t, y, dense_record) is called on every accepted step.
    """

    def f(t, y):
        stats.rhs_evaluations += 1
        return np.asarray(rhs(t, y, u_eval(t)), dtype=float)

    t = t0
    y = y0
    k1 = f(t, y)
    if not np.all(np.isfinite(k1)):
        raise NumericalBlowup(f"non-finite rhs at t={t}", t)

    h = cfg.initial_step if cfg.initial_step > 0.0 else _hinit(f, t0, t1, y, k1, cfg, stats)
    h = min(h, cfg.max_step, t1 - t0)
    fac_old = 1e-4

    while t < t1:
        if h < 100.0 * np.finfo(float).eps * max(abs(t), abs(t1)):
            raise StiffnessOrSingularity(
                f"step size underflow at t={t} (h={h:.3e}); problem appears stiff or singular", t
            )
        h = min(h, t1 - t)

        k2 = f(t + C2 * h, y + h * (A21 * k1))
        k3 = f(t + C3 * h, y + h * (A31 * k1 + A32 * k2))
        k4 = f(t + C4 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3))
        k5 = f(t + C5 * h, y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4))
        k6 = f(t + h, y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5))
        y_new = y + h * (A71 * k1 + A73 * k3 + A74 * k4 + A75 * k5 + A76 * k6)
        k7 = f(t + h, y_new)

        if not (np.all(np.isfinite(y_new)) and np.all(np.isfinite(k7))):
            raise NumericalBlowup(f"non-finite state or rhs at t={t + h}", t + h)

        err_vec = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
        err = scaled_rms(err_vec, error_scale(y, y_new, cfg))

        fac11 = err**EXPO if err > 0.0 else 1e-10
        if err <= 1.0:
            # accept; build the continuous extension for this step
            ydiff = y_new - y
            bspl = h * k1 - ydiff
            rcont = (
                y.copy(),
                ydiff,
                bspl,
                ydiff - h * k7 - bspl,
                h * (D1 * k1 + D3 * k3 + D4 * k4 + D5 * k5 + D6 * k6 + D7 * k7),
            )
            t_new = t1 if (t1 - (t + h)) < 1e-12 * max(1.0, abs(t1)) else t + h
            collect(t_new, y_new, (t, h, "rk45", rcont))
            fac = fac11 / fac_old**BETA
            fac = max(1.0 / FAC_MAX, min(1.0 / FAC_MIN, fac / SAFE))
            h = min(h / fac, cfg.max_step)
            fac_old = max(err, 1e-4)
            t, y, k1 = t_new, y_new, k7
        else:
            stats.steps_rejected += 1
            h = h / min(1.0 / FAC_MIN, fac11 / SAFE)
    return y
