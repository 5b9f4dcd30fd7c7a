"""One-step implicit TR-BDF2 integrator (trapezoid to an interior point, then
BDF2 to the step end) with an embedded third-order error estimate.

L-stable, so decaying fast modes stay decayed at large steps -- the stiff
counterpart to the explicit pair.  Both implicit stages share the iteration
matrix I - d*h*J, and the Jacobian is reused across steps until Newton
convergence degrades.
"""

from __future__ import annotations

import math

import numpy as np

from .common import (
    NumericalBlowup,
    SolverConfig,
    SolverStats,
    StiffnessOrSingularity,
    error_scale,
    numerical_jacobian,
    scaled_rms,
)

GAMMA = 2.0 - math.sqrt(2.0)
D = GAMMA / 2.0  # implicit weight of both stages
W = math.sqrt(2.0) / 4.0
# y1 = p1*y_gamma - p0*y0 + d*h*f1  (BDF2 stage)
P1 = 1.0 / (GAMMA * (2.0 - GAMMA))
P0 = (1.0 - GAMMA) ** 2 / (GAMMA * (2.0 - GAMMA))
# (b - bhat): difference to the embedded 3rd-order weights
ERR0 = (4.0 * W - 1.0) / 3.0
ERR_G = -1.0 / 3.0
ERR1 = 2.0 * D / 3.0

MAX_NEWTON = 10
NEWTON_TOL = 0.03  # in the error-scaled norm (1.0 == the step tolerance)
SAFE_FAC = 0.9


def solve_segment(rhs, u_eval, t0, t1, y0, cfg: SolverConfig, stats: SolverStats, collect):
    """Integrate one smooth segment [t0, t1]; returns y(t1)."""

    def f(t, y):
        stats.rhs_evaluations += 1
        out = np.asarray(rhs(t, y, u_eval(t)), dtype=float)
        if not np.all(np.isfinite(out)):
            raise NumericalBlowup(f"non-finite rhs at t={t}", t)
        return out

    n = y0.size
    eye = np.eye(n)
    t = t0
    y = y0
    f0 = f(t, y)

    if cfg.initial_step > 0.0:
        h = cfg.initial_step
    else:
        # conservative start; the controller grows it quickly.  The d0/d1
        # ratio keeps the guess tolerance-independent (both norms carry the
        # same error scale).
        sc = cfg.abs_tol + cfg.rel_tol * np.abs(y)
        d0 = scaled_rms(y, sc)
        d1 = scaled_rms(f0, sc)
        if d0 >= 1e-5 and d1 >= 1e-5:
            h = min(0.01 * d0 / d1, (t1 - t0) / 10.0)
        else:
            h = (t1 - t0) / 1000.0
    h = min(h, cfg.max_step, t1 - t0)

    jac = None
    jac_fresh = False
    m_lu = None  # iteration matrix for the current (h, jac)

    def rebuild(hh):
        nonlocal m_lu
        m_lu = eye - (D * hh) * jac

    def newton(t_stage, rhs_const, coeff_h, guess, sc):
        """Solve  y = rhs_const + coeff_h*f(t_stage, y)  by damped Newton.

        Returns (solution, f_at_solution, converged).
        """
        yk = guess
        dn_prev = None
        for _ in range(MAX_NEWTON):
            fk = f(t_stage, yk)
            res = yk - rhs_const - coeff_h * fk
            try:
                delta = np.linalg.solve(m_lu, res)
            except np.linalg.LinAlgError:
                return yk, fk, False
            yk = yk - delta
            dn = scaled_rms(delta, sc)
            if not np.isfinite(dn):
                return yk, fk, False
            if dn < NEWTON_TOL:
                return yk, f(t_stage, yk), True
            if dn_prev is not None and dn > 0.9 * dn_prev:
                return yk, fk, False  # stalled -- refresh Jacobian or cut h
            dn_prev = dn
        return yk, fk, False

    while t < t1:
        if h < 100.0 * np.finfo(float).eps * max(abs(t), abs(t1)):
            raise StiffnessOrSingularity(
                f"step size underflow at t={t} (h={h:.3e}); Newton cannot make progress", t
            )
        h = min(h, t1 - t)
        if jac is None:
            jac = numerical_jacobian(rhs, t, y, u_eval(t))
            stats.rhs_evaluations += n + 1
            stats.jacobian_evaluations += 1
            jac_fresh = True
        rebuild(h)
        sc = cfg.abs_tol + cfg.rel_tol * np.abs(y)

        # trapezoid stage to t + gamma*h
        tg = t + GAMMA * h
        yg, fg, ok = newton(tg, y + D * h * f0, D * h, y + GAMMA * h * f0, sc)
        if ok:
            # BDF2 stage to t + h (increment form: P1 - P0 == 1 exactly)
            ts = t + h
            base = y + P1 * (yg - y)
            y_new, f_new, ok = newton(ts, base, D * h, base + D * h * fg, sc)
        if not ok:
            if not jac_fresh:
                jac = None  # stale Jacobian: refresh and retry the same h
                continue
            stats.steps_rejected += 1
            h *= 0.3
            continue

        est = h * (ERR0 * f0 + ERR_G * fg + ERR1 * f_new)
        est = np.linalg.solve(m_lu, est)  # L-stable filtering of the estimate
        err = scaled_rms(est, error_scale(y, y_new, cfg))

        if err <= 1.0:
            # f_new already sits at the converged (t+h, y_new)
            t_new = t1 if (t1 - (t + h)) < 1e-12 * max(1.0, abs(t1)) else t + h
            collect(t_new, y_new, (t, h, "hermite", (y.copy(), y_new.copy(), f0, f_new)))
            t, y, f0 = t_new, y_new, f_new
            jac_fresh = False
            fac = SAFE_FAC * err ** (-1.0 / 3.0) if err > 0.0 else 5.0
            h = min(h * min(5.0, max(0.2, fac)), cfg.max_step)
        else:
            stats.steps_rejected += 1
            fac = SAFE_FAC * err ** (-1.0 / 3.0)
            h *= min(0.9, max(0.1, fac))
    return y
