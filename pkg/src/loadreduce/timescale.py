"""Generic two-time-scale order reduction.

Takes a system split into slow states x and fast states z with a small
multiplier eps on the fast derivatives, computes the quasi-steady-state (QSS)
root of the fast equations, builds the reduced slow model and the
boundary-layer (fast-deviation) model, and implements the accuracy-assessment
machinery: decay-rate fitting, the eps* and eps** bounds, the three-way
reduction verdict, and the empirical error-order check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .blocks import constant_signal
from .odesolve import OdeProblem, Trajectory, dense_output, numerical_jacobian

QSS_TOL = 1e-10
MAX_NEWTON_ITERS = 50
MAX_DAMPING_HALVINGS = 10


class NoIsolatedRoot(RuntimeError):
    """Newton failed to find an isolated root of the fast algebraic equation."""


class SingularJacobian(RuntimeError):
    """The fast-equation Jacobian is singular at an iterate."""


class NotExponentiallyStable(RuntimeError):
    """Boundary-layer trajectory does not decay exponentially."""


class NoSolution(RuntimeError):
    """eps*ln(1/eps) = a*T has no root in (0, 1/e) for this a*T."""


class InsufficientData(ValueError):
    """Too few eps samples to fit an error order."""


class NearZeroError(RuntimeError):
    """Errors are at numerical noise level; an order fit would be meaningless."""


# ---------------------------------------------------------------------------
# system description
# ---------------------------------------------------------------------------

@dataclass
class TwoTimeScaleSystem:
    """dx/dt = f(x, z, u, eps);  eps*dz/dt = g(x, z, u, eps).

    qss, when provided, is the analytic root z = h(x, u) of g(x, z, u, 0) = 0.
    degenerate_rows lists fast equations whose own variable does not appear in
    g (no isolated root); they are exempt from off-trajectory residual checks
    and handled by the deviation-form boundary layer.
    """

    f: Callable
    g: Callable
    epsilon: float
    dims: tuple  # (n_slow, m_fast, p_inputs)
    qss: Optional[Callable] = None
    degenerate_rows: tuple = ()

    def __post_init__(self):
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")

    def residual(self, x, u, z=None) -> np.ndarray:
        """g(x, h(x,u), u, 0), the QSS defect (degenerate rows included)."""
        if z is None:
            z = qss_solve(self, x, u, np.zeros(self.dims[1]))
        return np.asarray(self.g(x, z, u, 0.0), dtype=float)


@dataclass(frozen=True)
class SlowFastPartition:
    slow_indices: tuple
    fast_indices: tuple
    per_state_coefficients: tuple  # s, one per state of the combined system

    def __post_init__(self):
        slow, fast = set(self.slow_indices), set(self.fast_indices)
        if slow & fast:
            raise ValueError("slow and fast index sets overlap")
        if slow | fast != set(range(len(self.per_state_coefficients))):
            raise ValueError("partition must cover every state exactly once")
        c = self.per_state_coefficients
        if fast and slow and max(c[i] for i in fast) >= min(c[i] for i in slow):
            raise ValueError("every fast coefficient must be below every slow one")


def identify_partition(coefficients: Sequence[float], ratio: float = 0.1) -> SlowFastPartition:
    """Split states into fast/slow by clustering their time-constant coefficients.

    A state is fast when its coefficient sits below the first gap of at least
    1/ratio (default 10x) in the sorted coefficient list -- the same eyeball
    rule used to partition the motor and DER models.
    """
    c = [float(v) for v in coefficients]
    order = np.argsort(c)
    split = None
    for k in range(len(order) - 1):
        lo, hi = c[order[k]], c[order[k + 1]]
        if lo <= ratio * hi:
            split = k
            break
    if split is None:
        return SlowFastPartition(tuple(range(len(c))), (), tuple(c))
    fast = tuple(sorted(int(i) for i in order[: split + 1]))
    slow = tuple(sorted(int(i) for i in order[split + 1 :]))
    return SlowFastPartition(slow, fast, tuple(c))


@dataclass(frozen=True)
class AccuracyBounds:
    """Growth/decay constants feeding the eps bounds.

    mu bounds the initial states and the input and input-rate magnitudes;
    b3, b5, b6 are the Lyapunov-function growth constants and k0 the slow-rhs
    bound; (k1, a) is the boundary-layer decay envelope k1*exp(-a*tau).
    """

    b3: float
    b5: float
    b6: float
    k0: float
    a: float
    k1: float
    mu: float = 0.0

    def __post_init__(self):
        for name in ("b3", "b5", "b6", "k0", "a", "k1"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be > 0")
        if self.mu < 0.0:
            raise ValueError("mu must be >= 0")


QSS_ONLY = "QssOnly"
QSS_PLUS_BOUNDARY_LAYER = "QssPlusBoundaryLayer"
REPARTITION = "Repartition"


@dataclass(frozen=True)
class ReductionDecision:
    verdict: str
    eps_star: float
    eps_double_star: Optional[float]  # None when eps*ln(1/eps)=a*T had no root
    settle_time_T: float


# ---------------------------------------------------------------------------
# QSS solution and model builders
# ---------------------------------------------------------------------------

def qss_solve(sys: TwoTimeScaleSystem, x, u, z_guess) -> np.ndarray:
    """Root z = h(x, u) of the fast algebraic equation g(x, z, u, 0) = 0.

    Uses the analytic qss when the system carries one (verifying the
    residual), otherwise damped Newton with a numerical Jacobian.
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)

    check = [i for i in range(sys.dims[1]) if i not in sys.degenerate_rows]
    if sys.qss is not None:
        z = np.asarray(sys.qss(x, u), dtype=float)
        res = np.asarray(sys.g(x, z, u, 0.0), dtype=float)
        if check and np.max(np.abs(res[check])) > QSS_TOL:
            raise NoIsolatedRoot(
                f"analytic qss residual {np.max(np.abs(res[check])):.3e} exceeds {QSS_TOL}"
            )
        return z

    z = np.asarray(z_guess, dtype=float).copy()
    r = np.asarray(sys.g(x, z, u, 0.0), dtype=float)
    rnorm = float(np.max(np.abs(r)))
    for _ in range(MAX_NEWTON_ITERS):
        if rnorm <= QSS_TOL:
            return z
        jac = numerical_jacobian(lambda t, zz, uu: sys.g(x, zz, uu, 0.0), 0.0, z, u)
        try:
            delta = np.linalg.solve(jac, r)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobian(f"singular fast-equation Jacobian at z={z}") from exc
        if not np.all(np.isfinite(delta)):
            raise SingularJacobian(f"non-finite Newton step at z={z}")
        # damping: halve the step while the residual grows
        step = 1.0
        for _ in range(MAX_DAMPING_HALVINGS):
            z_try = z - step * delta
            r_try = np.asarray(sys.g(x, z_try, u, 0.0), dtype=float)
            if float(np.max(np.abs(r_try))) < rnorm:
                break
            step *= 0.5
        z, r = z_try, r_try
        rnorm = float(np.max(np.abs(r)))
    raise NoIsolatedRoot(f"Newton stalled after {MAX_NEWTON_ITERS} iterations, residual {rnorm:.3e}")


def build_reduced(
    sys: TwoTimeScaleSystem,
    input_signal=None,
    initial_state=None,
    t_span=(0.0, 1.0),
    discontinuity_times=(),
) -> OdeProblem:
    """Reduced slow model: dx/dt = f(x, h(x, u), u, 0).

    The QSS root is re-solved at every evaluation (warm-started along the
    trajectory when Newton is in play).
    """
    n, m, p = sys.dims
    warm = {"z": np.zeros(m)}

    def rhs(t, x, u):
        try:
            z = qss_solve(sys, x, u, warm["z"])
        except (NoIsolatedRoot, SingularJacobian) as exc:
            raise type(exc)(f"{exc} (while reducing at t={t}, x={x})") from exc
        warm["z"] = z
        return np.asarray(sys.f(x, z, u, 0.0), dtype=float)

    return OdeProblem(
        rhs=rhs,
        input=input_signal if input_signal is not None else constant_signal(*np.zeros(p)),
        initial_state=np.zeros(n) if initial_state is None else initial_state,
        t_span=t_span,
        discontinuity_times=discontinuity_times,
    )


def build_boundary_layer(
    sys: TwoTimeScaleSystem,
    x_frozen,
    u_frozen,
    y0=None,
    tau_span=(0.0, 10.0),
) -> OdeProblem:
    """Fast-deviation model in stretched time: dy/dtau = g(x, y+h, u, 0) - g(x, h, u, 0).

    Slow states and inputs are frozen; the subtracted offset makes y = 0 an
    exact equilibrium even for degenerate rows (for the others it is zero to
    the QSS residual tolerance anyway).
    """
    x_frozen = np.asarray(x_frozen, dtype=float)
    u_frozen = np.asarray(u_frozen, dtype=float)
    m = sys.dims[1]
    h0 = qss_solve(sys, x_frozen, u_frozen, np.zeros(m))
    g0 = np.asarray(sys.g(x_frozen, h0, u_frozen, 0.0), dtype=float)

    def rhs(tau, y, _u):
        return np.asarray(sys.g(x_frozen, y + h0, u_frozen, 0.0), dtype=float) - g0

    return OdeProblem(
        rhs=rhs,
        input=constant_signal(0.0),
        initial_state=np.zeros(m) if y0 is None else np.asarray(y0, dtype=float),
        t_span=tau_span,
    )


# ---------------------------------------------------------------------------
# accuracy assessment
# ---------------------------------------------------------------------------

def estimate_decay(traj: Trajectory) -> tuple:
    """Fit ||y(tau)|| ~ k1*exp(-a*tau) on the decaying window.

    The fit window keeps samples with norm in [1e-8, 0.9*initial]; returns
    (k1, a) with a > 0 or raises NotExponentiallyStable.
    """
    norms = np.linalg.norm(traj.states, axis=1)
    n0 = norms[0]
    mask = (norms >= 1e-8) & (norms <= 0.9 * n0)
    if np.count_nonzero(mask) < 2:
        raise NotExponentiallyStable("no decaying window found (norm never fell below 90% of start)")
    tau = traj.times[mask]
    lognorm = np.log(norms[mask])
    slope, intercept = np.polyfit(tau, lognorm, 1)
    if slope >= 0.0:
        raise NotExponentiallyStable(f"fit slope {slope:.3e} is not negative")
    return float(math.exp(intercept)), float(-slope)


def epsilon_star(b: AccuracyBounds) -> float:
    """Largest eps with O(eps) accuracy of the corrected reduction."""
    return b.b3 / (b.b5 * b.k0 + b.b6 * b.mu)


EPS_LN_MAX = 1.0 / math.e  # max of eps*ln(1/eps) on (0,1), attained at 1/e


def solve_eps_double_star(a: float, T: float) -> float:
    """Smaller root eps in (0, 1/e) of eps*ln(1/eps) = a*T, by bisection."""
    target = a * T
    if target >= EPS_LN_MAX:
        raise NoSolution(
            f"a*T = {target:.6f} >= 1/e = {EPS_LN_MAX:.6f}: no root in (0, 1/e)"
        )
    if target <= 0.0:
        raise NoSolution("a*T must be positive")
    lo, hi = 0.0, EPS_LN_MAX
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = mid * math.log(1.0 / mid) if mid > 0.0 else 0.0
        if abs(val - target) <= 1e-12:
            return mid
        if val < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_T_given_eps(a: float, eps: float) -> float:
    """Settle time T after which the plain QSS solution is O(eps)-accurate."""
    if not (0.0 < eps < 1.0):
        raise ValueError("eps must lie in (0, 1)")
    if a <= 0.0:
        raise ValueError("a must be positive")
    return eps * math.log(1.0 / eps) / a


def assess(sys: TwoTimeScaleSystem, b: AccuracyBounds, T_required: float) -> ReductionDecision:
    """Three-way reduction verdict.

    eps <= eps**        -> QSS solution alone is accurate after T_required
    eps** < eps <= eps* -> add the boundary-layer correction
    eps > eps*          -> the partition itself is too coarse; repartition
    """
    e_star = epsilon_star(b)
    try:
        e_dstar = solve_eps_double_star(b.a, T_required)
    except NoSolution:
        e_dstar = None
    if e_dstar is not None and sys.epsilon <= e_dstar:
        verdict = QSS_ONLY
    elif sys.epsilon <= e_star:
        verdict = QSS_PLUS_BOUNDARY_LAYER
    else:
        verdict = REPARTITION
    return ReductionDecision(
        verdict=verdict,
        eps_star=e_star,
        eps_double_star=e_dstar,
        settle_time_T=T_required,
    )


def trajectory_error_order(
    full_runs: Sequence[Trajectory],
    reduced: Trajectory,
    eps_values: Sequence[float],
    slow_indices: Sequence[int],
    grid: Optional[np.ndarray] = None,
    grid_step: float = 1e-3,
    near_zero: float = 1e-10,
) -> float:
    """Least-squares slope of log(sup-norm slow-state error) vs log(eps).

    full_runs holds one full-model trajectory per eps value; reduced is the
    (eps-independent) reduced run.  Errors are measured on a uniform grid.
    """
    if len(eps_values) < 3:
        raise InsufficientData(f"need at least 3 eps samples, got {len(eps_values)}")
    if len(full_runs) != len(eps_values):
        raise InsufficientData("one full trajectory per eps value required")
    if grid is None:
        t0 = max(tr.times[0] for tr in list(full_runs) + [reduced])
        t1 = min(tr.times[-1] for tr in list(full_runs) + [reduced])
        grid = np.arange(t0, t1 + 0.5 * grid_step, grid_step)
    slow_indices = list(slow_indices)

    errors = []
    for traj in full_runs:
        worst = 0.0
        for t in grid:
            xf = dense_output(traj, float(t))[slow_indices]
            xr = dense_output(reduced, float(t))
            worst = max(worst, float(np.max(np.abs(xf - xr))))
        errors.append(worst)
    if max(errors) < near_zero:
        raise NearZeroError(
            f"sup-norm errors all below {near_zero:.1e}; slow states do not feel the fast ones"
        )
    slope = np.polyfit(np.log(eps_values), np.log(errors), 1)[0]
    return float(slope)
