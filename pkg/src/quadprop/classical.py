"""Classical paths two ways: the first-order field of extremals
``xdot = (2 F x + G)/m`` and Newton's equation solved as a boundary-value
problem by shooting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson, solve_ivp

from .errors import ConvergenceError, IntegrationError
from .propcore import DEFAULT_ATOL, DEFAULT_RTOL

__all__ = [
    "Trajectory",
    "solve_extremal",
    "solve_newton_bvp",
    "lagrangian",
    "action_along",
    "total_derivative_residual",
    "N_SAMPLES",
]

N_SAMPLES = 2001


@dataclass(frozen=True)
class Trajectory:
    """Sampled classical path.

    ``t``, ``x`` and ``xdot`` are equal-length arrays with ``t`` strictly
    increasing from ``t0`` to ``t1``.
    """

    t: np.ndarray
    x: np.ndarray
    xdot: np.ndarray
    x0: float
    t0: float
    x1: float
    t1: float

    def __len__(self):
        return len(self.t)

    @property
    def samples(self):
        return list(zip(self.t.tolist(), self.x.tolist(), self.xdot.tolist()))


def _anchor_offset(t0, t1):
    return max(1e-6, 1e-6 * (t1 - t0))


def solve_extremal(ac, x1, t1, n=N_SAMPLES, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL):
    """Integrate the field of extremals backward from ``(x1, t1)``.

    The field equation is 0/0 at the anchor, so integration stops at
    ``t0 + d`` with ``d = max(1e-6, 1e-6 (t1 - t0))``.  Position and velocity
    at ``t0`` are obtained by Richardson extrapolation from ``t0 + d`` and
    ``t0 + 2d``; the extrapolated position must reproduce ``x0``.

    Raises
    ------
    CausticError
        If ``t1`` is at a zero of the characteristic.
    ConvergenceError
        If the paths do not focus on ``x0`` (a coefficient bug).
    """
    ac.check(t1)
    m = ac.potential.m
    t0 = ac.t0
    d = _anchor_offset(t0, t1)

    def rhs(t, y):
        return [(2.0 * ac.F(t) * y[0] + ac.G(t)) / m]

    res = solve_ivp(rhs, (t1, t0 + d), [float(x1)], method="DOP853",
                    rtol=rtol, atol=atol, dense_output=True)
    if res.status != 0:
        raise IntegrationError(float(res.t[-1]), res.message)

    def vel(t, x):
        return (2.0 * ac.F(t) * x + ac.G(t)) / m

    xa, xb = float(res.sol(t0 + d)[0]), float(res.sol(t0 + 2 * d)[0])
    x_anchor = 2 * xa - xb
    v_anchor = 2 * vel(t0 + d, xa) - vel(t0 + 2 * d, xb)
    scale = 1.0 + abs(ac.x0) + abs(x1) + abs(v_anchor) * (t1 - t0)
    if abs(x_anchor - ac.x0) > 1e-6 * scale:
        raise ConvergenceError(
            f"field solutions do not focus on x0={ac.x0!r}: extrapolated {x_anchor!r}")

    t = np.linspace(t0, t1, n)
    t[-1] = t1
    inner = t[1:]
    x = np.empty(n)
    x[1:] = res.sol(inner)[0]
    x[-1] = x1
    x[0] = x_anchor
    xdot = np.empty(n)
    xdot[1:] = vel(inner, x[1:])
    xdot[0] = v_anchor
    return Trajectory(t, x, xdot, ac.x0, t0, float(x1), float(t1))


def _shoot(p, x0, t0, t1, v, rtol, atol):
    m = p.m

    def rhs(t, y):
        return [y[1], -(2.0 * p.F1(t) * y[0] + p.G1(t)) / m]

    res = solve_ivp(rhs, (t0, t1), [x0, v], method="DOP853", rtol=rtol, atol=atol, dense_output=True)
    if res.status != 0:
        raise IntegrationError(float(res.t[-1]), res.message)
    return res


def solve_newton_bvp(p, x0, t0, x1, t1, n=N_SAMPLES, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL,
                     max_iter=50):
    """Solve ``m xddot = -(2 F1 x + G1)`` with ``x(t0)=x0``, ``x(t1)=x1``.

    Secant iteration on the initial velocity until
    ``|x(t1) - x1| < 1e-10 (1 + |x1|)``.

    Raises
    ------
    ConvergenceError
        At conjugate points, where the end position no longer depends on the
        initial velocity, or if ``max_iter`` is exhausted.
    """
    x0, t0, x1, t1 = float(x0), float(t0), float(x1), float(t1)
    if not t1 > t0:
        raise ValueError("need t1 > t0")
    tol = 1e-10 * (1 + abs(x1))

    def miss(v):
        res = _shoot(p, x0, t0, t1, v, rtol, atol)
        return res.y[0, -1] - x1, res

    v_a = (x1 - x0) / (t1 - t0)
    r_a, res = miss(v_a)
    v_b = v_a + 1.0
    r_b, res_b = miss(v_b)
    for _ in range(max_iter):
        if abs(r_a) < tol:
            break
        slope = (r_b - r_a) / (v_b - v_a)
        # d x(t1) / d xdot(t0) is the characteristic u(t1); ~0 at a conjugate point
        if abs(slope) < 1e-8 * (t1 - t0):
            raise ConvergenceError(
                f"no convergence: t1={t1!r} is (numerically) conjugate to t0={t0!r}")
        v_new = v_b - r_b / slope
        r_new, res_new = miss(v_new)
        v_a, r_a, res = v_b, r_b, res_b
        v_b, r_b, res_b = v_new, r_new, res_new
        if abs(r_b) < tol:
            v_a, r_a, res = v_b, r_b, res_b
            break
    else:
        raise ConvergenceError(f"shooting did not converge in {max_iter} iterations")
    if abs(r_a) >= tol:
        raise ConvergenceError(f"shooting residual {r_a!r} above {tol!r}")

    t = np.linspace(t0, t1, n)
    t[-1] = t1
    y = res.sol(t)
    return Trajectory(t, y[0], y[1], x0, t0, x1, t1)


def lagrangian(p, x, xdot, t):
    """``(m/2) xdot^2 - V(x, t)``."""
    return 0.5 * p.m * np.square(xdot) - p.V(x, t)


def action_along(traj, p):
    """Time integral of the Lagrangian over the samples (composite Simpson)."""
    L = np.array([lagrangian(p, x, v, t) for t, x, v in zip(traj.t, traj.x, traj.xdot)])
    return float(simpson(L, x=traj.t))


def total_derivative_residual(ac, traj, t_samples, h=1e-5):
    """``|dS/dt - L|`` along a field solution at interior times.

    ``dS/dt`` is the chain rule ``dS/dt|_x + (dS/dx) xdot`` with both partial
    derivatives taken by central differences of :meth:`ActionCoefficients.action`.
    """
    p = ac.potential
    out = []
    for t in t_samples:
        x = float(np.interp(t, traj.t, traj.x))
        v = (2.0 * float(ac.F(t)) * x + float(ac.G(t))) / p.m
        dSdt = (ac.action(x, t + h) - ac.action(x, t - h)) / (2 * h)
        hx = 1e-5 * (1 + abs(x))
        dSdx = (ac.action(x + hx, t) - ac.action(x - hx, t)) / (2 * hx)
        out.append(abs(dSdt + dSdx * v - lagrangian(p, x, v, t)))
    return np.array(out)
