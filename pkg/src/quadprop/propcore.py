"""Action coefficients, classical action and fluctuation factor for
time-dependent quadratic potentials ``V = F1(t) x^2 + G1(t) x + J1(t)``.

The Riccati equation ``dF/dt + 2 F^2/m = -F1`` is singular at the anchor
time.  It is linearised with ``F = (m/2) u'/u`` where ``m u'' = -2 F1 u``,
``u(t0) = 0`` and ``u'(t0) = 1``.  Zeros of ``u`` after ``t0`` are caustics.

The remaining coefficients are obtained from two further solutions of the
same equation of motion (``v`` with ``v(t0)=1, v'(t0)=0`` and the driven
particular solution ``p`` with ``p(t0)=p'(t0)=0``) together with the
integrals of ``G1 u``, ``G1 v``, ``G1 p`` and ``J1``.  The classical path
from ``(x0, t0)`` to ``(x, t)`` is ``x0 v + c u + p`` with
``c = (x - x0 v - p)/u``, and integration by parts of the quadratic
Lagrangian gives the action in closed form::

    S = (m/2) [x xdot(t) - x0 c] - (1/2)(x0 int G1 v + c int G1 u + int G1 p) - int J1

which stays finite through caustics of ``u`` (only ``x`` at ``u = 0`` is
excluded).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import CausticError, IntegrationError, QuadpropError
from .timefn import TimeFn, parse_timefn

__all__ = [
    "QuadraticPotential",
    "Characteristic",
    "ActionCoefficients",
    "FluctuationFactor",
    "solve_characteristic",
    "build_coefficients",
    "build_fluctuation",
    "coeff_F",
    "coeff_G",
    "coeff_J",
    "action_S",
    "fluctuation",
    "propagator_K",
    "coefficient_residuals",
    "DEFAULT_RTOL",
    "DEFAULT_ATOL",
    "CAUSTIC_TOL",
]

DEFAULT_RTOL = 1e-13
DEFAULT_ATOL = 1e-15
# |u| below CAUSTIC_TOL * (max |u| on the span) is treated as a caustic
CAUSTIC_TOL = 1e-8
_METHOD = "DOP853"


def _as_timefn(f):
    return f if isinstance(f, TimeFn) else parse_timefn(f)


@dataclass(frozen=True)
class QuadraticPotential:
    """``V(x, t) = F1(t) x^2 + G1(t) x + J1(t)`` for a particle of mass ``m``.

    Coefficients may be given as :class:`TimeFn` or as expression strings.
    """

    F1: TimeFn
    G1: TimeFn = "0"
    J1: TimeFn = "0"
    m: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("F1", "G1", "J1"):
            object.__setattr__(self, name, _as_timefn(getattr(self, name)))
        object.__setattr__(self, "m", float(self.m))
        object.__setattr__(self, "hbar", float(self.hbar))
        if not self.m > 0:
            raise ValueError(f"mass must be positive, got {self.m}")
        if not self.hbar > 0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")

    def V(self, x, t):
        """Potential at position(s) ``x`` and scalar time ``t``."""
        return self.F1(t) * np.square(x) + self.G1(t) * np.asarray(x) + self.J1(t)

    def with_drive(self, G1="0", J1="0"):
        return QuadraticPotential(self.F1, G1, J1, m=self.m, hbar=self.hbar)


def _find_zeros(sol, ts, t0):
    """Sign changes of the first component of ``sol`` strictly after ``t0``."""
    zeros = []
    for a, b in zip(ts[:-1], ts[1:]):
        sub = np.linspace(a, b, 9)
        vals = sol(sub)[0]
        for k in range(len(sub) - 1):
            lo, hi = sub[k], sub[k + 1]
            ylo, yhi = vals[k], vals[k + 1]
            if lo <= t0:
                continue
            if ylo == 0.0:
                if not zeros or zeros[-1] != lo:
                    zeros.append(float(lo))
            elif ylo * yhi < 0:
                zeros.append(float(brentq(lambda s: sol(s)[0], lo, hi, xtol=1e-15, rtol=1e-15)))
    if ts[-1] > t0 and sol(ts[-1])[0] == 0.0 and (not zeros or zeros[-1] != ts[-1]):
        zeros.append(float(ts[-1]))
    return zeros


@dataclass(frozen=True)
class Characteristic:
    """Dense solution of ``m u'' = -2 F1 u`` with ``u(t0)=0, u'(t0)=1``.

    A second fundamental solution ``v`` (``v(t0)=1, v'(t0)=0``) is carried in
    the same integrator.  Depends on ``F1`` and ``m`` only.
    """

    potential: QuadraticPotential
    t0: float
    T: float
    rtol: float
    atol: float
    zeros: tuple
    scale: float
    _sol: object = field(repr=False, compare=False)

    def state(self, t):
        """``(u, u', v, v')`` at time(s) ``t``."""
        y = self._sol(t)
        return y[0], 1.0 + y[1], 1.0 + y[2], y[3]

    def u(self, t):
        return self._sol(t)[0]

    def udot(self, t):
        return 1.0 + self._sol(t)[1]

    def crossings(self, t):
        """Number of caustics strictly before ``t``."""
        return sum(1 for z in self.zeros if z < t)

    def check(self, t):
        """Raise unless ``t`` lies in ``(t0, T]`` away from zeros of ``u``."""
        if t <= self.t0:
            raise CausticError(t, f"t={t!r} must exceed the anchor time t0={self.t0!r}")
        if t > self.T + 1e-12 * max(1.0, abs(self.T)):
            raise QuadpropError(f"t={t!r} outside the solved span ({self.t0!r}, {self.T!r}]")
        if abs(self.u(t)) <= CAUSTIC_TOL * self.scale:
            raise CausticError(t)


def _char_rhs(potential):
    m = potential.m
    F1 = potential.F1

    def rhs(t, y):
        # y = [u, u' - 1, v - 1, v']
        k = -2.0 * F1(t) / m
        return [1.0 + y[1], k * y[0], y[3], k * (1.0 + y[2])]

    return rhs


def _solve(rhs, y0, t0, T, rtol, atol):
    try:
        res = solve_ivp(rhs, (t0, T), y0, method=_METHOD, rtol=rtol, atol=atol, dense_output=True)
    except ArithmeticError as exc:  # includes NonFiniteError from the coefficients
        raise IntegrationError(float("nan"), str(exc)) from None
    if res.status != 0:
        t_fail = float(res.t[-1]) if len(res.t) else t0
        raise IntegrationError(t_fail, res.message)
    return res


def solve_characteristic(p, t0, T, tol=DEFAULT_RTOL, atol=DEFAULT_ATOL):
    """Integrate the characteristic equation on ``[t0, T]``.

    Parameters
    ----------
    p : QuadraticPotential
    t0, T : float
        Anchor time and end of span, ``T > t0``.
    tol : float
        Relative tolerance of the embedded Runge-Kutta integrator.
    atol : float
        Absolute tolerance.

    Returns
    -------
    Characteristic
        With all sign changes of ``u`` in ``(t0, T]`` located by bracketing
        root finding on the dense output.
    """
    t0, T = float(t0), float(T)
    if not T > t0:
        raise ValueError(f"need T > t0, got t0={t0}, T={T}")
    if not tol > 0 or not atol > 0:
        raise ValueError("tolerances must be positive")
    res = _solve(_char_rhs(p), [0.0, 0.0, 0.0, 0.0], t0, T, tol, atol)
    zeros = _find_zeros(res.sol, res.t, t0)
    scale = float(np.max(np.abs(res.y[0]))) or 1.0
    return Characteristic(p, t0, T, tol, atol, tuple(zeros), scale, res.sol)


def _drive_rhs(potential):
    m = potential.m
    F1, G1, J1 = potential.F1, potential.G1, potential.J1

    def rhs(t, y):
        # y = [u, u'-1, v-1, v', p, p', int G1 u, int G1 v, int G1 p, int J1]
        f1, g1 = F1(t), G1(t)
        k = -2.0 * f1 / m
        u, v, pp = y[0], 1.0 + y[2], y[4]
        return [
            1.0 + y[1],
            k * u,
            y[3],
            k * v,
            y[5],
            k * pp - g1 / m,
            g1 * u,
            g1 * v,
            g1 * pp,
            J1(t),
        ]

    return rhs


@dataclass(frozen=True)
class ActionCoefficients:
    """``S(x, t) = F(t) x^2 + G(t) x + J(t)`` anchored at ``(x0, t0)``.

    The x0-independent pieces are held in one dense ODE solution so that
    :meth:`action` can be evaluated for arrays of ``x`` and of source points
    ``x0`` at O(1) cost per pair.
    """

    potential: QuadraticPotential
    char: Characteristic
    x0: float
    t0: float
    _sol: object = field(repr=False, compare=False)

    @property
    def T(self):
        return self.char.T

    def _pieces(self, t):
        y = self._sol(t)
        return {
            "u": y[0], "ud": 1.0 + y[1], "vm1": y[2], "vd": y[3],
            "p": y[4], "pd": y[5], "gu": y[6], "gv": y[7], "gp": y[8], "jj": y[9],
        }

    def check(self, t):
        self.char.check(t)

    def F(self, t):
        q = self._pieces(t)
        return 0.5 * self.potential.m * q["ud"] / q["u"]

    def G(self, t, x0=None):
        x0 = self.x0 if x0 is None else x0
        q = self._pieces(t)
        return (-self.potential.m * np.asarray(x0) - q["gu"]) / q["u"]

    def J(self, t, x0=None):
        return self.action(0.0, t, x0)

    def endpoint_velocity(self, x, t, x0=None):
        """Initial and final velocity of the classical path ``(x0,t0) -> (x,t)``."""
        x0 = self.x0 if x0 is None else x0
        q = self._pieces(t)
        x = np.asarray(x, dtype=float)
        x0 = np.asarray(x0, dtype=float)
        c = (x - x0 * (1.0 + q["vm1"]) - q["p"]) / q["u"]
        vend = x0 * q["vd"] + q["pd"] + c * q["ud"]
        return c, vend

    def action(self, x, t, x0=None):
        """Classical action; ``x`` and ``x0`` broadcast against each other."""
        m = self.potential.m
        x0 = self.x0 if x0 is None else x0
        q = self._pieces(t)
        x = np.asarray(x, dtype=float)
        x0 = np.asarray(x0, dtype=float)
        # x - x0 v - p, written to avoid cancellation in v - 1 near t0
        c = ((x - x0) - x0 * q["vm1"] - q["p"]) / q["u"]
        vend = x0 * q["vd"] + q["pd"] + c * q["ud"]
        return 0.5 * m * (x * vend - x0 * c) - 0.5 * (x0 * q["gv"] + c * q["gu"] + q["gp"]) - q["jj"]

    def dS_dx0(self, x, t, x0=None):
        """Derivative of the action with respect to the source point: minus the initial momentum."""
        c, _ = self.endpoint_velocity(x, t, x0)
        return -self.potential.m * c


def build_coefficients(p, x0, t0, T, tol=DEFAULT_RTOL, atol=DEFAULT_ATOL, char=None):
    """Solve for the action coefficients of ``p`` anchored at ``(x0, t0)``."""
    t0, T = float(t0), float(T)
    if char is None:
        char = solve_characteristic(p, t0, T, tol, atol)
    elif char.t0 != t0 or char.T < T:
        raise ValueError("characteristic does not cover the requested span")
    res = _solve(_drive_rhs(p), [0.0] * 10, t0, T, tol, atol)
    return ActionCoefficients(p, char, float(x0), t0, res.sol)


@dataclass(frozen=True)
class FluctuationFactor:
    """``f(t) = sqrt(m / (2 pi i hbar u(t)))`` continued through caustics.

    ``normalization`` is the complex constant multiplying ``|u|^(-1/2)``
    before the first caustic; each simple zero of ``u`` crossed adds a
    factor ``exp(-i pi/2)``.
    """

    char: Characteristic
    normalization: complex

    def crossings(self, t):
        return self.char.crossings(t)

    def __call__(self, t):
        return fluctuation(self, t)


def build_fluctuation(char):
    p = char.potential
    norm = math.sqrt(p.m / (2.0 * math.pi * p.hbar)) * complex(math.cos(-math.pi / 4), math.sin(-math.pi / 4))
    return FluctuationFactor(char, norm)


def coeff_F(ac, t):
    ac.check(t)
    return float(ac.F(t))


def coeff_G(ac, t):
    ac.check(t)
    return float(ac.G(t))


def coeff_J(ac, t):
    ac.check(t)
    return float(ac.J(t))


def action_S(ac, x, t):
    ac.check(t)
    return float(ac.action(x, t))


def _maslov(k):
    return complex(math.cos(-0.5 * math.pi * k), math.sin(-0.5 * math.pi * k))


def fluctuation(ff, t):
    """Fluctuation factor at ``t``; raises :class:`CausticError` at zeros of ``u``."""
    ff.char.check(t)
    u = float(ff.char.u(t))
    return ff.normalization / math.sqrt(abs(u)) * _maslov(ff.char.crossings(t))


def propagator_K(ac, ff, x, t):
    """``K(x, t; x0, t0) = f(t) exp(i S(x, t) / hbar)``."""
    f = fluctuation(ff, t)
    S = ac.action(x, t)
    out = f * np.exp(1j * S / ac.potential.hbar)
    return complex(out) if np.ndim(out) == 0 else out


def _central_derivative(fn, t, h):
    """Fourth-order central difference."""
    return (-fn(t + 2 * h) + 8 * fn(t + h) - 8 * fn(t - h) + fn(t - 2 * h)) / (12 * h)


def _settled_derivative(fn, t, h_max, h_min=1e-7):
    """Central difference at the step where halving changes the estimate least.

    Balances truncation error (large steps) against the noise of the dense
    interpolant (small steps).
    """
    best, best_gap = None, math.inf
    h = h_max
    prev = _central_derivative(fn, t, h)
    while h / 2 >= h_min:
        h /= 2
        cur = _central_derivative(fn, t, h)
        gap = abs(cur - prev)
        if gap < best_gap:
            best, best_gap = cur, gap
        prev = cur
    return prev if best is None else best


def coefficient_residuals(ac, t_samples):
    """Residuals of the three coefficient equations at the given times.

    Derivatives of F, G and J are taken by finite differences on the dense
    solution, independent of the ODE right-hand side.  The largest trial step
    scales with the distance to the nearest zero of ``u`` (``|u/u'|``).

    Returns
    -------
    dict
        ``riccati``, ``linear``, ``j`` arrays of
        ``|residual| / (1 + |coefficient|)`` per sample.
    """
    p = ac.potential
    m = p.m
    ric, lin, jres = [], [], []
    for t in t_samples:
        ac.check(t)
        u, ud = float(ac.char.u(t)), float(ac.char.udot(t))
        h = min(1e-2, 0.1 * abs(u) / max(abs(ud), 1e-300), 0.2 * (t - ac.t0))
        F, G = float(ac.F(t)), float(ac.G(t))
        Fd = _settled_derivative(lambda s: float(ac.F(s)), t, h)
        Gd = _settled_derivative(lambda s: float(ac.G(s)), t, h)
        Jd = _settled_derivative(lambda s: float(ac.J(s)), t, h)
        f1, g1, j1 = p.F1(t), p.G1(t), p.J1(t)
        ric.append(abs(Fd + 2 * F * F / m + f1) / (1 + abs(f1)))
        lin.append(abs(Gd + 2 * F * G / m + g1) / (1 + abs(g1)))
        jres.append(abs(Jd + G * G / (2 * m) + j1) / (1 + abs(j1)))
    return {"riccati": np.array(ric), "linear": np.array(lin), "j": np.array(jres)}
