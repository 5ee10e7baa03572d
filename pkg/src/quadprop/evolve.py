"""Wavefunction propagation with the exact kernel, plus the quantum
mechanical oracles used to certify it: Schroedinger residual, delta limit,
composition and unitarity."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NyquistError, StepSizeError, SupportError
from .propcore import (
    DEFAULT_ATOL,
    DEFAULT_RTOL,
    build_coefficients,
    build_fluctuation,
    solve_characteristic,
)

__all__ = [
    "Grid",
    "Wavefunction",
    "gaussian_wavepacket",
    "default_grid",
    "propagate",
    "schrodinger_residual",
    "delta_limit_check",
    "composition_check",
    "Propagator",
    "DriftingFluctuation",
    "EDGE_DECAY",
]

EDGE_DECAY = 1e-12
_ROW_CHUNK = 256


@dataclass(frozen=True)
class Grid:
    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if self.n < 16:
            raise ValueError(f"grid needs at least 16 points, got {self.n}")
        if not self.x_max > self.x_min:
            raise ValueError("grid spacing must be positive")

    @property
    def dx(self):
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def x(self):
        return np.linspace(self.x_min, self.x_max, self.n)

    def weights(self):
        w = np.full(self.n, self.dx)
        w[0] = w[-1] = 0.5 * self.dx
        return w


@dataclass(frozen=True)
class Wavefunction:
    grid: Grid
    values: np.ndarray
    t: float

    @property
    def x(self):
        return self.grid.x

    def integrate(self, y):
        return np.trapezoid(y, dx=self.grid.dx)

    def norm(self):
        """L2 norm by the trapezoid rule."""
        return math.sqrt(float(self.integrate(np.abs(self.values) ** 2)))

    def mean_x(self):
        rho = np.abs(self.values) ** 2
        return float(self.integrate(self.x * rho) / self.integrate(rho))

    def width(self):
        rho = np.abs(self.values) ** 2
        total = self.integrate(rho)
        mu = self.integrate(self.x * rho) / total
        return math.sqrt(float(self.integrate((self.x - mu) ** 2 * rho) / total))

    def edge_ratio(self):
        a = np.abs(self.values)
        peak = a.max()
        return max(a[0], a[-1]) / peak if peak > 0 else 0.0

    def __add__(self, other):
        return Wavefunction(self.grid, self.values + other.values, self.t)

    def __rmul__(self, c):
        return Wavefunction(self.grid, c * self.values, self.t)


def default_grid(xbar, sigma, sigma_t=None, n=2048):
    """Grid centred on ``xbar`` spanning 12 widths of the wider of the two."""
    half = 12.0 * max(sigma, sigma_t or 0.0)
    return Grid(xbar - half, xbar + half, n)


def gaussian_wavepacket(grid, xbar, pbar, sigma, hbar=1.0, t=0.0):
    """Normalised Gaussian ``(2 pi s^2)^(-1/4) exp(-(x-xbar)^2/(4 s^2) + i pbar x/hbar)``.

    Raises
    ------
    SupportError
        If the packet has not decayed below ``1e-12`` of its peak at both
        grid edges.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    x = grid.x
    vals = (2 * math.pi * sigma**2) ** -0.25 * np.exp(-((x - xbar) ** 2) / (4 * sigma**2) + 1j * pbar * x / hbar)
    psi = Wavefunction(grid, vals, float(t))
    if psi.edge_ratio() >= EDGE_DECAY:
        raise SupportError(
            f"packet at {xbar} with width {sigma} is not contained in [{grid.x_min}, {grid.x_max}]")
    return psi


def _phase_steps(values):
    """Phase increment between neighbouring samples.

    Zero where either sample is below ``EDGE_DECAY`` of the peak: the phase
    of numerically negligible amplitudes is noise.
    """
    a, b = values[:-1], values[1:]
    d = np.angle(b * np.conj(a))
    floor = EDGE_DECAY * np.max(np.abs(values))
    d[(np.abs(a) <= floor) | (np.abs(b) <= floor)] = 0.0
    return d


def _check_nyquist(ac, x_target, t, x_src, dx, psi0_vals, hbar, chunk_rows=None):
    """Refuse if the phase of K * psi0 advances by more than pi per source step."""
    dpsi = _phase_steps(psi0_vals)
    dK = ac.dS_dx0(x_target[:, None], t, 0.5 * (x_src[1:] + x_src[:-1])[None, :]) * dx / hbar
    worst = float(np.max(np.abs(dK + dpsi[None, :])))
    if worst >= math.pi:
        raise NyquistError(
            f"phase advances {worst:.3g} rad per source step at t={t!r}; refine the grid (dx={dx:.3g})")


def _kernel_rows(ac, f, x_rows, t, x_src, hbar):
    S = ac.action(x_rows[:, None], t, x_src[None, :])
    return f * np.exp(1j * S / hbar)


class DriftingFluctuation:
    """A deliberately wrong fluctuation factor ``f(t) * factor**(t - t0)``.

    Used to show the residual oracle is sensitive to the prefactor.  A
    constant factor would go unnoticed: the Schroedinger equation is linear.
    """

    def __init__(self, ff, factor):
        self.ff = ff
        self.factor = factor
        self.char = ff.char

    def __call__(self, t):
        return self.ff(t) * self.factor ** (t - self.char.t0)


class Propagator:
    """Exact kernel from ``t0`` for one potential.

    The characteristic and the x0-independent integrals are solved once;
    the kernel for any source point ``x0`` is then a closed-form evaluation.
    """

    def __init__(self, potential, t0, T, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL, fluct=None):
        self.potential = potential
        self.t0 = float(t0)
        self.T = float(T)
        self.char = solve_characteristic(potential, t0, T, rtol, atol)
        self.ac = build_coefficients(potential, 0.0, t0, T, rtol, atol, char=self.char)
        self.ff = build_fluctuation(self.char) if fluct is None else fluct(self.char)

    def f(self, t):
        return self.ff(t)

    def kernel(self, x, t, x0):
        """``K(x, t; x0, t0)`` with broadcasting over ``x`` and ``x0``."""
        f = self.ff(t)
        return f * np.exp(1j * self.ac.action(x, t, x0) / self.potential.hbar)


def propagate(prop, psi0, t, target=None, check_nyquist=True):
    """``psi(x, t) = int K(x, t; x0, t0) psi0(x0) dx0`` by the trapezoid rule.

    Parameters
    ----------
    prop : Propagator
        Kernel anchored at ``psi0.t``.
    psi0 : Wavefunction
    t : float
    target : Grid, optional
        Output grid; defaults to the source grid.

    Raises
    ------
    CausticError
        At zeros of the characteristic.
    NyquistError
        If the source grid under-samples the kernel phase.
    """
    if abs(psi0.t - prop.t0) > 1e-12 * (1 + abs(prop.t0)):
        raise ValueError(f"wavefunction is tagged t={psi0.t}, kernel starts at t0={prop.t0}")
    hbar = prop.potential.hbar
    f = prop.ff(t)
    target = psi0.grid if target is None else target
    x_src = psi0.grid.x
    x_tgt = target.x
    if check_nyquist:
        _check_nyquist(prop.ac, x_tgt, t, x_src, psi0.grid.dx, psi0.values, hbar)
    weighted = psi0.grid.weights() * psi0.values
    out = np.empty(target.n, dtype=complex)
    # fixed row blocks: each target point is a single ordered reduction
    for start in range(0, target.n, _ROW_CHUNK):
        rows = x_tgt[start:start + _ROW_CHUNK]
        K = _kernel_rows(prop.ac, f, rows, t, x_src, hbar)
        out[start:start + _ROW_CHUNK] = np.sum(K * weighted[None, :], axis=1)
    return Wavefunction(target, out, float(t))


def _fd_residual(prop, x, t, x0, hx, ht):
    """Normalised Schroedinger residual at one (x, t) for given steps."""
    p = prop.potential
    m, hbar = p.m, p.hbar
    xs = x + hx * np.arange(-2, 3)
    Kx = prop.kernel(xs, t, x0)
    d2x = (-Kx[0] + 16 * Kx[1] - 30 * Kx[2] + 16 * Kx[3] - Kx[4]) / (12 * hx * hx)
    K = Kx[2]
    d1 = (prop.kernel(x, t + ht, x0) - prop.kernel(x, t - ht, x0)) / (2 * ht)
    d2 = (prop.kernel(x, t + ht / 2, x0) - prop.kernel(x, t - ht / 2, x0)) / ht
    # Richardson step on the centred difference cancels its h^2 term
    dt = (4 * d2 - d1) / 3
    r = -(hbar**2 / (2 * m)) * d2x + p.V(x, t) * K - 1j * hbar * dt
    return abs(r) * (t - prop.t0) / (hbar * abs(K))


def schrodinger_residual(prop, x_samples, t_samples, x0=0.0, tol=1e-6):
    """Normalised residual ``|H K - i hbar dK/dt| (t - t0) / (hbar |K|)``.

    Second x-derivatives use the 5-point stencil, time derivatives the
    2-point centred difference with one Richardson extrapolation.  At each sample the time step is chosen by
    halving until two successive estimates agree; if no step resolves the
    residual to ``tol`` a :class:`StepSizeError` is raised.

    Returns
    -------
    dict
        ``max`` and ``rms`` of the residual over all samples, and ``values``.
    """
    out = []
    for t in t_samples:
        prop.char.check(t)
        for x in x_samples:
            span = t - prop.t0
            p = prop.potential
            _, vend = prop.ac.endpoint_velocity(x, t, x0)
            # local wavenumber and frequency of K set the stencil widths
            k = p.m * abs(float(vend)) / p.hbar
            omega = abs(0.5 * p.m * float(vend) ** 2 + float(p.V(x, t))) / p.hbar
            hx = 1e-2 / max(k, 1.0)
            ht0 = min(1e-3 * span, 0.1 / max(omega, 1e-300))
            prev = _fd_residual(prop, x, t, x0, hx, ht0)
            best, gap_best = prev, math.inf
            ht = ht0
            for _ in range(8):
                ht /= 2
                cur = _fd_residual(prop, x, t, x0, hx, ht)
                gap = abs(cur - prev)
                if gap < gap_best:
                    best, gap_best = cur, gap
                if gap < 0.1 * tol:
                    break
                prev = cur
            if gap_best > tol:
                raise StepSizeError(
                    f"finite differences unresolved at x={x!r}, t={t!r} (spread {gap_best:.2g} > {tol:g})")
            out.append(best)
    vals = np.array(out)
    return {"max": float(vals.max()), "rms": float(np.sqrt(np.mean(vals**2))), "values": vals}


def delta_limit_check(potential, g, x0, epsilons, t0=0.0, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL):
    """``|int K(x, t0+eps; x0, t0) g(x) dx - g(x0)|`` for each ``eps``.

    ``g`` must be sampled finely enough that the kernel phase is resolved
    at the smallest ``eps`` (otherwise :class:`NyquistError`).  ``g(x0)`` is
    taken by interpolation when ``x0`` is off-grid.
    """
    prop = Propagator(potential, t0, t0 + max(epsilons), rtol, atol)
    x = g.x
    dx = g.grid.dx
    w = g.grid.weights()
    g_x0 = complex(np.interp(x0, x, g.values.real) + 1j * np.interp(x0, x, g.values.imag))
    errors = []
    hbar = potential.hbar
    for eps in epsilons:
        t = t0 + eps
        # kernel in its first argument: phase gradient is dS/dx = m xdot(t)
        _, vend = prop.ac.endpoint_velocity(x, t, x0)
        dpsi = _phase_steps(g.values)
        vmid = 0.5 * (vend[1:] + vend[:-1])
        worst = float(np.max(np.abs(potential.m * vmid * dx / hbar + dpsi)))
        if worst >= math.pi:
            raise NyquistError(f"eps={eps!r}: phase advances {worst:.3g} rad per step (dx={dx:.3g})")
        K = prop.kernel(x, t, x0)
        errors.append(abs(np.sum(K * g.values * w) - g_x0))
    return errors


def composition_check(potential, psi0, t_mid, t_end, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL):
    """L2 distance between one-step and two-step propagation to ``t_end``."""
    t0 = psi0.t
    if not (t0 <= t_mid < t_end):
        raise ValueError("need t0 <= t_mid < t_end")
    if t_mid == t0:
        return 0.0
    direct = propagate(Propagator(potential, t0, t_end, rtol, atol), psi0, t_end)
    mid = propagate(Propagator(potential, t0, t_mid, rtol, atol), psi0, t_mid)
    two = propagate(Propagator(potential, t_mid, t_end, rtol, atol), mid, t_end)
    diff = np.abs(direct.values - two.values) ** 2
    return math.sqrt(float(np.trapezoid(diff, dx=psi0.grid.dx)))
