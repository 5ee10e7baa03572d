"""Independent reference computations used by the tests.

Nothing here imports the code paths under test.
"""

import cmath
import math


def rk4_characteristic(F1, m, t_end, h=1e-5, t0=0.0):
    """Fixed-step classical RK4 for ``m u'' = -2 F1(t) u``, ``u(t0)=0, u'(t0)=1``.

    Returns ``(times, u, udot)`` lists sampled every step.
    """
    n = int(round((t_end - t0) / h))
    u, ud, t = 0.0, 1.0, t0
    ts, us, uds = [t], [u], [ud]
    k = lambda s: -2.0 * F1(s) / m
    for _ in range(n):
        a1, b1 = ud, k(t) * u
        a2, b2 = ud + 0.5 * h * b1, k(t + 0.5 * h) * (u + 0.5 * h * a1)
        a3, b3 = ud + 0.5 * h * b2, k(t + 0.5 * h) * (u + 0.5 * h * a2)
        a4, b4 = ud + h * b3, k(t + h) * (u + h * a3)
        u += h / 6 * (a1 + 2 * a2 + 2 * a3 + a4)
        ud += h / 6 * (b1 + 2 * b2 + 2 * b3 + b4)
        t = t0 + (len(ts)) * h
        ts.append(t)
        us.append(u)
        uds.append(ud)
    return ts, us, uds


def free_gaussian(x, t, sigma, xbar=0.0, pbar=0.0, m=1.0, hbar=1.0):
    """Exact free evolution of the normalised Gaussian packet."""
    a = 1 + 1j * hbar * t / (2 * m * sigma**2)
    k = pbar / hbar
    xc = x - xbar - hbar * k * t / m
    pref = (2 * math.pi * sigma**2) ** -0.25 / cmath.sqrt(a)
    return pref * cmath.exp(-xc**2 / (4 * sigma**2 * a) + 1j * k * (x - xbar) - 1j * hbar * k * k * t / (2 * m) + 1j * k * xbar)


def free_width(t, sigma, m=1.0, hbar=1.0):
    return math.sqrt(sigma**2 + (hbar * t / (2 * m * sigma)) ** 2)
