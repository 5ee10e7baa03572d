"""Closed-form propagators for the free particle and the harmonic oscillator,
and the drive-independence check for the fluctuation factor."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import CausticError
from .propcore import build_fluctuation, fluctuation, solve_characteristic

__all__ = ["ClosedFormPropagator", "free_K", "sho_K", "driven_fluctuation_invariance"]


def free_K(m, hbar, x, t, x0, t0):
    """Free-particle propagator.

    ``sqrt(m / (2 pi i hbar dt)) * exp(i m (x - x0)^2 / (2 hbar dt))`` with
    ``dt = t - t0``.  The square root is the principal branch.
    """
    dt = t - t0
    if not dt > 0:
        raise ValueError(f"need t > t0, got dt={dt}")
    pref = cmath.sqrt(m / (2j * math.pi * hbar * dt))
    return pref * np.exp(1j * m * np.square(np.asarray(x) - x0) / (2 * hbar * dt))


def sho_K(m, hbar, w, x, t, x0, t0):
    """Harmonic-oscillator propagator for ``V = m w^2 x^2 / 2``.

    Inside the first half period this is the principal-branch expression
    ``sqrt(m w / (2 pi i hbar sin(w dt)))``.  Past each multiple of pi the
    prefactor picks up ``exp(-i pi/2)``, matching the continuous branch
    used by :func:`quadprop.propcore.fluctuation`.
    """
    dt = t - t0
    if not dt > 0:
        raise ValueError(f"need t > t0, got dt={dt}")
    phase = w * dt
    s = math.sin(phase)
    if abs(s) < 1e-12:
        raise CausticError(t, f"w (t - t0) = {phase!r} is a multiple of pi")
    k = math.floor(phase / math.pi)
    pref = math.sqrt(m * w / (2 * math.pi * hbar * abs(s))) * cmath.exp(-0.25j * math.pi - 0.5j * math.pi * k)
    x = np.asarray(x)
    cot = math.cos(phase) / s
    expo = (m * w / 2) * ((np.square(x) + x0 * x0) * cot - 2 * x * x0 / s)
    return pref * np.exp(1j * expo / hbar)


@dataclass(frozen=True)
class ClosedFormPropagator:
    kind: str
    m: float = 1.0
    hbar: float = 1.0
    w: float = 1.0

    def __post_init__(self):
        if self.kind not in ("free", "sho"):
            raise ValueError(f"unknown closed form {self.kind!r}")

    def __call__(self, x, t, x0, t0):
        if self.kind == "free":
            return free_K(self.m, self.hbar, x, t, x0, t0)
        return sho_K(self.m, self.hbar, self.w, x, t, x0, t0)


def driven_fluctuation_invariance(p_driven, p_undriven, t_samples, t0=0.0, **solve_kw):
    """Largest ``|f_driven(t) - f_undriven(t)|`` over ``t_samples``.

    Both potentials must share ``F1``, ``m`` and ``hbar``.
    """
    if (p_driven.F1.unparse() != p_undriven.F1.unparse()
            or p_driven.m != p_undriven.m or p_driven.hbar != p_undriven.hbar):
        raise ValueError("driven and undriven potentials must share F1, m and hbar")
    T = max(t_samples)
    ff_d = build_fluctuation(solve_characteristic(p_driven, t0, T, **solve_kw))
    ff_u = build_fluctuation(solve_characteristic(p_undriven, t0, T, **solve_kw))
    return max(abs(fluctuation(ff_d, t) - fluctuation(ff_u, t)) for t in t_samples)
