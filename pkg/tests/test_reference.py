import math

import numpy as np
import pytest

from quadprop.errors import CausticError
from quadprop.propcore import QuadraticPotential, build_coefficients, build_fluctuation, solve_characteristic
from quadprop.reference import ClosedFormPropagator, driven_fluctuation_invariance, free_K, sho_K


def test_free_K_at_source():
    for dt in (0.1, 1.0, 7.0):
        assert free_K(1.3, 0.7, 0.4, 2 + dt, 0.4, 2.0) == pytest.approx(np.sqrt(1.3 / (2j * math.pi * 0.7 * dt)))


def test_free_K_modulus():
    x = np.linspace(-3, 3, 7)
    np.testing.assert_allclose(np.abs(free_K(2.0, 1.0, x, 1.5, 0.2, 0.0)) ** 2, 2.0 / (2 * math.pi * 1.5))


def test_sho_K_at_origin():
    dt = 1.1
    assert sho_K(1, 1, 1, 0.0, dt, 0.0, 0.0) == pytest.approx(np.sqrt(1 / (2j * math.pi * math.sin(dt))))


def test_sho_small_frequency_limit():
    errs = []
    for w in (1e-1, 5e-2):
        errs.append(abs(sho_K(1, 1, w, 0.7, 1.0, -0.2, 0.0) - free_K(1, 1, 0.7, 1.0, -0.2, 0.0)))
    # O(w^2): halving w divides the gap by about four
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)


def test_sho_caustic():
    with pytest.raises(CausticError):
        sho_K(1, 1, 1, 0.3, math.pi, 0.0, 0.0)


def test_closed_form_dispatch():
    assert ClosedFormPropagator("free")(0.2, 1.0, 0.0, 0.0) == free_K(1, 1, 0.2, 1.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        ClosedFormPropagator("morse")


def test_cross_oracle_free_random():
    rng = np.random.default_rng(3)
    p = QuadraticPotential("0", m=1.7, hbar=0.6)
    ch = solve_characteristic(p, 0.0, 5.0)
    ff = build_fluctuation(ch)
    ac = build_coefficients(p, 0.0, 0.0, 5.0, char=ch)
    for _ in range(100):
        x, x0 = rng.uniform(-3, 3, 2)
        t = rng.uniform(0.05, 5.0)
        K = ff(t) * np.exp(1j * ac.action(x, t, x0) / p.hbar)
        ref = free_K(1.7, 0.6, x, t, x0, 0.0)
        assert abs(K - ref) <= 1e-10 * abs(ref)


def test_sho_past_caustic_matches_continuous_branch():
    p = QuadraticPotential("0.5")
    ch = solve_characteristic(p, 0.0, 6.0)
    ff = build_fluctuation(ch)
    ac = build_coefficients(p, 0.4, 0.0, 6.0, char=ch)
    for t in (3.6, 4.7, 5.9):
        K = ff(t) * np.exp(1j * ac.action(0.9, t))
        assert abs(K - sho_K(1, 1, 1, 0.9, t, 0.4, 0.0)) < 1e-9


def test_driven_invariance_examples():
    ts = list(np.linspace(0.1, 3.0, 25))
    forced = QuadraticPotential("0.5", "-0.8*cos(1.3*t)")
    assert driven_fluctuation_invariance(forced, forced.with_drive(), ts) <= 1e-12
    tdep = QuadraticPotential("0.5*(1 + 0.4*cos(2.2*t))", "-0.8*cos(1.3*t)", "0.3*t^2")
    assert driven_fluctuation_invariance(tdep, tdep.with_drive(), ts) <= 1e-12


def test_driven_invariance_requires_same_F1():
    with pytest.raises(ValueError):
        driven_fluctuation_invariance(QuadraticPotential("0.5"), QuadraticPotential("0.6"), [1.0])
