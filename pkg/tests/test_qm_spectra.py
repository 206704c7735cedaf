import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate as sp_integrate

from dipole_noise.hydrogen import HydrogenState, spherical_harmonic
from dipole_noise.numerics import DomainError, laguerre_old_coefficients
from dipole_noise.qm_spectra import (
    angular_factor,
    correlation_qm,
    coupled_states,
    line_spectrum,
    moment_qm,
    moment_qm_half_units,
    tail_coeff_qm,
    tail_coeff_qm_free_particle,
    tail_exponent_qm,
    x2_over_r3_quadrature,
)

S211 = HydrogenState(2, 1, 1)


def test_angular_factor_values():
    assert angular_factor(1, 1, 0) == Fraction(1, 6)
    assert angular_factor(1, 1, 2) == Fraction(7, 30)
    assert angular_factor(1, 1, 3) == 0
    assert angular_factor(0, 0, -1) == 0


def test_angular_factor_vs_quadrature():
    def element_sq(lp, mp, l, m):
        def f(phi, t):
            return (np.conj(spherical_harmonic(lp, mp, t, phi)) * math.sin(t) ** 2 * math.cos(phi)
                    * spherical_harmonic(l, m, t, phi)).real

        return sp_integrate.dblquad(f, 0.0, math.pi, 0.0, 2 * math.pi, epsabs=1e-12)[0] ** 2

    # only m' = m - 1 = 0 exists for l' = 0
    assert float(angular_factor(1, 1, 0)) == pytest.approx(element_sq(0, 0, 1, 1), rel=1e-9)
    expected = element_sq(2, 0, 1, 1) + element_sq(2, 2, 1, 1)
    assert float(angular_factor(1, 1, 2)) == pytest.approx(expected, rel=1e-9)


@given(l=st.integers(0, 8), data=st.data())
def test_angular_factor_symmetric_in_m(l, data):
    m = data.draw(st.integers(0, l))
    for lp in (l - 1, l + 1):
        assert angular_factor(l, m, lp) == angular_factor(l, -m, lp)


def test_coupled_states_obey_selection_rules():
    for other in coupled_states(HydrogenState(3, 1, 1), 6):
        assert abs(other.l - 1) == 1 and abs(other.m - 1) == 1


def test_line_spectrum_partial_completeness():
    totals = [line_spectrum(S211, n, with_tail=False).total_weight for n in (5, 10, 20)]
    assert totals[0] < totals[1] < totals[2] < 12.0
    gaps = [12.0 - t for t in totals]
    assert gaps[0] > gaps[1] > gaps[2] > 0


def test_line_spectrum_is_symmetric():
    ls = line_spectrum(S211, 6)
    w = ls.lines
    pos = w[w[:, 0] > 0]
    neg = w[w[:, 0] < 0]
    assert sorted(pos[:, 0]) == pytest.approx(sorted(-neg[:, 0]))
    assert math.fsum(pos[:, 1]) == pytest.approx(math.fsum(neg[:, 1]))
    assert ls.metadata()["tail_exponent"] == 5.5
    with pytest.raises(DomainError):
        line_spectrum(S211, 1)


def test_correlation_at_zero_equals_line_sum():
    ls = line_spectrum(S211, 8, with_tail=False)
    assert correlation_qm(S211, 0.0, 8) == pytest.approx(ls.total_weight, rel=1e-14)
    vals = correlation_qm(S211, np.array([0.0, 3.0, 10.0]), 8)
    assert np.all(np.abs(vals) <= vals[0] + 1e-12)


def test_moments():
    assert moment_qm(S211, 0) == 12
    assert moment_qm(S211, 2) == Fraction(1, 10)
    assert moment_qm_half_units(S211) == Fraction(1, 5)
    with pytest.raises(DomainError):
        moment_qm(S211, 4)


@pytest.mark.parametrize("state", [S211, HydrogenState(3, 2, 1), HydrogenState(2, 0, 0), HydrogenState(4, 3, 3)],
                         ids=str)
def test_second_moment_is_x2_over_r3(state):
    assert x2_over_r3_quadrature(state) == pytest.approx(float(moment_qm(state, 2)), rel=1e-10)


def test_second_moment_is_px_squared_exactly():
    # <p_x^2> = int |d psi / dx|^2 for psi_211 = (x + i y) e^(-r/2) / (8 sqrt(pi))
    x, y, z = sympy.symbols("x y z", real=True)
    r, t, f = sympy.symbols("r theta phi", positive=True)
    psi = (x + sympy.I * y) * sympy.exp(-sympy.sqrt(x**2 + y**2 + z**2) / 2) / (8 * sympy.sqrt(sympy.pi))
    d = sympy.diff(psi, x)
    dens = sympy.simplify(sympy.expand(d * sympy.conjugate(d)))
    dens = sympy.simplify(dens.subs({x: r * sympy.sin(t) * sympy.cos(f), y: r * sympy.sin(t) * sympy.sin(f),
                                     z: r * sympy.cos(t)}))
    val = sympy.integrate(dens * r**2 * sympy.sin(t), (f, 0, 2 * sympy.pi), (t, 0, sympy.pi), (r, 0, sympy.oo))
    assert sympy.nsimplify(sympy.simplify(val)) == sympy.Rational(1, 10)
    assert Fraction(1, 10) == moment_qm(S211, 2)


@given(n=st.integers(2, 40))
def test_semiclassical_second_moment(n):
    s = HydrogenState(n, n - 1, n - 1)
    assert 2 * n * n * moment_qm(s, 2) == Fraction(n) / (n + Fraction(1, 2))


# --- high-frequency tail ---------------------------------------------------------------


def test_tail_exponent():
    assert tail_exponent_qm(S211) == 5.5
    assert tail_coeff_qm(S211)[1] == 5.5
    assert tail_exponent_qm(HydrogenState(1, 0, 0)) == 4.5


def _free_particle_spectrum(state, omega):
    # (1/2) sum_l' C |int r^(5/2) chi J_(l'+1/2)(k r) dr|^2, Hankel transforms in closed form
    mpmath.mp.dps = 60
    n, l = state.n, state.l
    norm = -mpmath.mpf(2) / n**2 * mpmath.sqrt(mpmath.factorial(n - l - 1) / mpmath.factorial(n + l) ** 3)
    terms = [(norm * c * (mpmath.mpf(2) / n) ** (l + j), l + j)
             for j, c in enumerate(laguerre_old_coefficients(n + l, 2 * l + 1))]
    a, k = mpmath.mpf(1) / n, mpmath.sqrt(2 * mpmath.mpf(omega))

    def hankel(mu, nu):
        # int_0^inf x^(mu-1) e^(-a x) J_nu(k x) dx
        return ((k / (2 * a)) ** nu * mpmath.gamma(nu + mu) / (a**mu * mpmath.gamma(nu + 1))
                * mpmath.hyp2f1((nu + mu) / 2, (nu + mu + 1) / 2, nu + 1, -(k / a) ** 2))

    total = mpmath.mpf(0)
    for lp in (l - 1, l + 1):
        cf = angular_factor(l, state.m, lp)
        if cf == 0:
            continue
        amp = sum(c * hankel(mpmath.mpf(7) / 2 + p, lp + mpmath.mpf(1) / 2) for c, p in terms)
        total += mpmath.mpf(cf.numerator) / cf.denominator * amp**2
    return total / 2


@pytest.mark.parametrize("state", [HydrogenState(1, 0, 0), S211, HydrogenState(2, 0, 0), HydrogenState(3, 2, 1),
                                   HydrogenState(3, 1, 1)], ids=str)
def test_free_particle_tail_limit(state):
    w = mpmath.mpf(10) ** 10
    expo = tail_exponent_qm(state)
    numeric = float(_free_particle_spectrum(state, w) * w**expo)
    assert tail_coeff_qm_free_particle(state) == pytest.approx(numeric, rel=1e-6)
    # exponent check: the scaled value no longer drifts
    w2 = mpmath.mpf(10) ** 12
    assert float(_free_particle_spectrum(state, w2) * w2**expo) == pytest.approx(numeric, rel=1e-6)


@pytest.mark.parametrize("state,ratio", [((1, 0, 0), 1), ((2, 1, 1), 1), ((2, 1, 0), 1), ((3, 1, 1), 1),
                                         ((2, 0, 0), Fraction(1, 4)), ((3, 0, 0), Fraction(1, 9)),
                                         ((3, 2, 2), Fraction(81, 16)), ((3, 2, 1), Fraction(81, 16)),
                                         ((4, 3, 3), 64)])
def test_tail_formula_vs_free_particle(state, ratio):
    s = HydrogenState(*state)
    assert tail_coeff_qm(s)[0] / tail_coeff_qm_free_particle(s) == pytest.approx(float(ratio), rel=1e-12)


def test_tail_211_value():
    assert tail_coeff_qm(S211)[0] == pytest.approx(0.0464225600518507, rel=1e-12)
