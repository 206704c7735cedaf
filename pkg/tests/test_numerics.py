import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from dipole_noise.numerics import (
    DomainError,
    PoleError,
    QuadratureError,
    QuadSpec,
    assoc_laguerre_old,
    assoc_legendre,
    bessel_k,
    bessel_k_scaled,
    bessel_k_small_z,
    ferrers_p_series,
    gegenbauer,
    gegenbauer_at_one,
    integrate,
    laguerre_old_coefficients,
    legendre_derivative_coefficients,
    legendre_p_at_zero,
    legendre_p_deriv_at_zero,
)


def _rodrigues_old_laguerre(q, p):
    # L_q^p = d^p/dx^p [ e^x d^q/dx^q (x^q e^-x) ]
    x = sympy.symbols("x")
    lq = sympy.exp(x) * sympy.diff(x**q * sympy.exp(-x), x, q)
    return sympy.Poly(sympy.expand(sympy.simplify(sympy.diff(lq, x, p))), x)


# --- Laguerre ---------------------------------------------------------------


@pytest.mark.parametrize("q,p", [(1, 0), (1, 1), (3, 3), (4, 3), (5, 3), (5, 5), (6, 5), (7, 3)])
def test_laguerre_matches_rodrigues(q, p):
    poly = _rodrigues_old_laguerre(q, p)
    expected = [int(c) for c in reversed(poly.all_coeffs())]
    assert list(laguerre_old_coefficients(q, p)) == expected


@pytest.mark.parametrize("q,p,value", [(3, 3, -6), (1, 0, 1), (5, 5, -120)])
def test_laguerre_tabulated(q, p, value):
    assert assoc_laguerre_old(q, p, 0.0) == value
    if q == p:
        # constant polynomial
        assert assoc_laguerre_old(q, p, np.array([0.7, 3.0])).tolist() == [value, value]


@given(q=st.integers(0, 9), data=st.data(), x=st.floats(0, 30))
def test_laguerre_recurrence_matches_series(q, data, x):
    p = data.draw(st.integers(0, q))
    series = sum(c * x**j for j, c in enumerate(laguerre_old_coefficients(q, p)))
    assert assoc_laguerre_old(q, p, x) == pytest.approx(series, rel=1e-9, abs=1e-9 * math.factorial(q) * (1 + x) ** q)


def test_laguerre_domain():
    with pytest.raises(DomainError):
        assoc_laguerre_old(2, 3, 0.0)


# --- Legendre / Gegenbauer ----------------------------------------------------


def test_legendre_trivial():
    assert assoc_legendre(0, 0, 0.3) == 1.0
    assert assoc_legendre(1, 0, 0.42) == pytest.approx(0.42)
    assert assoc_legendre(1, 1, 0.6) == pytest.approx(0.8)  # no Condon-Shortley sign


@given(l=st.integers(0, 8), data=st.data(), x=st.floats(-1, 1))
def test_legendre_vs_scipy(l, data, x):
    m = data.draw(st.integers(0, l))
    expected = (-1) ** m * special.lpmv(m, l, x)
    assert assoc_legendre(l, m, x) == pytest.approx(expected, rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("l,m", [(2, 1), (3, 2), (4, 0), (5, 3)])
def test_legendre_derivative_coefficients(l, m):
    for x in (-0.7, 0.1, 0.5):
        d = sum(float(c) * x**k for k, c in enumerate(legendre_derivative_coefficients(l, m)))
        assert (1 - x * x) ** (m / 2) * d == pytest.approx(assoc_legendre(l, m, x), rel=1e-12)


def test_gegenbauer_values():
    assert gegenbauer(0, 2.5, 0.3) == 1.0
    assert gegenbauer(1, 1.5, 0.4) == pytest.approx(1.2)
    for l, m in [(1, 1), (2, 1), (3, 0), (4, 2)]:
        assert gegenbauer_at_one(l, m) == Fraction(math.factorial(l + m), math.factorial(2 * m) * math.factorial(l - m))
        assert gegenbauer(l - m, m + 0.5, 1.0) == pytest.approx(float(gegenbauer_at_one(l, m)))


@given(k=st.integers(0, 10), alpha=st.floats(0.5, 6), x=st.floats(-1, 1))
def test_gegenbauer_vs_scipy(k, alpha, x):
    assert gegenbauer(k, alpha, x) == pytest.approx(special.eval_gegenbauer(k, alpha, x), rel=1e-9, abs=1e-9)


# --- Bessel K ---------------------------------------------------------------


def _k_integral(nu, z):
    # integrand is below e^-700 past cosh(u) = 1 + 700/z
    top = math.acosh(1.0 + 700.0 / z)
    return integrate(lambda u: math.exp(-z * math.cosh(u)) * math.cosh(nu * u), 0.0, top)


def test_bessel_k1_at_one():
    assert bessel_k(1, 1.0) == pytest.approx(0.6019072302, abs=1e-10)
    assert bessel_k(1, 1.0) == pytest.approx(_k_integral(1, 1.0), rel=1e-12)


@given(nu=st.integers(0, 7), z=st.floats(1e-6, 700))
def test_bessel_k_vs_scipy(nu, z):
    assert bessel_k(nu, z) == pytest.approx(special.kv(nu, z), rel=1e-12, abs=1e-300)
    assert bessel_k_scaled(nu, z) == pytest.approx(special.kve(nu, z), rel=1e-12)


@pytest.mark.parametrize("z", [0.05, 1.99, 2.0, 2.01, 5.0, 40.0])
def test_bessel_crossover_against_integral(z):
    for nu in (0, 1, 2):
        assert bessel_k(nu, z) == pytest.approx(_k_integral(nu, z), rel=1e-11)


def test_bessel_small_z_forms():
    z = 1e-7
    assert bessel_k(1, z) * z == pytest.approx(1.0, rel=1e-6)
    assert bessel_k_small_z(1, z) == pytest.approx(1 / z)
    assert bessel_k(0, z) / -math.log(z) == pytest.approx(1.0, rel=0.05)
    assert bessel_k(2, z) == pytest.approx(bessel_k_small_z(2, z), rel=1e-6)


def test_bessel_domain_and_underflow():
    with pytest.raises(DomainError):
        bessel_k(1, 0.0)
    assert bessel_k(1, 800.0) == 0.0


# --- Ferrers functions at the origin ------------------------------------------


@pytest.mark.parametrize("nu,mu", [(3.5, -2.5), (3.5, -0.5), (4.5, -1.5), (4.5, -3.5), (6.5, -4.5), (2.5, 0.0)])
def test_ferrers_derivative_vs_mpmath(nu, mu):
    ref = float(mpmath.diff(lambda x: mpmath.legenp(nu, mu, x, type=2), 0))
    assert legendre_p_deriv_at_zero(nu, mu) == pytest.approx(ref, rel=1e-10, abs=1e-14)
    assert ferrers_p_series(nu, mu, 0.3) == pytest.approx(float(mpmath.legenp(nu, mu, 0.3, type=2)), rel=1e-10)


def test_ferrers_even_function_has_zero_derivative():
    # P_2 is even
    assert legendre_p_deriv_at_zero(2.0, 0.0) == 0.0
    assert legendre_p_at_zero(1.0, 0.0) == 0.0


@pytest.mark.parametrize("l", [0, 1, 2, 3])
def test_ferrers_tail_values(l):
    nu = 3 + l - 0.5
    for lp in (l - 1, l + 1):
        if lp < 0:
            continue
        mu = -(lp + 0.5)
        assert legendre_p_at_zero(nu, mu) == 0.0
        d = legendre_p_deriv_at_zero(nu, mu)
        assert d != 0 and math.isfinite(d)
        h = 1e-5
        fd = (ferrers_p_series(nu, mu, h) - ferrers_p_series(nu, mu, -h)) / (2 * h)
        assert d == pytest.approx(fd, rel=1e-7)


def test_ferrers_pole():
    with pytest.raises(PoleError):
        legendre_p_at_zero(-3.0, 0.0)


# --- quadrature ---------------------------------------------------------------


def test_integrate_k1_moment_identities():
    # int x^mu K1 = 2^(mu-1) Gamma((mu+2)/2) Gamma(mu/2)
    for mu, expected in ((6, 384.0), (2, 2.0)):
        ident = 2 ** (mu - 1) * math.gamma((mu + 2) / 2) * math.gamma(mu / 2)
        assert ident == pytest.approx(expected)
        got = integrate(lambda x: x**mu * bessel_k(1, x) if x > 0 else 0.0, 0.0, math.inf)
        assert got == pytest.approx(expected, rel=1e-9)


def test_integrate_exponential_and_points():
    assert integrate(lambda x: math.exp(-x), 0.0, math.inf) == pytest.approx(1.0, rel=1e-12)
    assert integrate(abs, -1.0, 2.0, points=[0.0]) == pytest.approx(2.5, rel=1e-13)


def test_integrate_reports_failure():
    with pytest.raises(QuadratureError) as info:
        integrate(lambda x: 1.0 / x, 0.0, 1.0, QuadSpec(max_subdivisions=5))
    assert math.isfinite(info.value.error) or math.isnan(info.value.error) or info.value.error == math.inf


def test_quadspec_validation():
    with pytest.raises(ValueError):
        QuadSpec(rel_tol=0.0)
    with pytest.raises(ValueError):
        QuadSpec(max_subdivisions=0)
