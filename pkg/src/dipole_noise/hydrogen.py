"""Hydrogen bound states in units hbar = mu = e = a0 = 1 (so omega0 = 1)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .numerics import (
    DEFAULT_QUAD,
    DomainError,
    QuadSpec,
    _modern_laguerre,
    assoc_laguerre_old,
    assoc_legendre,
    integrate,
    legendre_derivative_coefficients,
)


@dataclass(frozen=True)
class UnitSystem:
    a0: float = 1.0
    mu: float = 1.0
    e: float = 1.0
    hbar: float = 1.0

    @property
    def omega0(self) -> float:
        return self.hbar / (self.mu * self.a0**2)


UNITS = UnitSystem()


@dataclass(frozen=True, order=True)
class HydrogenState:
    """Bound state ``|n l m>``."""

    n: int
    l: int
    m: int

    def __post_init__(self):
        for name in ("n", "l", "m"):
            if not isinstance(getattr(self, name), (int, np.integer)):
                raise DomainError(f"{name} must be an integer")
        if self.n < 1:
            raise DomainError(f"n must be >= 1, got {self.n}")
        if not 0 <= self.l <= self.n - 1:
            raise DomainError(f"l must lie in 0..n-1, got l={self.l} for n={self.n}")
        if abs(self.m) > self.l:
            raise DomainError(f"|m| must be <= l, got m={self.m} for l={self.l}")

    @classmethod
    def parse(cls, text: str) -> "HydrogenState":
        """Build a state from ``"n,l,m"``."""
        parts = text.replace(" ", "").split(",")
        if len(parts) != 3:
            raise DomainError(f"expected 'n,l,m', got {text!r}")
        try:
            n, l, m = (int(p) for p in parts)
        except ValueError as exc:
            raise DomainError(f"expected integers in {text!r}") from exc
        return cls(n, l, m)

    def __str__(self) -> str:
        return f"{self.n},{self.l},{self.m}"

    @property
    def label(self) -> str:
        return f"|{self.n}{self.l}{self.m}>"


def energy(n: int) -> float:
    """Coulomb level ``E_n = -1/(2 n^2)``."""
    if n < 1:
        raise DomainError("n must be >= 1")
    return -0.5 / (n * n)


def transition_frequency(bra: HydrogenState, ket: HydrogenState) -> float:
    """``omega_MN = E_M - E_N`` for ``M = bra``, ``N = ket``."""
    return energy(bra.n) - energy(ket.n)


# ---------------------------------------------------------------------------
# radial part
# ---------------------------------------------------------------------------


def _radial_log_norm(n: int, l: int) -> float:
    # log of sqrt((n-l-1)! / [(n+l)!]^3)
    return 0.5 * (math.lgamma(n - l) - 3.0 * math.lgamma(n + l + 1))


def radial_wavefunction(state: HydrogenState, r):
    """``chi_nl(r) = -(2/n^2) [(n-l-1)!/((n+l)!)^3]^(1/2) rho^l e^(-rho/2) L_{n+l}^{2l+1}(rho)``.

    ``rho = 2r/n`` and ``L`` is the old-convention Laguerre polynomial.
    """
    n, l = state.n, state.l
    rho = 2.0 * np.asarray(r, dtype=float) / n
    norm = math.exp(_radial_log_norm(n, l))
    val = -(2.0 / n**2) * norm * rho**l * np.exp(-0.5 * rho) * assoc_laguerre_old(n + l, 2 * l + 1, rho)
    return float(val) if np.ndim(val) == 0 else val


def radial_derivatives(state: HydrogenState, r) -> tuple:
    """``(chi, chi', chi'')`` in ``r``, using ``d/dx L_k^(a) = -L_{k-1}^(a+1)``."""
    n, l = state.n, state.l
    k, a = n - l - 1, 2 * l + 1
    rho = 2.0 * np.asarray(r, dtype=float) / n
    # chi = A f(rho) exp(-rho/2) with f = rho^l Lmod_k^(a)(rho); A > 0 after the sign flip
    amp = (2.0 / n**2) * math.exp(0.5 * (math.lgamma(n - l) - math.lgamma(n + l + 1)))
    lag0 = _modern_laguerre(k, a, rho)
    lag1 = -_modern_laguerre(k - 1, a + 1, rho) if k >= 1 else np.zeros_like(rho)
    lag2 = _modern_laguerre(k - 2, a + 2, rho) if k >= 2 else np.zeros_like(rho)
    p0 = rho**l
    p1 = l * rho ** (l - 1) if l >= 1 else np.zeros_like(rho)
    p2 = l * (l - 1) * rho ** (l - 2) if l >= 2 else np.zeros_like(rho)
    f = p0 * lag0
    f1 = p1 * lag0 + p0 * lag1
    f2 = p2 * lag0 + 2 * p1 * lag1 + p0 * lag2
    e = np.exp(-0.5 * rho)
    s = 2.0 / n
    chi = amp * f * e
    d1 = amp * s * (f1 - 0.5 * f) * e
    d2 = amp * s * s * (f2 - f1 + 0.25 * f) * e
    return chi, d1, d2


def radial_cutoff(n: int) -> float:
    return 20.0 * n * n


def radial_integral(bra: HydrogenState, ket: HydrogenState, power: int, spec: QuadSpec = DEFAULT_QUAD) -> float:
    """``int_0^inf chi_bra(r) r^power chi_ket(r) dr`` by adaptive quadrature."""
    rmax = radial_cutoff(max(bra.n, ket.n))
    nodes = max(bra.n, ket.n)
    points = list(np.linspace(0.0, rmax, 4 * nodes + 2)[1:-1])

    def f(r):
        return radial_wavefunction(bra, r) * r**power * radial_wavefunction(ket, r)

    return integrate(f, 0.0, rmax, spec, points=points)


# ---------------------------------------------------------------------------
# angular part
# ---------------------------------------------------------------------------


def ylm_norm_sq(l: int, m: int) -> Fraction:
    """``N_lm^2 / (1/pi)``: ``N_lm^2 = (2l+1)/(4 pi) (l-|m|)!/(l+|m|)!``; returned without the ``1/pi``."""
    m = abs(m)
    return Fraction((2 * l + 1) * math.factorial(l - m), 4 * math.factorial(l + m))


def ylm_norm(l: int, m: int) -> float:
    return math.sqrt(float(ylm_norm_sq(l, m)) / math.pi)


def spherical_harmonic(l: int, m: int, theta, phi):
    """``Y_lm = N_lm P_l^|m|(cos theta) e^(i m phi)`` (no Condon-Shortley phase)."""
    return ylm_norm(l, m) * assoc_legendre(l, abs(m), np.cos(theta)) * np.exp(1j * m * np.asarray(phi))


def polar_factor(state: HydrogenState, theta):
    """Real polar amplitude ``N_lm P_l^|m|(cos theta)``."""
    return ylm_norm(state.l, state.m) * assoc_legendre(state.l, abs(state.m), np.cos(theta))


def _poly_mul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _one_minus_u2_pow(e: int):
    return [Fraction(math.comb(e, j) * (-1) ** j) if i == 2 * j else Fraction(0)
            for i in range(2 * e + 1) for j in [i // 2]]


def _integrate_poly_sym(coeffs) -> Fraction:
    # int_{-1}^{1} sum c_k u^k du
    return sum((c * Fraction(2, k + 1) for k, c in enumerate(coeffs) if k % 2 == 0), Fraction(0))


def dipole_allowed(lp: int, mp: int, l: int, m: int) -> bool:
    return abs(lp - l) == 1 and abs(mp - m) == 1


@lru_cache(maxsize=None)
def angular_element_squared(lp: int, mp: int, l: int, m: int) -> Fraction:
    """Exact ``|<l'm'| sin(theta) cos(phi) |lm>|^2``."""
    return _angular_element(lp, mp, l, m)[0]


@lru_cache(maxsize=None)
def _angular_element(lp: int, mp: int, l: int, m: int) -> tuple[Fraction, int]:
    if abs(mp) > lp or abs(m) > l or not dipole_allowed(lp, mp, l, m):
        return Fraction(0), 0
    a, b = abs(mp), abs(m)
    # (1-u^2)^((a+b+1)/2) is a polynomial because a + b is odd
    weight = _one_minus_u2_pow((a + b + 1) // 2)
    poly = _poly_mul(_poly_mul(legendre_derivative_coefficients(lp, a), legendre_derivative_coefficients(l, b)), weight)
    integral = _integrate_poly_sym(poly)
    # phi integral of e^{i(m-m')phi} cos(phi) is pi; N N' carries 1/pi
    sq = ylm_norm_sq(lp, mp) * ylm_norm_sq(l, m) * integral**2
    sign = (integral > 0) - (integral < 0)
    return sq, sign


def angular_element(lp: int, mp: int, l: int, m: int) -> float:
    """``<l'm'| sin(theta) cos(phi) |lm>`` (real in this phase convention)."""
    sq, sign = _angular_element(lp, mp, l, m)
    return sign * math.sqrt(sq)


def angular_bracket(l: int, m: int) -> Fraction:
    """``1 - <cos^2 theta>_lm``, i.e. ``2 <sin^2 theta cos^2 phi>_lm``."""
    first = Fraction((l + m + 1) * (l - m + 1), (2 * l + 1) * (2 * l + 3))
    second = Fraction((l + m) * (l - m), (2 * l + 1) * (2 * l - 1))
    return 1 - first - second


# ---------------------------------------------------------------------------
# observables
# ---------------------------------------------------------------------------


def density(state: HydrogenState, r, theta):
    """Quantum-equilibrium density ``|psi|^2`` (independent of phi), normalized over R^3."""
    return radial_wavefunction(state, r) ** 2 * polar_factor(state, theta) ** 2


def dipole_x_matrix_element(bra: HydrogenState, ket: HydrogenState, spec: QuadSpec = DEFAULT_QUAD) -> float:
    """``<n'l'm'| x |nlm>``; exactly zero unless ``l' = l +- 1`` and ``m' = m +- 1``."""
    if not dipole_allowed(bra.l, bra.m, ket.l, ket.m):
        return 0.0
    return radial_integral(bra, ket, 3, spec) * angular_element(bra.l, bra.m, ket.l, ket.m)


def r_squared_expectation(state: HydrogenState) -> Fraction:
    n, l = state.n, state.l
    return Fraction(n * n * (5 * n * n + 1 - 3 * l * (l + 1)), 2)


def x_squared_expectation(state: HydrogenState) -> Fraction:
    """``<x^2>_nlm = (n^2/4) [5n^2 + 1 - 3l(l+1)] * angular_bracket(l, m)`` in ``a0^2``."""
    return r_squared_expectation(state) * angular_bracket(state.l, state.m) / 2


def inverse_r_expectation(state: HydrogenState) -> Fraction:
    return Fraction(1, state.n**2)
