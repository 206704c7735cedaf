"""Special functions and quadrature primitives.

Everything here follows the conventions used for the hydrogen problem:

* associated Laguerre polynomials use the *old* (unnormalized Rodrigues)
  convention ``L_q^p = (d/dx)^p L_q`` with ``L_q = e^x (d/dx)^q (x^q e^-x)``;
* associated Legendre functions carry no Condon-Shortley phase, so
  ``P_1^1(x) = +sqrt(1 - x**2)``;
* Legendre functions of non-integer degree are the Ferrers functions
  (on the cut ``-1 < x < 1``).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import integrate as _sp_integrate
from scipy import special as _sp_special

EULER_GAMMA = 0.57721566490153286060651209008240243


class DomainError(ValueError):
    """Argument outside the mathematical domain of a function."""


class PoleError(DomainError):
    """A Gamma-function argument hit a non-positive integer."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message: str, estimate: float, error: float):
        super().__init__(f"{message} (estimate={estimate!r}, error={error:.3e})")
        self.estimate = estimate
        self.error = error


class PolynomialConvention(enum.Enum):
    OldLaguerre = "old-laguerre"


LAGUERRE_CONVENTION = PolynomialConvention.OldLaguerre


@dataclass(frozen=True)
class QuadSpec:
    """Tolerances for :func:`integrate`."""

    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if not self.abs_tol >= 0:
            raise ValueError("abs_tol must be non-negative")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


DEFAULT_QUAD = QuadSpec()


# ---------------------------------------------------------------------------
# orthogonal polynomials
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def laguerre_old_coefficients(q: int, p: int) -> tuple[int, ...]:
    """Exact integer power-series coefficients of the old-convention ``L_q^p``.

    ``L_q^p(x) = sum_j c_j x**j``; uses
    ``L_q^p = (-1)**p q! Lmod_{q-p}^{(p)}`` with the modern polynomial
    ``Lmod_k^{(a)}(x) = sum_j (-1)**j binom(k + a, k - j) x**j / j!``.
    """
    if q < 0 or p < 0 or p > q:
        raise DomainError(f"need q >= p >= 0, got q={q}, p={p}")
    k = q - p
    sign = -1 if p % 2 else 1
    coeffs = []
    for j in range(k + 1):
        c = Fraction(math.factorial(q) * math.comb(q, k - j), math.factorial(j))
        assert c.denominator == 1
        coeffs.append(sign * (-1) ** j * c.numerator)
    return tuple(coeffs)


def _modern_laguerre(k: int, alpha: float, x):
    """Normalized generalized Laguerre polynomial by upward recurrence."""
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if k == 0:
        return prev
    cur = 1.0 + alpha - x
    for j in range(1, k):
        prev, cur = cur, ((2 * j + 1 + alpha - x) * cur - (j + alpha) * prev) / (j + 1)
    return cur


def assoc_laguerre_old(q: int, p: int, x):
    """Associated Laguerre polynomial ``L_q^p(x)`` in the old convention.

    Related to the modern polynomial by ``L_q^p = (-1)**p q! Lmod_{q-p}^{(p)}``.
    Accepts scalars or arrays.
    """
    if q < 0 or p < 0 or p > q:
        raise DomainError(f"need q >= p >= 0, got q={q}, p={p}")
    val = (-1) ** p * math.factorial(q) * _modern_laguerre(q - p, p, x)
    return float(val) if np.ndim(val) == 0 else val


def assoc_legendre(l: int, m: int, x):
    """Associated Legendre function ``P_l^m(x)`` without Condon-Shortley phase."""
    if l < 0 or m < 0 or m > l:
        raise DomainError(f"need 0 <= m <= l, got l={l}, m={m}")
    xa = np.asarray(x, dtype=float)
    if np.any(np.abs(xa) > 1.0):
        raise DomainError("assoc_legendre needs |x| <= 1")
    s = np.sqrt(np.clip((1.0 - xa) * (1.0 + xa), 0.0, None))
    pmm = np.ones_like(xa)
    for i in range(1, m + 1):
        pmm = pmm * (2 * i - 1) * s
    if l == m:
        out = pmm
    else:
        pm1 = xa * (2 * m + 1) * pmm
        if l == m + 1:
            out = pm1
        else:
            a, b = pmm, pm1
            for ll in range(m + 2, l + 1):
                a, b = b, ((2 * ll - 1) * xa * b - (ll + m - 1) * a) / (ll - m)
            out = b
    return float(out) if np.ndim(out) == 0 else out


@lru_cache(maxsize=None)
def legendre_derivative_coefficients(l: int, m: int) -> tuple[Fraction, ...]:
    """Exact power-series coefficients of ``(d/dx)^m P_l(x)``.

    ``P_l^m(x) = (1 - x**2)**(m/2) * D(x)`` with these coefficients for ``D``.
    """
    if l < 0 or m < 0 or m > l:
        raise DomainError(f"need 0 <= m <= l, got l={l}, m={m}")
    # Rodrigues: P_l = 1/(2^l l!) d^l/dx^l (x^2 - 1)^l
    base = [Fraction(0)] * (2 * l + 1)
    for j in range(l + 1):
        base[2 * j] = Fraction(math.comb(l, j) * (-1) ** (l - j))
    coeffs = base
    for _ in range(l + m):
        coeffs = [i * c for i, c in enumerate(coeffs)][1:] or [Fraction(0)]
    scale = Fraction(1, 2**l * math.factorial(l))
    return tuple(c * scale for c in coeffs)


def gegenbauer(k: int, alpha: float, x):
    """Gegenbauer (ultraspherical) polynomial ``C_k^{(alpha)}(x)``."""
    if k < 0:
        raise DomainError("gegenbauer degree must be >= 0")
    xa = np.asarray(x, dtype=float)
    prev = np.ones_like(xa)
    if k == 0:
        out = prev
    else:
        cur = 2.0 * alpha * xa
        for j in range(2, k + 1):
            prev, cur = cur, (2.0 * xa * (j + alpha - 1) * cur - (j + 2 * alpha - 2) * prev) / j
        out = cur
    return float(out) if np.ndim(out) == 0 else out


def gegenbauer_at_one(l: int, m: int) -> Fraction:
    """``C_{l-m}^{(m+1/2)}(1) = (l+m)! / ((2m)! (l-m)!)``."""
    return Fraction(math.factorial(l + m), math.factorial(2 * m) * math.factorial(l - m))


# ---------------------------------------------------------------------------
# modified Bessel function of the second kind
# ---------------------------------------------------------------------------

_SERIES_CROSSOVER = 2.0
_UNDERFLOW_Z = 705.0


def _k01_series(z: float) -> tuple[float, float]:
    # power series about z = 0
    t = 0.25 * z * z
    lz = math.log(0.5 * z)
    term0 = 1.0  # t^k / (k!)^2
    term1 = 1.0  # t^k / (k! (k+1)!)
    i0 = 0.0
    i1 = 0.0
    s0 = 0.0
    s1 = 0.0
    psi_k1 = -EULER_GAMMA  # psi(k+1)
    k = 0
    while True:
        psi_k2 = psi_k1 + 1.0 / (k + 1)  # psi(k+2)
        i0 += term0
        i1 += term1
        s0 += psi_k1 * term0
        s1 += (psi_k1 + psi_k2) * term1
        k += 1
        term0 *= t / (k * k)
        term1 *= t / (k * (k + 1))
        psi_k1 = psi_k2
        if term0 < 1e-18 * abs(i0) and k > 2:
            break
    i1 *= 0.5 * z
    k0 = -lz * i0 + s0
    k1 = 1.0 / z + lz * i1 - 0.25 * z * s1
    return k0, k1


def _k01_scaled_cf(z: float) -> tuple[float, float]:
    # Steed's continued fraction (Temme) for order 0; returns e^z K0, e^z K1
    b = 2.0 * (1.0 + z)
    d = 1.0 / b
    h = delh = d
    q1, q2 = 0.0, 1.0
    a1 = 0.25
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, 100000):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < 1e-17:
            break
    else:  # pragma: no cover
        raise RuntimeError("Bessel continued fraction did not converge")
    h = a1 * h
    k0 = math.sqrt(math.pi / (2.0 * z)) / s
    k1 = k0 * (z + 0.5 - h) / z
    return k0, k1


def bessel_k_scaled(nu: int, z: float) -> float:
    """``exp(z) * K_nu(z)`` for integer order ``nu >= 0`` and ``z > 0``."""
    nu = abs(int(nu))
    if not z > 0:
        raise DomainError(f"K_nu(z) diverges for z <= 0 (z={z})")
    if z <= _SERIES_CROSSOVER:
        k0, k1 = _k01_series(z)
        ez = math.exp(z)
        k0, k1 = k0 * ez, k1 * ez
    else:
        k0, k1 = _k01_scaled_cf(z)
    if nu == 0:
        return k0
    for j in range(1, nu):
        k0, k1 = k1, k0 + (2.0 * j / z) * k1
        if math.isinf(k1):
            raise OverflowError(f"K_{nu}({z}) overflows")
    return k1


def bessel_k(nu: int, z: float) -> float:
    """Modified Bessel function of the second kind ``K_nu(z)``, integer order.

    Power series up to ``z = 2``, Steed's continued fraction beyond, then upward
    recurrence in the order. Returns exactly ``0.0`` once ``exp(-z)`` underflows
    (``z > 705``).
    """
    if not z > 0:
        raise DomainError(f"K_nu(z) diverges for z <= 0 (z={z})")
    if z > _UNDERFLOW_Z:
        return 0.0
    return bessel_k_scaled(nu, z) * math.exp(-z)


def bessel_k_small_z(nu: int, z: float) -> float:
    """Leading small-argument form of ``K_nu``: ``Gamma(nu)/2 (z/2)^-nu`` or ``-ln z``."""
    if nu == 0:
        return -math.log(z)
    return 0.5 * math.gamma(nu) * (0.5 * z) ** (-nu)


# ---------------------------------------------------------------------------
# Ferrers functions at the origin
# ---------------------------------------------------------------------------


def _is_nonpositive_integer(x: float, tol: float = 1e-12) -> bool:
    return x <= tol and abs(x - round(x)) < tol


def _sin_half_pi(x: float) -> float:
    # sin(pi x / 2), exact at integer x
    if abs(x - round(x)) < 1e-12:
        return (0.0, 1.0, 0.0, -1.0)[int(round(x)) % 4]
    return math.sin(0.5 * math.pi * x)


def _cos_half_pi(x: float) -> float:
    return _sin_half_pi(x + 1.0)


def legendre_p_at_zero(nu: float, mu: float) -> float:
    """Ferrers function ``P_nu^mu(0)``."""
    num = 0.5 * (nu + mu + 1.0)
    if _is_nonpositive_integer(num):
        raise PoleError(f"Gamma pole at {num} for P_{nu}^{mu}(0)")
    c = _cos_half_pi(nu + mu)
    if c == 0.0:
        return 0.0
    return 2.0**mu / math.sqrt(math.pi) * c * math.gamma(num) * _sp_special.rgamma(0.5 * (nu - mu) + 1.0)


def legendre_p_deriv_at_zero(nu: float, mu: float) -> float:
    """Derivative at ``x = 0`` of the Ferrers function ``P_nu^mu(x)``.

    ``2^(mu+1)/sqrt(pi) sin(pi (nu+mu)/2) Gamma((nu+mu)/2 + 1) / Gamma((nu-mu)/2 + 1/2)``.
    """
    num = 0.5 * (nu + mu) + 1.0
    if _is_nonpositive_integer(num):
        raise PoleError(f"Gamma pole at {num} for dP_{nu}^{mu}/dx(0)")
    s = _sin_half_pi(nu + mu)
    if s == 0.0:
        return 0.0
    return 2.0 ** (mu + 1.0) / math.sqrt(math.pi) * s * math.gamma(num) * _sp_special.rgamma(0.5 * (nu - mu) + 0.5)


def ferrers_p_series(nu: float, mu: float, x: float) -> float:
    """Ferrers ``P_nu^mu(x)`` from its hypergeometric series, ``-1 < x < 1``.

    ``((1+x)/(1-x))^(mu/2) / Gamma(1-mu) * 2F1(-nu, nu+1; 1-mu; (1-x)/2)``
    """
    if not -1.0 < x < 1.0:
        raise DomainError("ferrers_p_series needs -1 < x < 1")
    pref = ((1.0 + x) / (1.0 - x)) ** (0.5 * mu) * _sp_special.rgamma(1.0 - mu)
    return float(pref * _sp_special.hyp2f1(-nu, nu + 1.0, 1.0 - mu, 0.5 * (1.0 - x)))


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    spec: QuadSpec = DEFAULT_QUAD,
    points: Sequence[float] | None = None,
) -> float:
    """Adaptive Gauss-Kronrod quadrature of ``f`` over ``[a, b]``.

    ``b`` may be ``math.inf``; the semi-infinite range is mapped onto a finite
    one. Break ``points`` split the range into independently integrated pieces.
    Raises :class:`QuadratureError` when the error estimate exceeds
    ``max(abs_tol, rel_tol * |result|)``.
    """
    if points:
        edges = [a] + sorted(p for p in points if a < p < b) + [b]
        return math.fsum(integrate(f, lo, hi, spec) for lo, hi in zip(edges[:-1], edges[1:]))
    if a == b:
        return 0.0
    res = _sp_integrate.quad(
        f,
        a,
        b,
        epsabs=spec.abs_tol,
        epsrel=max(spec.rel_tol, 5e-14),
        limit=spec.max_subdivisions,
        full_output=1,
    )
    value, err = res[0], res[1]
    ier = 0 if len(res) < 4 else 1
    tol = max(spec.abs_tol, spec.rel_tol * abs(value))
    if not math.isfinite(value) or (ier and err > tol) or err > 10 * tol:
        raise QuadratureError(f"quadrature on [{a}, {b}] did not converge", value, err)
    return value
