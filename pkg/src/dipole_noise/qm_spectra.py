"""Conventional-QM dipole correlation functions and line spectra.

The bound-bound part of ``S_N(omega)`` is a set of delta lines at
``+-omega_MN`` with weight ``|<M|x|N>|^2 / 2`` each. Continuum states are not
summed; their presence shows up as the completeness deficit of the line
weights and through the high-frequency tail law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import special as _sp_special

from .hydrogen import (
    HydrogenState,
    angular_bracket,
    angular_element_squared,
    dipole_x_matrix_element,
    polar_factor,
    radial_wavefunction,
    transition_frequency,
    x_squared_expectation,
)
from .numerics import (
    DEFAULT_QUAD,
    DomainError,
    QuadSpec,
    assoc_laguerre_old,
    ferrers_p_series,
    integrate,
    laguerre_old_coefficients,
    legendre_p_deriv_at_zero,
)


@dataclass
class LineSpectrum:
    """Bound-state line spectrum; ``lines`` has columns ``omega, weight`` (both signs)."""

    state: HydrogenState
    lines: np.ndarray
    n_max: int
    tail: Optional[tuple[float, float]] = None

    @property
    def total_weight(self) -> float:
        return float(math.fsum(self.lines[:, 1]))

    def metadata(self) -> dict:
        meta = {"state": str(self.state), "method": "lines", "units": "ea0_squared", "n_max": self.n_max}
        if self.tail is not None:
            meta["tail_coefficient"] = self.tail[0]
            meta["tail_exponent"] = self.tail[1]
        return meta


@lru_cache(maxsize=None)
def _matrix_element(bra: HydrogenState, ket: HydrogenState) -> float:
    return dipole_x_matrix_element(bra, ket)


def coupled_states(state: HydrogenState, n_max: int):
    """Bound states reachable from ``state`` by ``x``: ``l' = l +- 1``, ``m' = m +- 1``."""
    for n in range(1, n_max + 1):
        for lp in (state.l - 1, state.l + 1):
            if not 0 <= lp < n:
                continue
            for mp in (state.m - 1, state.m + 1):
                if abs(mp) <= lp:
                    yield HydrogenState(n, lp, mp)


def line_spectrum(state: HydrogenState, n_max: int, with_tail: bool = True) -> LineSpectrum:
    """All bound-bound dipole lines of ``state`` up to principal number ``n_max``."""
    if n_max < state.n:
        raise DomainError("n_max must be >= n")
    rows = []
    for other in coupled_states(state, n_max):
        d = _matrix_element(other, state)
        w = 0.5 * d * d
        om = transition_frequency(other, state)
        rows.append((om, w))
        rows.append((0.0 - om, w))  # no -0.0 for degenerate (same n) lines
    lines = np.array(sorted(rows), dtype=float).reshape(-1, 2)
    tail = tail_coeff_qm(state) if with_tail else None
    return LineSpectrum(state, lines, n_max, tail)


def correlation_qm(state: HydrogenState, tau, n_max: int):
    """Symmetrized ``Phi(tau) = sum_lines weight * cos(omega tau)`` over bound states."""
    spec = line_spectrum(state, n_max, with_tail=False)
    tau = np.asarray(tau, dtype=float)
    out = np.cos(np.multiply.outer(tau, spec.lines[:, 0])) @ spec.lines[:, 1]
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# moments
# ---------------------------------------------------------------------------


def moment_qm(state: HydrogenState, k: int) -> Fraction:
    """``gamma^(0) = <x^2>`` and ``gamma^(2) = <x^2 / r^3> = bracket / (2 n^2)``.

    ``gamma^(2) = -Phi''(0) = <xdot^2> = <p_x^2>`` and, from
    ``xddot = -x / r^3``, equals ``<x^2/r^3>``; units ``e^4 / (mu a0)``.
    """
    if k == 0:
        return x_squared_expectation(state)
    if k == 2:
        return angular_bracket(state.l, state.m) / (2 * state.n**2)
    raise DomainError("moment_qm supports k in {0, 2}")


def moment_qm_half_units(state: HydrogenState) -> Fraction:
    """``gamma^(2)_QM = bracket / n^2`` in units of ``e^4 / (2 mu a0)``.

    Same quantity as ``moment_qm(state, 2)``; the half unit is the one the
    semiclassical comparison ``n^2 gamma^(2) -> 1`` is stated in.
    """
    return angular_bracket(state.l, state.m) / state.n**2


def x2_over_r3_quadrature(state: HydrogenState, spec: QuadSpec = DEFAULT_QUAD) -> float:
    """``<x^2 / r^3>`` by quadrature: ``int chi^2 r dr`` times ``<sin^2 theta cos^2 phi>``."""
    radial = integrate(lambda r: radial_wavefunction(state, r) ** 2 * r, 0.0, math.inf, spec)
    # phi average of cos^2 is 1/2, times 2 pi from the phi integral
    polar = integrate(lambda t: math.pi * polar_factor(state, t) ** 2 * math.sin(t) ** 3, 0.0, math.pi, spec)
    return radial * polar


# ---------------------------------------------------------------------------
# high-frequency tail
# ---------------------------------------------------------------------------


def angular_factor(l: int, m: int, l_prime: int) -> Fraction:
    """``C_lm^(l') = sum_m' |<l'm'| sin(theta) cos(phi) |lm>|^2`` (exact)."""
    if l_prime < 0 or abs(l_prime - l) != 1:
        return Fraction(0)
    return sum((angular_element_squared(l_prime, mp, l, m) for mp in (m - 1, m + 1) if abs(mp) <= l_prime),
               Fraction(0))


def tail_exponent_qm(state: HydrogenState) -> float:
    return 4.0 + state.l + 0.5


def _checked_legendre_derivative(nu: float, mu: float) -> float:
    val = legendre_p_deriv_at_zero(nu, mu)
    h = 1e-4
    fd = (ferrers_p_series(nu, mu, h) - ferrers_p_series(nu, mu, -h)) / (2 * h)
    if abs(fd - val) > 1e-6 * max(abs(val), 1e-12):
        raise ArithmeticError(f"dP_{nu}^{mu}/dx(0): Gamma formula {val} vs finite difference {fd}")
    return val


def tail_coeff_qm(state: HydrogenState) -> tuple[float, float]:
    """``(C'_nlm, 4 + l + 1/2)`` of ``S^QM -> C'_nlm omega^-(4+l+1/2)``.

    ``C' = (2/n^4) sum_{l'=l+-1} C_lm^(l') (n-l-1)!/[(n+l)!]^3 [L_{n+l}^{2l+1}(0)]^2
    * {Gamma(l+l'+4) / (n sqrt(2)^(4+l+1/2)) * dP_{l+5/2}^{-(l'+1/2)}/dx(0)}^2``
    """
    n, l, m = state.n, state.l, state.m
    expo = tail_exponent_qm(state)
    lag0 = assoc_laguerre_old(n + l, 2 * l + 1, 0.0)
    radial = math.exp(math.lgamma(n - l) - 3 * math.lgamma(n + l + 1)) * lag0 * lag0
    total = 0.0
    for lp in (l - 1, l + 1):
        cf = angular_factor(l, m, lp)
        if cf == 0:
            continue
        dp = _checked_legendre_derivative(3 + l - 0.5, -(lp + 0.5))
        brace = math.gamma(l + lp + 4) / (n * math.sqrt(2.0) ** expo) * dp
        total += float(cf) * radial * brace * brace
    return float(2.0 / n**4 * total), expo


def _chi_power_coefficients(state: HydrogenState) -> list[float]:
    # chi_nl(r) = e^(-r/n) * sum_j a_j r^(l+j)
    n, l = state.n, state.l
    norm = -(2.0 / n**2) * math.exp(0.5 * (math.lgamma(n - l) - 3 * math.lgamma(n + l + 1)))
    return [norm * c * (2.0 / n) ** (l + j) for j, c in enumerate(laguerre_old_coefficients(n + l, 2 * l + 1))]


def tail_coeff_qm_free_particle(state: HydrogenState) -> float:
    """Large-omega limit of ``(1/2) sum_l' C_lm^(l') |int r^(5/2) chi_nl J_(l'+1/2)(kr) dr|^2 omega^(4+l+1/2)``.

    The radial Hankel transform is expanded in ``1/k``: the leading order
    vanishes for ``l' = l +- 1`` and the next one gives
    ``(a1 - a0/n) 2^(7/2+l) Gamma((l+l'+5)/2) / Gamma((l'-l-2)/2) k^-(9/2+l)``,
    ``k = sqrt(2 omega)``, where ``a0, a1`` are the two lowest power-series
    coefficients of ``chi_nl e^(r/n) / r^l``.
    """
    n, l, m = state.n, state.l, state.m
    a = _chi_power_coefficients(state) + [0.0]
    lead = a[1] - a[0] / n
    total = 0.0
    for lp in (l - 1, l + 1):
        cf = angular_factor(l, m, lp)
        if cf == 0:
            continue
        g = math.gamma(0.5 * (l + lp + 5)) * _sp_special.rgamma(0.5 * (lp - l - 2))
        amp = lead * 2.0 ** (3.5 + l) * g
        total += float(cf) * amp * amp
    return float(0.5 * total * 2.0 ** (-(4.5 + l)))
