"""Bohmian (SQM) dipole noise spectra of hydrogen eigenstates.

All spectra are the dimensionless ``S_nlm(omega)`` in units of
``e^2 a0^2 / omega0``, stored for ``omega > 0`` only; ``S(-omega) = S(omega)``
and ``S_{n,l,-m} = S_{n,l,m}``. States with ``m = 0`` have static
trajectories, so their whole spectrum is a delta line at ``omega = 0`` of
weight ``<x^2>``.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .bohm import TrajectoryEnsemble, worker_count
from .hydrogen import HydrogenState, radial_wavefunction, polar_factor, x_squared_expectation
from .numerics import (
    DEFAULT_QUAD,
    DomainError,
    QuadSpec,
    assoc_laguerre_old,
    bessel_k,
    gegenbauer,
    gegenbauer_at_one,
    integrate,
    laguerre_old_coefficients,
)


class _Divergent:
    """Sentinel for a moment whose integral does not converge."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "DIVERGENT"

    __str__ = __repr__

    def __reduce__(self):
        return (_Divergent, ())


DIVERGENT = _Divergent()


class SpectrumMethod(enum.Enum):
    ClosedForm = "closed"
    GeneralQuadrature = "quad"
    MonteCarlo = "mc"


UNITS_LABEL = "e2a02_per_omega0"


@dataclass
class SpectralFunction:
    """Sampled ``S(omega)`` on ``omega > 0`` plus an optional delta line at 0.

    For Monte Carlo spectra ``omega`` holds bin centres, ``bin_edges`` the edges
    and ``stderr`` per-bin standard errors. ``tail`` is ``(coefficient,
    exponent)`` of the ``omega -> inf`` power law when known; ``evaluator``
    lets consumers re-evaluate the exact curve off-grid.
    """

    state: HydrogenState
    omega: np.ndarray
    value: np.ndarray
    method: SpectrumMethod
    stderr: Optional[np.ndarray] = None
    delta_line: Optional[tuple[float, float]] = None
    bin_edges: Optional[np.ndarray] = None
    tail: Optional[tuple[float, float]] = None
    seed: Optional[int] = None
    evaluator: Optional[Callable[[float], float]] = field(default=None, repr=False)

    def metadata(self) -> dict:
        meta = {"state": str(self.state), "method": self.method.value, "units": UNITS_LABEL}
        if self.seed is not None:
            meta["seed"] = self.seed
        if self.tail is not None:
            meta["tail_coefficient"] = self.tail[0]
            meta["tail_exponent"] = self.tail[1]
        if self.delta_line is not None:
            meta["delta_omega"] = self.delta_line[0]
            meta["delta_weight"] = self.delta_line[1]
        return meta


def _require_positive_m(state: HydrogenState):
    if state.m == 0:
        raise DomainError(f"{state.label} has m = 0: its spectrum is a delta line at omega = 0")
    if state.m < 0:
        raise DomainError(f"use m > 0; S_(n,l,-m) = S_(n,l,m) for {state.label}")


# ---------------------------------------------------------------------------
# coefficients
# ---------------------------------------------------------------------------


def _dfact(k: int) -> int:
    # (2j-1)!! style double factorial with (-1)!! = 1
    out = 1
    while k > 1:
        out *= k
        k -= 2
    return out


def coefficient_c(state: HydrogenState) -> Fraction:
    """``c_nlm = n^4 (2l+1) (l-m)! [(2m-1)!!]^2 (n-l-1)! / (2nm (l+m)! [(n+l)!]^3)``."""
    n, l, m = state.n, state.l, state.m
    if m <= 0:
        raise DomainError("c_nlm needs m > 0")
    num = n**4 * (2 * l + 1) * math.factorial(l - m) * _dfact(2 * m - 1) ** 2 * math.factorial(n - l - 1)
    den = 2 * n * m * math.factorial(l + m) * math.factorial(n + l) ** 3
    return Fraction(num, den)


def z_param(n: int, m: int, omega):
    """Bessel argument ``z_{n,m}(omega) = (2/n) sqrt(m / omega)``."""
    return (2.0 / n) * np.sqrt(m / np.asarray(omega, dtype=float))


def family_coefficient(n: int) -> Fraction:
    """``c_n`` of the ``(n, n-1, n-1)`` family: ``S = c_n omega^-(n+2) z K1(z)``."""
    if n < 2:
        raise DomainError("the (n, n-1, n-1) family needs n >= 2")
    return (Fraction(1, 8) * Fraction(2, n) ** (2 * n) * (n - 1) ** (n + 1)
            * Fraction(_dfact(2 * n - 3) ** 2, 2 * n * math.factorial(2 * n - 2) ** 2))


def family_bar_coefficient(n: int) -> Fraction:
    """``cbar_n`` of the ``(n, n-1, n-2)`` family: ``S = cbar_n omega^-(n+1) z^2 K2(z)``.

    Obtained by evaluating the general integral for ``l - m = 1``, where the
    Laguerre factor is the constant ``-(2n-1)!`` and
    ``int_z^inf e^-rho rho sqrt(rho^2 - z^2) d rho = z^2 K2(z)``.
    """
    if n < 3:
        raise DomainError("the (n, n-1, n-2) family needs n >= 3")
    c = coefficient_c(HydrogenState(n, n - 1, n - 2))
    return (c / 128 * (2 * n - 3) ** 2 * math.factorial(2 * n - 1) ** 2
            * Fraction(2, n) ** (2 * (n + 1)) * (n - 2) ** (n + 1))


def family_bar_coefficient_literature(n: int) -> Fraction:
    """``c_{n,n-1,n-2} [(2n-1)! (2n-3)!!]^2 4(n-2) / (128 n^2)``: the literature expression.

    Kept for comparison only; it does not reproduce the general integral.
    """
    c = coefficient_c(HydrogenState(n, n - 1, n - 2))
    return c * (math.factorial(2 * n - 1) * _dfact(2 * n - 3)) ** 2 * Fraction(4 * (n - 2), 128 * n * n)


# ---------------------------------------------------------------------------
# general quadrature formula
# ---------------------------------------------------------------------------

_TAIL_CUT = 800.0


def spectral_general(state: HydrogenState, omega: float, spec: QuadSpec = DEFAULT_QUAD) -> float:
    """``S_nlm(omega)`` from the single-integral representation.

    ``(c/128) z^(2(3+m)) int_z^inf e^-rho rho^(2(l-m)) [L_{n+l}^{2l+1}(rho)]^2 C(xi)^2 / xi d rho``
    with ``xi = sqrt(1 - (z/rho)^2)`` and ``C = C_{l-m}^{(m+1/2)}``, evaluated
    after ``rho = z cosh u`` which turns ``d rho / xi`` into ``z cosh u du``.
    """
    _require_positive_m(state)
    if not omega > 0:
        raise DomainError("omega must be positive")
    n, l, m = state.n, state.l, state.m
    z = float(z_param(n, m, omega))
    alpha = m + 0.5

    def f(u):
        ch = math.cosh(u)
        rho = z * ch
        lag = assoc_laguerre_old(n + l, 2 * l + 1, rho)
        geg = gegenbauer(l - m, alpha, math.tanh(u))
        sh = math.sinh(0.5 * u)
        return math.exp(-2.0 * z * sh * sh) * rho ** (2 * (l - m)) * lag * lag * geg * geg * rho

    umax = math.acosh(1.0 + _TAIL_CUT / z)
    marks = [math.acosh(1.0 + d / z) for d in (0.5, 2.0, 8.0, 32.0, 128.0) if d < _TAIL_CUT]
    integral = integrate(f, 0.0, umax, spec, points=marks)
    pref = float(coefficient_c(state)) / 128.0
    # z^(2(3+m)) e^-z, in logs to survive large z
    return pref * math.exp(2 * (3 + m) * math.log(z) - z) * integral


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------


def closed_form_supported(state: HydrogenState) -> bool:
    n, l, m = state.n, state.l, state.m
    if m <= 0:
        return False
    return (l == n - 1 and m == n - 1) or (l == n - 1 and m == n - 2) or (n, l, m) == (3, 1, 1)


def spectral_closed(state: HydrogenState, omega: float) -> float:
    """Bessel-K closed forms for ``|211>, |322>, |321>, |311>`` and the two families."""
    n, l, m = state.n, state.l, state.m
    if not closed_form_supported(state):
        raise DomainError(f"no closed form for {state.label}; use spectral_general")
    if not omega > 0:
        raise DomainError("omega must be positive")
    z = float(z_param(n, m, omega))
    w = 1.0 / omega
    if (n, l, m) == (2, 1, 1):
        return w**4 * z * bessel_k(1, z) / 128.0
    if (n, l, m) == (3, 2, 2):
        return w**5 * z * bessel_k(1, z) / 2187.0
    if (n, l, m) == (3, 2, 1):
        return w**4 * z * (2.0 * bessel_k(1, z) + z * bessel_k(0, z)) / 3888.0
    if (n, l, m) == (3, 1, 1):
        k0, k1 = bessel_k(0, z), bessel_k(1, z)
        return w**4 * z * ((5.0 / 8.0 + z * z / 16.0) * k1 - 7.0 / 16.0 * z * k0) / 243.0
    if m == n - 1:
        return float(family_coefficient(n)) * w ** (n + 2) * z * bessel_k(1, z)
    return float(family_bar_coefficient(n)) * w ** (n + 1) * z * z * bessel_k(2, z)


# ---------------------------------------------------------------------------
# asymptotics and moments
# ---------------------------------------------------------------------------


def _laguerre_moment_exact(n: int, l: int, m: int) -> Fraction:
    # int_0^inf e^-rho rho^(2(l-m)) [L_{n+l}^{2l+1}]^2 d rho, exactly
    c = laguerre_old_coefficients(n + l, 2 * l + 1)
    s = 2 * (l - m)
    total = 0
    for i, a in enumerate(c):
        for j, b in enumerate(c):
            total += a * b * math.factorial(i + j + s)
    return Fraction(total)


def asymptotic_coeff_sqm_exact(state: HydrogenState) -> Fraction:
    """Exact rational ``C_nlm`` in ``S -> C_nlm omega^-(3+m)``."""
    _require_positive_m(state)
    n, l, m = state.n, state.l, state.m
    return (coefficient_c(state) / 128 * gegenbauer_at_one(l, m) ** 2
            * Fraction(4 * m, n * n) ** (3 + m) * _laguerre_moment_exact(n, l, m))


def asymptotic_coeff_sqm(state: HydrogenState, spec: QuadSpec = DEFAULT_QUAD) -> float:
    """``C_nlm = (c/128) [C_{l-m}^{(m+1/2)}(1)]^2 (4m/n^2)^(3+m) int_0^inf e^-rho rho^(2(l-m)) L^2 d rho``."""
    _require_positive_m(state)
    n, l, m = state.n, state.l, state.m

    def f(rho):
        lag = assoc_laguerre_old(n + l, 2 * l + 1, rho)
        return math.exp(-rho) * rho ** (2 * (l - m)) * lag * lag

    integral = integrate(f, 0.0, math.inf, spec)
    pref = float(coefficient_c(state)) / 128.0 * float(gegenbauer_at_one(l, m)) ** 2 * (4.0 * m / n**2) ** (3 + m)
    return pref * integral


def tail_exponent_sqm(state: HydrogenState) -> int:
    return 3 + abs(state.m)


def _moment_quadrature(state: HydrogenState, k: int, spec: QuadSpec) -> float:
    # gamma^(k) = (m^k / 2) <rho_cyl^(2 - 2k)> with rho_cyl = r sin(theta)
    p = 2 - 2 * k
    m = abs(state.m)
    rad = integrate(lambda r: radial_wavefunction(state, r) ** 2 * r ** (2 + p), 0.0, math.inf, spec)
    ang = integrate(lambda t: 2 * math.pi * polar_factor(state, t) ** 2 * math.sin(t) ** (1 + p), 0.0, math.pi, spec)
    return 0.5 * m**k * rad * ang


def moment_sqm(state: HydrogenState, k: int, spec: QuadSpec = DEFAULT_QUAD):
    """``gamma^(k) = int omega^k S d omega`` over the whole line.

    ``k = 0`` gives ``<x^2>``, ``k = 2`` gives ``m / (2 n^3)`` (units
    ``e^4/(mu a0)``), odd ``k`` gives exactly 0 and ``k >= 2 + m`` is
    :data:`DIVERGENT`. Other even ``k`` are computed by quadrature.
    """
    if k < 0:
        raise DomainError("k must be >= 0")
    if k % 2:
        return Fraction(0)
    m = abs(state.m)
    if k == 0:
        return x_squared_expectation(state)
    if m == 0:
        return Fraction(0)
    if k >= 2 + m:
        return DIVERGENT
    if k == 2:
        return Fraction(m, 2 * state.n**3)
    return _moment_quadrature(state, k, spec)


# ---------------------------------------------------------------------------
# spectra on grids
# ---------------------------------------------------------------------------


def delta_spectrum(state: HydrogenState, method: SpectrumMethod = SpectrumMethod.ClosedForm) -> SpectralFunction:
    """The ``m = 0`` spectrum: a single line at 0 with weight ``<x^2>``."""
    return SpectralFunction(state, np.empty(0), np.empty(0), method,
                            delta_line=(0.0, float(x_squared_expectation(state))))


def build_spectrum(
    state: HydrogenState,
    omega: Sequence[float],
    method: SpectrumMethod = SpectrumMethod.ClosedForm,
    spec: QuadSpec = DEFAULT_QUAD,
) -> SpectralFunction:
    """Evaluate a deterministic spectrum (closed form or quadrature) on a grid."""
    if state.m == 0:
        return delta_spectrum(state, method)
    _require_positive_m(state)
    if method is SpectrumMethod.ClosedForm:
        fn = spectral_closed
        if not closed_form_supported(state):
            raise DomainError(f"no closed form for {state.label}; use spectral_general")
    elif method is SpectrumMethod.GeneralQuadrature:
        def fn(s, w):
            return spectral_general(s, w, spec)
    else:
        raise DomainError("Monte Carlo spectra come from spectral_mc")
    grid = np.asarray(omega, dtype=float)
    vals = np.array([fn(state, w) for w in grid])
    tail = (float(asymptotic_coeff_sqm_exact(state)), float(tail_exponent_sqm(state)))
    return SpectralFunction(state, grid, vals, method, tail=tail, evaluator=lambda w: fn(state, w))


def _chunk_bounds(size: int, chunk: int):
    return [(s, min(s + chunk, size)) for s in range(0, size, chunk)]


def spectral_mc(
    state: HydrogenState,
    omega_grid: Sequence[float],
    ensemble: TrajectoryEnsemble,
    workers: int | None = None,
) -> SpectralFunction:
    """Weighted-histogram estimate of ``S(omega)`` from a QEH ensemble.

    Each member contributes weight ``rho_cyl^2 / 4`` at its orbit frequency
    ``Omega = m / rho_cyl^2``; ``omega_grid`` are the bin edges. Partial sums
    are formed per ensemble chunk and reduced in chunk order.
    """
    if state.m == 0:
        return delta_spectrum(state, SpectrumMethod.MonteCarlo)
    _require_positive_m(state)
    if ensemble.state.n != state.n or ensemble.state.l != state.l or abs(ensemble.state.m) != state.m:
        raise DomainError("ensemble was drawn for a different state")
    edges = np.asarray(omega_grid, dtype=float)
    if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0):
        raise DomainError("omega_grid must be strictly increasing with >= 2 edges")
    weights = 0.25 * ensemble.cylindrical_radius_sq
    freqs = state.m / ensemble.cylindrical_radius_sq

    def partial(bounds):
        lo, hi = bounds
        w = weights[lo:hi]
        f = freqs[lo:hi]
        s1, _ = np.histogram(f, bins=edges, weights=w)
        s2, _ = np.histogram(f, bins=edges, weights=w * w)
        cnt, _ = np.histogram(f, bins=edges)
        return s1, s2, cnt

    chunks = _chunk_bounds(ensemble.size, ensemble.chunk_size)
    nw = worker_count(workers)
    if nw == 1 or len(chunks) == 1:
        parts = [partial(b) for b in chunks]
    else:
        with ThreadPoolExecutor(max_workers=nw) as pool:
            parts = list(pool.map(partial, chunks))
    s1 = np.zeros(len(edges) - 1)
    s2 = np.zeros(len(edges) - 1)
    cnt = np.zeros(len(edges) - 1, dtype=np.int64)
    for a, b, c in parts:
        s1 += a
        s2 += b
        cnt += c
    size = ensemble.size
    width = np.diff(edges)
    mean = s1 / size
    var = np.maximum(s2 / size - mean * mean, 0.0) / max(size - 1, 1)
    value = mean / width
    stderr = np.sqrt(var) / width
    stderr[cnt == 0] = np.inf
    centres = np.sqrt(edges[:-1] * edges[1:]) if edges[0] > 0 else 0.5 * (edges[:-1] + edges[1:])
    tail = (float(asymptotic_coeff_sqm_exact(state)), float(tail_exponent_sqm(state)))
    return SpectralFunction(state, centres, value, SpectrumMethod.MonteCarlo, stderr=stderr,
                            bin_edges=edges, tail=tail, seed=ensemble.seed)


def bin_average(state: HydrogenState, edges: Sequence[float], spec: QuadSpec = DEFAULT_QUAD) -> np.ndarray:
    """Exact bin averages of ``spectral_general`` over consecutive ``edges``."""
    edges = np.asarray(edges, dtype=float)
    out = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        out.append(integrate(lambda w: spectral_general(state, w, spec), lo, hi, QuadSpec(1e-8, 1e-16)) / (hi - lo))
    return np.array(out)


# ---------------------------------------------------------------------------
# correlation function
# ---------------------------------------------------------------------------


def correlation_sqm(state: HydrogenState, tau_grid: Sequence[float], ensemble: TrajectoryEnsemble,
                    workers: int | None = None) -> np.ndarray:
    """``Phi(tau) = E[(1/2) rho_cyl^2 cos(Omega tau)]`` (phi0 averaged analytically).

    Returns an array of shape ``(len(tau_grid), 2)`` with columns ``tau, Phi``.
    """
    taus = np.asarray(tau_grid, dtype=float)
    half_sq = 0.5 * ensemble.cylindrical_radius_sq
    freqs = ensemble.omega if state.m != 0 else np.zeros(ensemble.size)

    def partial(bounds):
        lo, hi = bounds
        return np.cos(np.outer(taus, freqs[lo:hi])) @ half_sq[lo:hi]

    chunks = _chunk_bounds(ensemble.size, min(ensemble.chunk_size, 8192))
    nw = worker_count(workers)
    if nw == 1 or len(chunks) == 1:
        parts = [partial(b) for b in chunks]
    else:
        with ThreadPoolExecutor(max_workers=nw) as pool:
            parts = list(pool.map(partial, chunks))
    total = np.zeros(len(taus))
    for p in parts:
        total += p
    return np.column_stack([taus, total / ensemble.size])


def spectrum_from_correlation(tau: np.ndarray, phi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Hann-windowed cosine transform ``(1/pi) int_0^T w Phi cos(omega tau) d tau`` via FFT.

    ``tau`` must be a uniform grid starting at 0. Only frequencies below a
    quarter of the Nyquist frequency are returned.
    """
    tau = np.asarray(tau, dtype=float)
    phi = np.asarray(phi, dtype=float)
    dt = tau[1] - tau[0]
    if abs(tau[0]) > 0 or np.any(np.abs(np.diff(tau) - dt) > 1e-9 * dt):
        raise DomainError("tau must be a uniform grid starting at 0")
    big_t = tau[-1]
    win = np.cos(0.5 * math.pi * tau / big_t) ** 2
    g = win * phi
    g[0] *= 0.5  # trapezoid end weight; the far end is zeroed by the window
    npad = 8 * len(g)
    spec = np.fft.rfft(g, n=npad)
    omega = 2.0 * math.pi * np.fft.rfftfreq(npad, d=dt)
    s = dt / math.pi * spec.real
    keep = omega < 0.25 * math.pi / dt
    return omega[keep], s[keep]
