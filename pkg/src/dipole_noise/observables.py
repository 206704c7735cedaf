"""Moments, cross sections, power-law fits and QM-vs-SQM comparison reports."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from .hydrogen import HydrogenState, x_squared_expectation
from .numerics import DEFAULT_QUAD, DomainError, QuadSpec, integrate
from .qm_spectra import (
    LineSpectrum,
    line_spectrum,
    moment_qm,
    moment_qm_half_units,
    tail_coeff_qm,
    tail_coeff_qm_free_particle,
    tail_exponent_qm,
    x2_over_r3_quadrature,
)
from .sqm_spectra import (
    DIVERGENT,
    SpectralFunction,
    SpectrumMethod,
    asymptotic_coeff_sqm_exact,
    build_spectrum,
    closed_form_supported,
    moment_sqm,
    tail_exponent_sqm,
)

ALPHA_QED = 1 / 137.035999
# tail model must match S to this relative accuracy where the analytic tail takes over
TAIL_MATCH_RTOL = 1e-8
SAMPLED_TAIL_RTOL = 0.02
_MAX_DECADES = 16


class CoverageError(DomainError):
    """Spectrum samples stop before the power-law tail is reached."""


# ---------------------------------------------------------------------------
# numeric moments
# ---------------------------------------------------------------------------


def _tail_integral(coeff: float, expo: float, k: int, omega: float) -> float:
    # int_omega^inf w^k C w^-p dw
    return coeff * omega ** (k + 1 - expo) / (expo - k - 1)


def _moment_from_evaluator(sf: SpectralFunction, k: int) -> float:
    fn = sf.evaluator
    coeff, expo = sf.tail
    spec = QuadSpec(rel_tol=1e-11, abs_tol=0.0)

    def g(u):
        w = math.exp(u)
        return w ** (k + 1) * fn(w)

    lo = float(np.min(sf.omega)) if sf.omega.size else 1.0
    hi = max(float(np.max(sf.omega)) if sf.omega.size else 1.0, 10.0)
    peak = max(abs(g(math.log(w))) for w in np.geomspace(lo, hi, 16))
    for _ in range(_MAX_DECADES):
        if abs(g(math.log(lo))) <= 1e-18 * peak:
            break
        lo /= 10.0
    total = 0.0
    u = math.log(lo)
    edges = np.arange(u, math.log(hi), math.log(10.0)).tolist() + [math.log(hi)]
    for a, b in zip(edges[:-1], edges[1:]):
        total += integrate(g, a, b, spec)
    for _ in range(_MAX_DECADES):
        model = coeff * hi ** (-expo)
        dev = abs(fn(hi) / model - 1.0)
        tail = _tail_integral(coeff, expo, k, hi)
        if dev <= TAIL_MATCH_RTOL or dev * tail <= 1e-10 * abs(total):
            return total + tail
        total += integrate(g, math.log(hi), math.log(10.0 * hi), spec)
        hi *= 10.0
    raise CoverageError(f"tail model not reached below omega = {hi:g}")


def _moment_from_samples(sf: SpectralFunction, k: int) -> float:
    coeff, expo = sf.tail
    if sf.bin_edges is not None:
        edges = sf.bin_edges
        top = edges[-1]
        body = math.fsum(sf.value * np.diff(edges) * sf.omega**k)
    else:
        w, s = sf.omega, sf.value
        if w.size < 2:
            raise CoverageError("need at least two samples")
        top = w[-1]
        body = float(np.trapezoid(w ** (k + 1) * s, np.log(w)))
    last = sf.value[-1]
    model = coeff * sf.omega[-1] ** (-expo)
    if not (last > 0 and abs(last / model - 1.0) <= SAMPLED_TAIL_RTOL):
        raise CoverageError(
            f"last sample at omega = {sf.omega[-1]:g} deviates from the tail model by "
            f"{abs(last / model - 1.0) if last > 0 else math.inf:.3g}; extend the grid"
        )
    return body + _tail_integral(coeff, expo, k, top)


def numeric_moment(spectrum: Union[SpectralFunction, LineSpectrum], k: int):
    """``gamma^(k) = int omega^k S d omega`` over the whole frequency line.

    Odd ``k`` gives exactly 0. Convergence is decided by the attached tail
    exponent ``p``: ``k >= p - 1`` returns :data:`DIVERGENT`. SQM spectra are
    integrated as ``2 int_0^inf`` in ``log omega`` (through the exact
    evaluator when present, extending the range until the tail model holds)
    and the remainder above the last frequency is added analytically. For
    line spectra the result is the bound-state line sum only.
    """
    if k < 0:
        raise DomainError("k must be >= 0")
    if k % 2:
        return 0.0
    if isinstance(spectrum, LineSpectrum):
        expo = spectrum.tail[1] if spectrum.tail else tail_exponent_qm(spectrum.state)
        if k >= expo - 1:
            return DIVERGENT
        w = spectrum.lines
        return math.fsum(w[:, 1] * w[:, 0] ** k)
    sf = spectrum
    delta = 0.0
    if sf.delta_line is not None and k == 0:
        delta = sf.delta_line[1]
    if sf.omega.size == 0:
        return delta
    if sf.tail is None:
        raise DomainError("spectrum carries no tail model; divergence cannot be decided")
    if k >= sf.tail[1] - 1:
        return DIVERGENT
    half = _moment_from_evaluator(sf, k) if sf.evaluator is not None else _moment_from_samples(sf, k)
    return delta + 2.0 * half


# ---------------------------------------------------------------------------
# cross section
# ---------------------------------------------------------------------------


def cross_section(spectral_value, omega, alpha: float = ALPHA_QED):
    """Total absorption cross section ``8 pi^2 alpha omega S(omega)``.

    With ``S`` in ``e^2 a0^2 / omega0`` and ``omega`` in ``omega0`` the result
    is in ``a0^2`` (the ``e^2`` cancels against ``alpha = e^2 / hbar c``).
    """
    s = np.asarray(spectral_value, dtype=float)
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise DomainError("omega must be >= 0")
    if np.any(s < 0):
        raise DomainError("S must be >= 0")
    out = 8.0 * math.pi**2 * alpha * w * s
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# power-law fits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AsymptoteFit:
    fitted_exponent: float
    fitted_coefficient: float
    fit_window: tuple[float, float]
    r_squared: float
    samples: int

    def to_dict(self) -> dict:
        return asdict(self)


def fit_asymptote(spectrum: SpectralFunction, window: tuple[float, float]) -> AsymptoteFit:
    """Least-squares line through ``(log omega, log S)`` inside ``window``; exponent = slope."""
    lo, hi = window
    w = np.asarray(spectrum.omega, dtype=float)
    s = np.asarray(spectrum.value, dtype=float)
    if not lo < hi or w.size == 0 or lo < w.min() * (1 - 1e-12) or hi > w.max() * (1 + 1e-12):
        raise DomainError(f"degenerate window {window} for samples on [{w.min() if w.size else 0}, "
                          f"{w.max() if w.size else 0}]")
    sel = (w >= lo) & (w <= hi)
    if sel.sum() < 10:
        raise DomainError(f"degenerate window: {int(sel.sum())} samples inside, need >= 10")
    if np.any(s[sel] <= 0):
        raise DomainError("degenerate window: non-positive spectral values")
    x, y = np.log(w[sel]), np.log(s[sel])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = 1.0 if ss_tot == 0 else min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return AsymptoteFit(float(slope), float(math.exp(intercept)), (float(lo), float(hi)), r2, int(sel.sum()))


# ---------------------------------------------------------------------------
# theory comparison
# ---------------------------------------------------------------------------


@dataclass
class MomentReport:
    """Zeroth and second moments in both theories plus numeric recomputations.

    ``gamma0`` is ``<x^2>`` (shared); ``gamma2_qm`` is ``<x^2/r^3>`` in
    ``e^4/(mu a0)`` and ``gamma2_qm_half_units`` the same value in
    ``e^4/(2 mu a0)`` (numerically twice as large).
    """

    state: HydrogenState
    gamma0: Fraction
    gamma2_sqm: object
    gamma2_qm: Fraction
    gamma2_qm_half_units: Fraction
    gamma0_numeric: dict = field(default_factory=dict)
    gamma2_numeric: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def exact(x):
            return {"value": float(x), "exact": str(x)} if isinstance(x, Fraction) else str(x)

        return {
            "state": str(self.state),
            "gamma0": exact(self.gamma0),
            "gamma2_sqm": exact(self.gamma2_sqm),
            "gamma2_qm": exact(self.gamma2_qm),
            "gamma2_qm_half_units": exact(self.gamma2_qm_half_units),
            "gamma0_numeric": self.gamma0_numeric,
            "gamma2_numeric": self.gamma2_numeric,
            "tolerances": self.tolerances,
        }


@dataclass
class TheoryComparison:
    report: MomentReport
    sqm_exponent: Optional[int]
    qm_exponent: float
    sqm_tail_coefficient: Optional[Fraction]
    qm_tail_coefficient: float
    qm_tail_coefficient_free_particle: float
    semiclassical: Optional[dict] = None
    sqm_spectrum: str = "continuous"

    def to_dict(self) -> dict:
        out = {
            "moments": self.report.to_dict(),
            "sqm_spectrum": self.sqm_spectrum,
            "exponents": {"sqm": self.sqm_exponent, "qm": self.qm_exponent},
            "tail_coefficients": {
                "sqm": None if self.sqm_tail_coefficient is None else float(self.sqm_tail_coefficient),
                "qm": self.qm_tail_coefficient,
                "qm_free_particle": self.qm_tail_coefficient_free_particle,
                "qm_over_free_particle": self.qm_tail_coefficient / self.qm_tail_coefficient_free_particle,
            },
        }
        if self.semiclassical is not None:
            out["semiclassical"] = {k: float(v) if isinstance(v, Fraction) else v
                                    for k, v in self.semiclassical.items()}
        return out


def semiclassical_limit(n: int) -> dict:
    """``n^2 gamma^(2)`` of ``|n, n-1, n-1>`` in units of ``e^4 / (2 a0 mu)``; both tend to 1."""
    if n < 2:
        raise DomainError("semiclassical comparison needs n >= 2")
    state = HydrogenState(n, n - 1, n - 1)
    sqm = 2 * n * n * moment_sqm(state, 2)
    qm = 2 * n * n * moment_qm(state, 2)
    return {"n": n, "n2_gamma2_sqm": sqm, "n2_gamma2_qm": qm, "ratio_qm_over_sqm": qm / sqm}


def compare_theories(
    state: HydrogenState,
    n_max: Optional[int] = None,
    spec: QuadSpec = DEFAULT_QUAD,
    numeric: bool = True,
) -> TheoryComparison:
    """QM vs SQM: shared ``gamma0``, both ``gamma2`` and both tail exponents.

    ``numeric`` adds quadrature recomputations (SQM spectrum moments and
    ``<x^2/r^3>``); ``n_max`` adds the QM bound-line sum of ``gamma0``,
    which stays below ``<x^2>`` by the continuum share.
    """
    sqm_state = HydrogenState(state.n, state.l, abs(state.m))
    g0 = x_squared_expectation(state)
    g2s = moment_sqm(sqm_state, 2, spec)
    g2q = moment_qm(state, 2)
    g0n: dict = {}
    g2n: dict = {}
    if numeric:
        if sqm_state.m == 0:
            sf = build_spectrum(sqm_state, [], SpectrumMethod.ClosedForm)
        else:
            method = SpectrumMethod.ClosedForm if closed_form_supported(sqm_state) else SpectrumMethod.GeneralQuadrature
            sf = build_spectrum(sqm_state, np.geomspace(1e-2, 1e2, 9), method, spec)
        g0n["sqm"] = numeric_moment(sf, 0)
        g2n["sqm"] = numeric_moment(sf, 2)
        g2n["qm_x2_over_r3"] = x2_over_r3_quadrature(state, spec)
    if n_max is not None:
        g0n["qm_bound_lines"] = line_spectrum(state, n_max, with_tail=False).total_weight
        g0n["qm_n_max"] = n_max
    report = MomentReport(
        state, g0, g2s, g2q, moment_qm_half_units(state), g0n, g2n,
        {"rel_tol": spec.rel_tol, "abs_tol": spec.abs_tol, "moment_rtol": 1e-6},
    )
    semi = None
    if state.n >= 2 and state.l == state.n - 1 and abs(state.m) == state.l:
        semi = semiclassical_limit(state.n)
    m0 = sqm_state.m == 0
    return TheoryComparison(
        report=report,
        sqm_exponent=None if m0 else tail_exponent_sqm(sqm_state),
        qm_exponent=tail_exponent_qm(state),
        sqm_tail_coefficient=None if m0 else asymptotic_coeff_sqm_exact(sqm_state),
        qm_tail_coefficient=tail_coeff_qm(state)[0],
        qm_tail_coefficient_free_particle=tail_coeff_qm_free_particle(state),
        semiclassical=semi,
        sqm_spectrum="delta_at_zero" if m0 else "continuous",
    )
