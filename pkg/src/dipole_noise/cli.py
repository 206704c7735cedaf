"""``dipole-noise`` command line: spectra, moments, trajectories, tails, cross sections.

Exit codes: 0 success, 2 usage or domain error, 3 numerical failure.
"""

from __future__ import annotations

import contextlib
import functools
import io
import logging
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import click
import numpy as np

from .bohm import RngStreamSpec, sample_qeh
from .export import write_csv, write_json
from .hydrogen import HydrogenState
from .numerics import DEFAULT_QUAD, DomainError, QuadratureError
from .observables import ALPHA_QED, compare_theories, cross_section, fit_asymptote
from .qm_spectra import line_spectrum, moment_qm, tail_coeff_qm, tail_coeff_qm_free_particle
from .sqm_spectra import (
    DIVERGENT,
    SpectrumMethod,
    asymptotic_coeff_sqm_exact,
    build_spectrum,
    closed_form_supported,
    moment_sqm,
    spectral_mc,
    tail_exponent_sqm,
)

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunConfig:
    """Settings of one ``spectrum`` run."""

    state: HydrogenState
    method: SpectrumMethod = SpectrumMethod.ClosedForm
    omega_min: float = 1e-2
    omega_max: float = 1e2
    points: int = 200
    log_spacing: bool = True
    seed: int = 0
    samples: int = 100_000
    output: str = "-"
    format: str = "csv"

    def __post_init__(self):
        if self.points < 2:
            raise DomainError("points must be >= 2")
        if self.state.m != 0 and self.omega_min <= 0:
            raise DomainError("omega_min must be > 0 when m != 0")
        if self.omega_min < 0 or self.omega_max <= self.omega_min:
            raise DomainError("need 0 <= omega_min < omega_max")
        if self.method is SpectrumMethod.MonteCarlo and self.samples < 1:
            raise DomainError("samples must be >= 1 for mc")
        if self.format not in ("csv", "json"):
            raise DomainError("format must be csv or json")

    def grid(self, count: Optional[int] = None) -> np.ndarray:
        count = self.points if count is None else count
        if self.log_spacing:
            return np.geomspace(self.omega_min, self.omega_max, count)
        return np.linspace(self.omega_min, self.omega_max, count)


# ---------------------------------------------------------------------------
# plumbing
# ---------------------------------------------------------------------------


def _parse_state(ctx, param, value):
    if value is None:
        return None
    try:
        return HydrogenState.parse(value)
    except DomainError as exc:
        raise click.BadParameter(str(exc), ctx=ctx, param=param) from exc


def _guarded(fn):
    """Map domain errors to exit 2 and numerical failures to exit 3."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except DomainError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_USAGE)
        except QuadratureError as exc:
            click.echo(f"numerical failure: {exc} (last estimate {exc.estimate!r}, "
                       f"quadrature error {exc.error!r})", err=True)
            sys.exit(EXIT_NUMERIC)
        except (ArithmeticError, FloatingPointError) as exc:
            click.echo(f"numerical failure: {exc}", err=True)
            sys.exit(EXIT_NUMERIC)

    return wrapper


@contextlib.contextmanager
def _open_output(path: str):
    if path in ("-", ""):
        buf = io.StringIO()
        yield buf
        sys.stdout.write(buf.getvalue())
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _emit(output: str, fmt: str, meta: dict, header, rows, payload: Optional[dict] = None):
    rows = list(rows)
    with _open_output(output) as fh:
        if fmt == "json":
            body = payload if payload is not None else {"columns": list(header), "rows": rows}
            write_json(fh, meta, body)
        else:
            write_csv(fh, meta, header, rows)


def _sqm_state(state: HydrogenState, meta: dict) -> HydrogenState:
    if state.m < 0:
        meta["reflected_from"] = str(state)
        return HydrogenState(state.n, state.l, -state.m)
    return state


def _default_method(state: HydrogenState) -> SpectrumMethod:
    return SpectrumMethod.ClosedForm if closed_form_supported(state) else SpectrumMethod.GeneralQuadrature


_state_opt = click.option("--state", required=True, callback=_parse_state, help="Eigenstate as 'n,l,m'.")
_output_opt = click.option("--output", "-o", default="-", show_default=True, help="Output path ('-' for stdout).")
_format_opt = click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
_workers_opt = click.option("--workers", type=click.IntRange(min=1), default=None,
                            help="Worker threads for sampling (default: $DIPOLE_NOISE_THREADS or 1).")


@click.group()
@click.version_option(package_name="artifact", prog_name="dipole-noise")
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
def main(verbose: bool):
    """Dipole noise spectra of hydrogen eigenstates (conventional vs Bohmian QM)."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


# ---------------------------------------------------------------------------
# spectrum
# ---------------------------------------------------------------------------


@main.command()
@_state_opt
@click.option("--method", type=click.Choice(["closed", "quad", "mc"]), default="closed", show_default=True)
@click.option("--omega-min", type=float, default=1e-2, show_default=True)
@click.option("--omega-max", type=float, default=1e2, show_default=True)
@click.option("--points", type=int, default=200, show_default=True,
              help="Grid points (bins for mc).")
@click.option("--log/--linear", "log_spacing", default=True, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--samples", type=int, default=100_000, show_default=True)
@_workers_opt
@_output_opt
@_format_opt
@_guarded
def spectrum(state, method, omega_min, omega_max, points, log_spacing, seed, samples, workers, output, fmt):
    """SQM spectral function S(omega) on a frequency grid."""
    cfg = RunConfig(state, SpectrumMethod(method), omega_min, omega_max, points, log_spacing, seed, samples,
                    output, fmt)
    run_spectrum(cfg, workers)


def run_spectrum(cfg: RunConfig, workers: Optional[int] = None) -> None:
    meta: dict = {"state": str(cfg.state), "method": cfg.method.value, "units": "e2a02_per_omega0"}
    state = _sqm_state(cfg.state, meta)
    if state.m == 0:
        sf = build_spectrum(state, [])
        meta.update(kind="delta_line", seed=None)
        _emit(cfg.output, cfg.format, meta, ("omega", "weight"), [sf.delta_line])
        return
    if cfg.method is SpectrumMethod.MonteCarlo:
        edges = cfg.grid(cfg.points + 1)
        ens = sample_qeh(state, cfg.samples, RngStreamSpec(cfg.seed), workers=workers)
        sf = spectral_mc(state, edges, ens, workers=workers)
        meta.update(seed=cfg.seed, samples=cfg.samples, chunk_size=ens.chunk_size)
        rows = zip(sf.bin_edges[:-1], sf.bin_edges[1:], sf.omega, sf.value, sf.stderr)
        header = ("omega_lo", "omega_hi", "omega", "S", "stderr")
    else:
        sf = build_spectrum(state, cfg.grid(), cfg.method, DEFAULT_QUAD)
        meta.update(seed=None, tail_coefficient=sf.tail[0], tail_exponent=sf.tail[1])
        rows = ((w, v, None) for w, v in zip(sf.omega, sf.value))
        header = ("omega", "S", "stderr")
    meta["spacing"] = "log" if cfg.log_spacing else "linear"
    _emit(cfg.output, cfg.format, meta, header, rows)


# ---------------------------------------------------------------------------
# moments
# ---------------------------------------------------------------------------


def _moment_entry(theory: str, k: int, value) -> dict:
    if k % 2:
        return {"theory": theory, "k": k, "value": 0.0, "exact": "0", "status": "zero", "reason": "evenness"}
    if value is DIVERGENT:
        return {"theory": theory, "k": k, "value": None, "exact": None, "status": "divergent",
                "reason": "tail exponent"}
    if value is None:
        return {"theory": theory, "k": k, "value": None, "exact": None, "status": "unavailable",
                "reason": "finite; only k in {0, 2} implemented"}
    exact = str(value) if isinstance(value, Fraction) else None
    return {"theory": theory, "k": k, "value": float(value), "exact": exact, "status": "finite", "reason": None}


def _qm_moment(state: HydrogenState, k: int):
    if k % 2:
        return Fraction(0)
    if k >= state.l + 3.5:
        return DIVERGENT
    if k in (0, 2):
        return moment_qm(state, k)
    return None


@main.command()
@_state_opt
@click.option("--theory", type=click.Choice(["qm", "sqm", "both"]), default="both", show_default=True)
@click.option("--k", "orders", type=click.IntRange(min=0), multiple=True, help="Moment orders (default 0 and 2).")
@click.option("--n-max", type=click.IntRange(min=1), default=None,
              help="Also sum bound QM lines up to this principal number.")
@click.option("--numeric/--no-numeric", default=True, show_default=True,
              help="Recompute moments by quadrature.")
@_output_opt
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="json", show_default=True)
@_guarded
def moments(state, theory, orders, n_max, numeric, output, fmt):
    """Frequency moments gamma^(k) and the QM-vs-SQM comparison report."""
    orders = orders or (0, 2)
    theories = ("qm", "sqm") if theory == "both" else (theory,)
    sqm_state = HydrogenState(state.n, state.l, abs(state.m))
    entries = []
    for th in theories:
        for k in orders:
            value = _qm_moment(state, k) if th == "qm" else moment_sqm(sqm_state, k)
            entries.append(_moment_entry(th, k, value))
    cmp = compare_theories(state, n_max, DEFAULT_QUAD, numeric=numeric)
    meta = {"state": str(state), "method": "moments", "theory": theory, "units": "e2a02_times_omega0_pow_k",
            "seed": None}
    if fmt == "json":
        _emit(output, fmt, meta, (), (), {"moments": entries, "report": cmp.to_dict()})
        return
    rows = [(e["theory"], e["k"], e["value"], e["exact"], e["status"], e["reason"]) for e in entries]
    if cmp.semiclassical is not None:
        meta["semiclassical_ratio"] = float(cmp.semiclassical["ratio_qm_over_sqm"])
    _emit(output, fmt, meta, ("theory", "k", "value", "exact", "status", "reason"), rows)


# ---------------------------------------------------------------------------
# trajectories and ensembles
# ---------------------------------------------------------------------------


@main.command()
@_state_opt
@click.option("--count", type=click.IntRange(min=1), default=10, show_default=True)
@click.option("--t-max", type=click.FloatRange(min=0), default=10.0, show_default=True)
@click.option("--dt", type=click.FloatRange(min=0, min_open=True), default=0.5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@_workers_opt
@_output_opt
@_guarded
def trajectories(state, count, t_max, dt, seed, workers, output):
    """Cartesian Bohm trajectories of a quantum-equilibrium ensemble (CSV id,t,x,y,z)."""
    if state.m < 0:
        raise DomainError("trajectories need m >= 0")
    ens = sample_qeh(state, count, RngStreamSpec(seed), workers=workers)
    steps = int(round(t_max / dt))
    meta = {"state": str(state), "method": "trajectories", "units": "a0_and_1_over_omega0", "seed": seed,
            "count": count, "dt": dt, "t_max": t_max}

    def rows():
        for i in range(steps + 1):
            t = i * dt
            pos = ens.positions(t)
            for idx in range(count):
                yield (idx, t, pos[idx, 0], pos[idx, 1], pos[idx, 2])

    _emit(output, "csv", meta, ("id", "t", "x", "y", "z"), rows())


@main.command()
@_state_opt
@click.option("--count", type=click.IntRange(min=1), default=1000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@_workers_opt
@_output_opt
@_format_opt
@_guarded
def ensemble(state, count, seed, workers, output, fmt):
    """Quantum-equilibrium initial positions (r0, theta0, phi0)."""
    ens = sample_qeh(state, count, RngStreamSpec(seed), workers=workers)
    meta = {"state": str(state), "method": "qeh_sampling", "units": "a0_rad", **ens.metadata()}
    _emit(output, fmt, meta, ("r0", "theta0", "phi0"), zip(ens.r0, ens.theta0, ens.phi0))


@main.command()
@_state_opt
@click.option("--n-max", type=click.IntRange(min=1), default=10, show_default=True)
@_output_opt
@_format_opt
@_guarded
def lines(state, n_max, output, fmt):
    """QM bound-bound line spectrum (omega, weight) of both signs."""
    ls = line_spectrum(state, n_max)
    meta = {**ls.metadata(), "seed": None, "total_weight": ls.total_weight}
    _emit(output, fmt, meta, ("omega", "weight"), ls.lines.tolist())


# ---------------------------------------------------------------------------
# asymptote and cross section
# ---------------------------------------------------------------------------


@main.command()
@_state_opt
@click.option("--theory", type=click.Choice(["qm", "sqm"]), default="sqm", show_default=True)
@click.option("--omega-lo", type=float, default=1e3, show_default=True)
@click.option("--omega-hi", type=float, default=1e5, show_default=True)
@click.option("--points", type=int, default=50, show_default=True)
@click.option("--method", type=click.Choice(["closed", "quad"]), default=None,
              help="SQM evaluator (default: closed when available).")
@_output_opt
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="json", show_default=True)
@_guarded
def asymptote(state, theory, omega_lo, omega_hi, points, method, output, fmt):
    """High-frequency power law: SQM by log-log fit, QM from the tail model."""
    meta: dict = {"state": str(state), "theory": theory, "units": "e2a02_per_omega0", "seed": None}
    if theory == "qm":
        coeff, expo = tail_coeff_qm(state)
        meta["method"] = "tail_model"
        result = {"source": "tail_model", "exponent": -expo, "coefficient": coeff,
                  "coefficient_free_particle": tail_coeff_qm_free_particle(state)}
    else:
        sqm = _sqm_state(state, meta)
        if sqm.m == 0:
            raise DomainError("m = 0: the SQM spectrum is a delta line at omega = 0, no tail")
        spec_method = SpectrumMethod(method) if method else _default_method(sqm)
        meta["method"] = spec_method.value
        if points < 2 or not 0 < omega_lo < omega_hi:
            raise DomainError("need points >= 2 and 0 < omega_lo < omega_hi")
        sf = build_spectrum(sqm, np.geomspace(omega_lo, omega_hi, points), spec_method)
        fit = fit_asymptote(sf, (omega_lo, omega_hi))
        exact = asymptotic_coeff_sqm_exact(sqm)
        result = {"source": "loglog_fit", "exponent": fit.fitted_exponent, "coefficient": fit.fitted_coefficient,
                  "r_squared": fit.r_squared, "omega_lo": omega_lo, "omega_hi": omega_hi, "samples": fit.samples,
                  "expected_exponent": -tail_exponent_sqm(sqm), "expected_coefficient": float(exact),
                  "expected_coefficient_exact": str(exact)}
    if fmt == "json":
        _emit(output, fmt, meta, (), (), result)
    else:
        _emit(output, fmt, meta, ("quantity", "value"), result.items())


@main.command(name="cross-section")
@_state_opt
@click.option("--omega", "omegas", type=click.FloatRange(min=0), multiple=True,
              help="Frequencies; default is the log grid given by --omega-min/--omega-max/--points.")
@click.option("--omega-min", type=float, default=1e-2, show_default=True)
@click.option("--omega-max", type=float, default=1e2, show_default=True)
@click.option("--points", type=int, default=200, show_default=True)
@click.option("--method", type=click.Choice(["closed", "quad", "mc"]), default=None,
              help="Default: closed when available, else quad.")
@click.option("--alpha", type=float, default=ALPHA_QED, show_default=True, help="Fine-structure constant.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--samples", type=int, default=100_000, show_default=True)
@_workers_opt
@_output_opt
@_format_opt
@_guarded
def cross_section_cmd(state, omegas, omega_min, omega_max, points, method, alpha, seed, samples, workers,
                      output, fmt):
    """SQM total absorption cross section 8 pi^2 alpha omega S(omega), in a0^2."""
    meta: dict = {"state": str(state), "units": "a0_squared", "alpha": alpha}
    sqm = _sqm_state(state, meta)
    if sqm.m == 0:
        raise DomainError("m = 0: the SQM spectrum has no weight at omega > 0")
    spec_method = SpectrumMethod(method) if method else _default_method(sqm)
    meta["method"] = spec_method.value
    if spec_method is SpectrumMethod.MonteCarlo:
        if omegas:
            raise DomainError("--omega cannot be combined with --method mc (bins come from the grid)")
        cfg = RunConfig(sqm, spec_method, omega_min, omega_max, points, True, seed, samples, output, fmt)
        ens = sample_qeh(sqm, samples, RngStreamSpec(seed), workers=workers)
        sf = spectral_mc(sqm, cfg.grid(points + 1), ens, workers=workers)
        meta.update(seed=seed, samples=samples)
        sig = cross_section(sf.value, sf.omega, alpha)
        err = cross_section(np.where(np.isfinite(sf.stderr), sf.stderr, 0.0), sf.omega, alpha)
        err = np.where(np.isfinite(sf.stderr), err, np.inf)
        rows = zip(sf.omega, sf.value, sig, err)
    else:
        grid = np.array(omegas, dtype=float) if omegas else RunConfig(
            sqm, spec_method, omega_min, omega_max, points).grid()
        # S vanishes at omega = 0 when m != 0
        pos = grid > 0
        values = np.zeros_like(grid)
        values[pos] = build_spectrum(sqm, grid[pos], spec_method).value
        meta["seed"] = None
        rows = ((w, s, cross_section(s, w, alpha), None) for w, s in zip(grid, values))
    _emit(output, fmt, meta, ("omega", "S", "sigma", "sigma_stderr"), rows)


if __name__ == "__main__":  # pragma: no cover
    main()
