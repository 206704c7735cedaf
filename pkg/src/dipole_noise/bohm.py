"""Bohmian dynamics for hydrogen eigenstates and quantum-equilibrium sampling.

For ``psi_nlm`` the phase is ``S = m phi - E t`` so the guidance velocity is
purely azimuthal and every trajectory is a circle about the z axis.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import optimize, stats

from .hydrogen import (
    HydrogenState,
    energy,
    polar_factor,
    radial_derivatives,
    radial_wavefunction,
)
from .numerics import DomainError, assoc_legendre, legendre_derivative_coefficients

log = logging.getLogger(__name__)

NODE_EPS = 1e-12
DEFAULT_CHUNK = 1 << 16
THREADS_ENV = "DIPOLE_NOISE_THREADS"


class SingularityError(DomainError):
    """Velocity field evaluated on the polar axis of an ``m != 0`` state."""


class NodeError(DomainError):
    """Quantum potential requested on (or within ``NODE_EPS`` of) a nodal surface."""


@dataclass(frozen=True)
class InitialCondition:
    r0: float
    theta0: float
    phi0: float = 0.0

    def __post_init__(self):
        if not self.r0 > 0:
            raise DomainError("r0 must be positive")
        if not 0.0 <= self.theta0 <= math.pi:
            raise DomainError("theta0 must lie in [0, pi]")


def _check_axis(state: HydrogenState, r, theta):
    if state.m != 0 and np.any(np.asarray(r) * np.sin(theta) <= 0.0):
        raise SingularityError(f"velocity of {state.label} is singular on the polar axis")


def velocity_field(state: HydrogenState, r: float, theta: float) -> tuple[float, float, float]:
    """``(v_r, v_theta, v_phi) = (0, 0, m / (r sin theta))``."""
    if state.m == 0:
        return 0.0, 0.0, 0.0
    _check_axis(state, r, theta)
    return 0.0, 0.0, state.m / (r * math.sin(theta))


def angular_frequency(state: HydrogenState, ic: InitialCondition) -> float:
    """``Omega = m / (r0^2 sin^2 theta0)``."""
    if state.m == 0:
        return 0.0
    _check_axis(state, ic.r0, ic.theta0)
    s = ic.r0 * math.sin(ic.theta0)
    return state.m / (s * s)


def trajectory(state: HydrogenState, ic: InitialCondition, t):
    """Closed-form orbit ``(r0, theta0, phi0 + Omega t mod 2 pi)``; ``t`` may be an array."""
    omega = angular_frequency(state, ic)
    t = np.asarray(t, dtype=float)
    phi = np.mod(ic.phi0 + omega * t, 2.0 * math.pi)
    if phi.ndim == 0:
        return ic.r0, ic.theta0, float(phi)
    return np.full_like(t, ic.r0), np.full_like(t, ic.theta0), phi


def to_cartesian(r, theta, phi):
    st = np.sin(theta)
    return r * st * np.cos(phi), r * st * np.sin(phi), r * np.cos(theta)


# ---------------------------------------------------------------------------
# quantum potential
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _legendre_poly(l: int, m: int) -> np.polynomial.Polynomial:
    return np.polynomial.Polynomial([float(c) for c in legendre_derivative_coefficients(l, m)])


def _angular_laplacian_ratio(l: int, m: int, u: float) -> float:
    # [(1-u^2) P'' - 2u P'] / P for P = (1-u^2)^(m/2) D(u)
    d = _legendre_poly(l, m)
    d0, d1, d2 = d(u), d.deriv(1)(u), d.deriv(2)(u) if d.degree() >= 2 else 0.0
    w = 1.0 - u * u
    if m == 0:
        gp = gpp = 0.0
    else:
        gp = -m * u / w  # g'/g
        gpp = -m / w + m * (m - 2) * u * u / (w * w)  # g''/g
    num = w * (gpp * d0 + 2.0 * gp * d1 + d2) - 2.0 * u * (gp * d0 + d1)
    return num / d0


def quantum_potential(state: HydrogenState, r: float, theta: float) -> float:
    """``Q = -(1/2) lap(R) / R`` with ``R = |psi|``, from analytic derivatives."""
    if not r > 0:
        raise DomainError("r must be positive")
    chi, d1, d2 = radial_derivatives(state, r)
    amp = abs(float(chi) * polar_factor(state, theta))
    if amp < NODE_EPS:
        raise NodeError(f"|psi| = {amp:.3e} below node threshold at r={r}, theta={theta}")
    radial = (d2 + 2.0 * d1 / r) / chi
    u = math.cos(theta)
    if state.m != 0 and 1.0 - u * u <= 0.0:
        raise NodeError("polar axis is nodal for m != 0")
    angular = _angular_laplacian_ratio(state.l, abs(state.m), u)
    return float(-0.5 * (radial + angular / (r * r)))


def hamilton_jacobi_residual(state: HydrogenState, r: float, theta: float) -> float:
    """``Q + V + v_phi^2 / 2 - E_n``; zero for a stationary state."""
    v = velocity_field(state, r, theta)[2]
    return quantum_potential(state, r, theta) - 1.0 / r + 0.5 * v * v - energy(state.n)


# ---------------------------------------------------------------------------
# quantum-equilibrium sampling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RngStreamSpec:
    """Reproducible substream ``stream_id`` of the generator seeded by ``seed``."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=int(self.seed) & ((1 << 64) - 1), spawn_key=(int(self.stream_id),))
        return np.random.Generator(np.random.PCG64(ss))

    def substream(self, index: int) -> "RngStreamSpec":
        return RngStreamSpec(self.seed, self.stream_id * (1 << 32) + index)


@dataclass
class TrajectoryEnsemble:
    state: HydrogenState
    r0: np.ndarray
    theta0: np.ndarray
    phi0: np.ndarray
    seed: int
    chunk_size: int = DEFAULT_CHUNK
    acceptance: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.r0)

    @property
    def points(self) -> list[InitialCondition]:
        return [InitialCondition(float(a), float(b), float(c)) for a, b, c in zip(self.r0, self.theta0, self.phi0)]

    @property
    def cylindrical_radius_sq(self) -> np.ndarray:
        s = self.r0 * np.sin(self.theta0)
        return s * s

    @property
    def omega(self) -> np.ndarray:
        """Angular frequency of each member's orbit."""
        if self.state.m == 0:
            return np.zeros(self.size)
        return self.state.m / self.cylindrical_radius_sq

    def positions(self, t: float) -> np.ndarray:
        """Cartesian positions of all members at time ``t``, shape ``(size, 3)``."""
        phi = np.mod(self.phi0 + self.omega * t, 2.0 * math.pi)
        return np.column_stack(to_cartesian(self.r0, self.theta0, phi))

    def metadata(self) -> dict:
        return {
            "state": str(self.state),
            "seed": self.seed,
            "size": self.size,
            "chunk_size": self.chunk_size,
        }


@dataclass(frozen=True)
class _Envelope:
    shape: float
    rate: float
    log_bound_r: float
    bound_u: float


def _log_radial_target(state: HydrogenState, r):
    chi = radial_wavefunction(state, r)
    with np.errstate(divide="ignore"):
        return 2.0 * np.log(np.abs(chi)) + 2.0 * np.log(r)


@lru_cache(maxsize=None)
def _envelope(state: HydrogenState) -> _Envelope:
    n, l, m = state.n, state.l, abs(state.m)
    shape = 2.0 * l + 3.0
    mean_r = 0.5 * (3 * n * n - l * (l + 1))
    rate = shape / mean_r
    gamma = stats.gamma(shape, scale=1.0 / rate)

    def log_ratio(r):
        return _log_radial_target(state, r) - gamma.logpdf(r)

    grid = np.geomspace(1e-6, 60.0 * n * n, 20001)
    vals = log_ratio(grid)
    i = int(np.nanargmax(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    best = optimize.minimize_scalar(lambda r: -log_ratio(r), bounds=(lo, hi), method="bounded",
                                    options={"xatol": 1e-12})
    log_bound_r = max(vals[i], -best.fun) + math.log(1.01)

    def polar_sq(u):
        return assoc_legendre(l, m, u) ** 2

    ugrid = np.linspace(-1.0, 1.0, 20001)
    pv = polar_sq(ugrid)
    j = int(np.argmax(pv))
    ulo, uhi = ugrid[max(j - 1, 0)], ugrid[min(j + 1, len(ugrid) - 1)]
    bu = optimize.minimize_scalar(lambda u: -polar_sq(u), bounds=(ulo, uhi), method="bounded",
                                  options={"xatol": 1e-12})
    bound_u = 1.01 * max(pv[j], -bu.fun)
    return _Envelope(shape, rate, log_bound_r, bound_u)


def _rejection_fill(draw, size: int, expected_rate: float) -> tuple[np.ndarray, float]:
    out = []
    have = 0
    proposed = 0
    while have < size:
        batch = int((size - have) / max(expected_rate, 1e-3) * 1.1) + 64
        acc = draw(batch)
        proposed += batch
        out.append(acc)
        have += len(acc)
    return np.concatenate(out)[:size], have / proposed


def _sample_chunk(state: HydrogenState, size: int, spec: RngStreamSpec):
    env = _envelope(state)
    rng = spec.generator()
    l, m = state.l, abs(state.m)

    def draw_r(k):
        r = rng.gamma(env.shape, 1.0 / env.rate, size=k)
        u = rng.random(k)
        logf = _log_radial_target(state, r) - stats.gamma.logpdf(r, env.shape, scale=1.0 / env.rate)
        return r[np.log(u) < logf - env.log_bound_r]

    def draw_u(k):
        c = rng.uniform(-1.0, 1.0, size=k)
        u = rng.random(k)
        keep = u * env.bound_u < assoc_legendre(l, m, c) ** 2
        if m != 0:
            keep &= np.abs(c) < 1.0
        return c[keep]

    r, nr = _rejection_fill(draw_r, size, 0.3)
    cos_t, nu = _rejection_fill(draw_u, size, 0.3)
    phi = rng.uniform(0.0, 2.0 * math.pi, size=size)
    return r, np.arccos(cos_t), phi, nr, nu


def worker_count(workers: int | None = None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get(THREADS_ENV)
    return max(1, int(env)) if env else 1


def sample_qeh(
    state: HydrogenState,
    size: int,
    rng: RngStreamSpec,
    chunk_size: int = DEFAULT_CHUNK,
    workers: int | None = None,
) -> TrajectoryEnsemble:
    """Draw ``size`` i.i.d. initial conditions from ``|psi|^2``.

    ``r`` by rejection from a Gamma proposal, ``cos(theta)`` by rejection from
    a uniform proposal, ``phi`` uniform. Sample ``i`` belongs to chunk
    ``i // chunk_size`` which is drawn from its own substream, so the result
    does not depend on ``workers``.
    """
    if size < 1:
        raise DomainError("size must be >= 1")
    sizes = [min(chunk_size, size - start) for start in range(0, size, chunk_size)]
    jobs = [(s, rng.substream(i)) for i, s in enumerate(sizes)]
    nw = worker_count(workers)
    if nw == 1 or len(jobs) == 1:
        parts = [_sample_chunk(state, s, sp) for s, sp in jobs]
    else:
        with ThreadPoolExecutor(max_workers=nw) as pool:
            parts = list(pool.map(lambda job: _sample_chunk(state, *job), jobs))
    r = np.concatenate([p[0] for p in parts])
    th = np.concatenate([p[1] for p in parts])
    ph = np.concatenate([p[2] for p in parts])
    acc = {
        "radial": float(np.mean([p[3] for p in parts])),
        "polar": float(np.mean([p[4] for p in parts])),
    }
    log.info("QEH sampling %s: acceptance radial=%.3f polar=%.3f", state.label, acc["radial"], acc["polar"])
    return TrajectoryEnsemble(state, r, th, ph, seed=rng.seed, chunk_size=chunk_size, acceptance=acc)
