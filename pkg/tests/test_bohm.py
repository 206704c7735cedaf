import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate as sp_integrate
from scipy import stats

from dipole_noise.bohm import (
    InitialCondition,
    NodeError,
    RngStreamSpec,
    SingularityError,
    angular_frequency,
    hamilton_jacobi_residual,
    quantum_potential,
    sample_qeh,
    to_cartesian,
    trajectory,
    velocity_field,
)
from dipole_noise.hydrogen import HydrogenState, density, radial_wavefunction, x_squared_expectation
from dipole_noise.numerics import DomainError, integrate

S211 = HydrogenState(2, 1, 1)


def test_velocity_examples():
    assert velocity_field(S211, 1.0, math.pi / 2) == pytest.approx((0, 0, 1))
    assert velocity_field(HydrogenState(3, 2, 2), 2.0, math.pi / 2) == pytest.approx((0, 0, 1))
    assert velocity_field(HydrogenState(2, 1, 0), 1.0, 0.3) == (0.0, 0.0, 0.0)
    with pytest.raises(SingularityError):
        velocity_field(S211, 1.0, 0.0)


def test_trajectory_examples():
    ic = InitialCondition(1.0, math.pi / 2, 0.25)
    r, th, ph = trajectory(S211, ic, 1.5)
    assert (r, th) == (1.0, math.pi / 2) and ph == pytest.approx(1.75)
    assert trajectory(HydrogenState(3, 1, 0), ic, 123.0) == (1.0, math.pi / 2, 0.25)
    assert angular_frequency(S211, InitialCondition(1.0, math.pi / 2)) == 1.0
    assert angular_frequency(HydrogenState(2, 1, 0), ic) == 0.0


def test_initial_condition_validation():
    with pytest.raises(DomainError):
        InitialCondition(0.0, 1.0)
    with pytest.raises(DomainError):
        InitialCondition(1.0, 4.0)


@pytest.mark.parametrize("state", [S211, HydrogenState(3, 2, 2), HydrogenState(3, 2, -1)], ids=str)
def test_trajectory_vs_ode(state):
    ic = InitialCondition(2.5, 1.1, 0.4)
    x0 = np.array(to_cartesian(ic.r0, ic.theta0, ic.phi0))

    def rhs(_t, p):
        x, y, z = p
        rho2 = x * x + y * y
        return [-state.m * y / rho2, state.m * x / rho2, 0.0]

    t_end = 17.0
    sol = sp_integrate.solve_ivp(rhs, (0.0, t_end), x0, rtol=1e-11, atol=1e-12)
    expected = np.array(to_cartesian(*trajectory(state, ic, t_end)))
    assert sol.y[:, -1] == pytest.approx(expected, abs=1e-8)


def _fd_quantum_potential(state, r, t, h=1e-4):
    def amp(rr, tt):
        return abs(radial_wavefunction(state, rr)) * math.sqrt(density(state, 1.0, tt)) / abs(
            radial_wavefunction(state, 1.0))

    a0 = amp(r, t)
    drr = (amp(r + h, t) - 2 * a0 + amp(r - h, t)) / h**2
    dr = (amp(r + h, t) - amp(r - h, t)) / (2 * h)
    dtt = (amp(r, t + h) - 2 * a0 + amp(r, t - h)) / h**2
    dt = (amp(r, t + h) - amp(r, t - h)) / (2 * h)
    # R = |psi| carries no phi dependence
    lap = drr + 2 * dr / r + (dtt + dt / math.tan(t)) / r**2
    return -0.5 * lap / a0


@pytest.mark.parametrize("state", [S211, HydrogenState(3, 2, 1), HydrogenState(3, 1, 0), HydrogenState(4, 2, 2)],
                         ids=str)
def test_quantum_potential_vs_finite_difference(state):
    for r, t in [(1.3, 0.9), (4.0, 1.4), (2.2, 2.0)]:
        try:
            q = quantum_potential(state, r, t)
        except NodeError:
            continue
        assert q == pytest.approx(_fd_quantum_potential(state, r, t), rel=1e-4, abs=1e-5)


@given(n=st.integers(1, 5), data=st.data(), r=st.floats(0.1, 40), t=st.floats(0.05, math.pi - 0.05))
def test_hamilton_jacobi_holds(n, data, r, t):
    l = data.draw(st.integers(0, n - 1))
    m = data.draw(st.integers(-l, l))
    s = HydrogenState(n, l, m)
    try:
        res = hamilton_jacobi_residual(s, r, t)
    except NodeError:
        return
    q = quantum_potential(s, r, t)
    assert abs(res) <= 1e-6 * (1 + abs(q) + 1 / r)


def test_node_error():
    with pytest.raises(NodeError):
        quantum_potential(HydrogenState(2, 0, 0), 2.0, 1.0)  # radial node at r = 2
    with pytest.raises(NodeError):
        quantum_potential(HydrogenState(2, 1, 0), 1.0, math.pi / 2)  # cos(theta) = 0


# --- sampling -------------------------------------------------------------------


def test_rng_streams_are_reproducible_and_distinct():
    a = RngStreamSpec(7, 3).generator().random(4)
    assert np.array_equal(a, RngStreamSpec(7, 3).generator().random(4))
    assert not np.array_equal(a, RngStreamSpec(7, 4).generator().random(4))
    assert RngStreamSpec(7).substream(2) != RngStreamSpec(7).substream(3)


def test_sampling_independent_of_workers():
    a = sample_qeh(S211, 150_000, RngStreamSpec(11), workers=1)
    b = sample_qeh(S211, 150_000, RngStreamSpec(11), workers=4)
    assert np.array_equal(a.r0, b.r0) and np.array_equal(a.theta0, b.theta0) and np.array_equal(a.phi0, b.phi0)
    c = sample_qeh(S211, 150_000, RngStreamSpec(12), workers=1)
    assert not np.array_equal(a.r0, c.r0)


def _radial_cdf(state):
    grid = np.linspace(0.0, 40.0 * state.n**2, 4001)
    pdf = np.array([radial_wavefunction(state, r) ** 2 * r * r for r in grid])
    cdf = sp_integrate.cumulative_trapezoid(pdf, grid, initial=0.0)
    return lambda x: np.interp(x, grid, cdf / cdf[-1])


@pytest.mark.parametrize("state", [S211, HydrogenState(3, 2, 1), HydrogenState(3, 1, 0), HydrogenState(1, 0, 0)],
                         ids=str)
def test_sampling_marginals_ks(state):
    ens = sample_qeh(state, 20_000, RngStreamSpec(5))
    assert stats.kstest(ens.r0, _radial_cdf(state)).pvalue > 1e-3
    u = np.cos(ens.theta0)
    ug = np.linspace(-1, 1, 2001)
    from dipole_noise.hydrogen import polar_factor
    pdf = polar_factor(state, np.arccos(ug)) ** 2
    cdf = sp_integrate.cumulative_trapezoid(pdf, ug, initial=0.0)
    assert stats.kstest(u, lambda x: np.interp(x, ug, cdf / cdf[-1])).pvalue > 1e-3
    assert stats.kstest(ens.phi0, stats.uniform(0, 2 * math.pi).cdf).pvalue > 1e-3


def test_empirical_x_squared():
    ens = sample_qeh(S211, 400_000, RngStreamSpec(2024))
    x2 = ens.positions(0.0)[:, 0] ** 2
    err = x2.std(ddof=1) / math.sqrt(x2.size)
    assert abs(x2.mean() - float(x_squared_expectation(S211))) < 3 * err


def test_equivariance():
    ens = sample_qeh(HydrogenState(3, 2, 1), 5_000, RngStreamSpec(1))
    p0, p1 = ens.positions(0.0), ens.positions(37.3)
    assert np.allclose(np.linalg.norm(p0, axis=1), np.linalg.norm(p1, axis=1))
    assert np.array_equal(p0[:, 2], p1[:, 2])
    assert ens.metadata()["size"] == 5_000


def test_sample_size_validation():
    with pytest.raises(DomainError):
        sample_qeh(S211, 0, RngStreamSpec(0))


def test_r_expectation_matches_sampler():
    s = HydrogenState(3, 2, 2)
    ens = sample_qeh(s, 50_000, RngStreamSpec(9))
    mean_r = integrate(lambda r: radial_wavefunction(s, r) ** 2 * r**3, 0.0, math.inf)
    assert abs(ens.r0.mean() - mean_r) < 4 * ens.r0.std() / math.sqrt(ens.size)
