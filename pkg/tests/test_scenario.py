import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from continuum_cap.scenario import (
    PathlossModel,
    PointMass,
    RadialProfile,
    Scenario,
    TrafficProfile,
    UniformDensity,
    derive_noise_distribution,
    disk_noise_distribution,
    narrow_noise_distribution,
    noise_at,
    tabulate_ccdf,
    traffic_to_noise_distribution,
)


def cell(radius=1.0, alpha=2.0, h0=1.0, sigma2=1.0, density=None, power=1.0):
    return Scenario(radius, PathlossModel(h0, alpha), sigma2, power, density or UniformDensity(1.0))


# -- noise_at ---------------------------------------------------------------

def test_noise_at_examples():
    assert noise_at(cell(radius=5.0), 1.0) == pytest.approx(1.0)
    assert noise_at(cell(radius=5.0, alpha=3.65), 2.0) == pytest.approx(2**3.65, rel=1e-14)
    assert noise_at(cell(radius=5.0, alpha=3.65), 2.0) == pytest.approx(12.55335, abs=1e-5)
    assert noise_at(cell(radius=5.0, h0=0.5, sigma2=2.0), 3.0) == pytest.approx(36.0, rel=1e-14)


@pytest.mark.parametrize("r", [0.0, -1.0, 5.0001])
def test_noise_at_outside_cell(r):
    with pytest.raises(ValueError):
        noise_at(cell(radius=5.0), r)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 4.99), st.floats(1e-6, 0.01), st.floats(0.5, 6.0))
def test_noise_at_strictly_increasing(r, dr, alpha):
    sc = cell(radius=5.0, alpha=alpha)
    assert noise_at(sc, r + dr) > noise_at(sc, r)


def test_scenario_total_users():
    sc = cell(radius=500.0, density=UniformDensity(1e-4))
    assert sc.total_users == pytest.approx(1e-4 * math.pi * 500.0**2, rel=1e-12)
    with pytest.raises(ValueError):
        Scenario(500.0, PathlossModel(1.0, 3.65), 1.0, 1.0, UniformDensity(1e-4), total_users=80.0)


def test_scenario_validation():
    with pytest.raises(ValueError):
        cell(radius=0.0)
    with pytest.raises(ValueError):
        cell(sigma2=-1.0)
    with pytest.raises(ValueError):
        cell(power=-1.0)
    with pytest.raises(ValueError):
        PathlossModel(1.0, 0.0)
    with pytest.raises(ValueError):
        cell(density=RadialProfile((0.0, 1.0), (0.0, 0.0)))


# -- analytic disk ----------------------------------------------------------

def test_disk_examples():
    d = disk_noise_distribution(2.0, 1.0)
    assert d.ccdf(0.25) == pytest.approx(0.75, rel=1e-15)
    for alpha in (2.0, 3.65, 4.0):
        dd = disk_noise_distribution(alpha, 7.0)
        assert dd.ccdf(7.0) == 0.0
        assert dd.ccdf(0.0) == 1.0
    assert disk_noise_distribution(4.0, 1.0).mean() == pytest.approx(1 / 3, rel=1e-10)


def test_disk_matches_area_law():
    rng = np.random.default_rng(7)
    sc = cell(radius=3.0, alpha=3.65, sigma2=2.0, h0=0.7)
    d = disk_noise_distribution(3.65, sc.nu_edge)
    for r in rng.uniform(1e-3, 3.0, 100):
        expected = 1 - (r / 3.0) ** 2
        assert d.ccdf(noise_at(sc, r)) == pytest.approx(expected, rel=1e-9, abs=1e-15)


@pytest.mark.parametrize("alpha", [1.5, 2.0, 3.0, 3.65, 4.0, 6.0])
def test_disk_normalized(alpha):
    d = disk_noise_distribution(alpha, 2.5)
    assert d.expect(lambda v: np.ones_like(v)) == pytest.approx(1.0, abs=1e-8)


def test_disk_pdf_is_minus_ccdf_slope():
    d = disk_noise_distribution(3.65, 1.0)
    for v in np.linspace(0.05, 0.95, 19):
        h = 1e-6 * v
        fd = -(d.ccdf(v + h) - d.ccdf(v - h)) / (2 * h)
        assert fd == pytest.approx(d.pdf(v), rel=1e-6)


def test_disk_quantile_inverts_ccdf():
    d = disk_noise_distribution(4.0, 1.0)
    for g in (0.75, 0.5, 0.25):
        assert d.ccdf(d.inverse_ccdf(g)) == pytest.approx(g, rel=1e-14)


def test_disk_validation():
    with pytest.raises(ValueError):
        disk_noise_distribution(0.0, 1.0)
    with pytest.raises(ValueError):
        disk_noise_distribution(2.0, 0.0)


# -- tabulated distributions ------------------------------------------------

def _tab_error(n, alpha=3.65):
    sc = cell(radius=1.0, alpha=alpha)
    tab = derive_noise_distribution(sc, n)
    exact = disk_noise_distribution(alpha, sc.nu_edge)
    nu = np.geomspace(1e-12, 1.0, 4001)
    return float(np.max(np.abs(tab.ccdf(nu) - exact.ccdf(nu))))


def test_tabulated_disk_matches_analytic_at_4096():
    assert _tab_error(4096) < 1e-4


def test_tabulated_converges_with_grid():
    errors = [_tab_error(n) for n in (256, 512, 1024, 2048, 4096)]
    for coarse, fine in zip(errors, errors[1:]):
        assert fine <= coarse / 2


def test_tabulated_normalization_and_monotonicity():
    d = derive_noise_distribution(cell(alpha=3.65, density=RadialProfile((0.0, 0.5, 1.0), (3.0, 1.0, 2.0))), 256)
    assert d.ccdf(d.nu_min) == pytest.approx(1.0, abs=1e-9)
    assert d.ccdf(d.nu_max) == pytest.approx(0.0, abs=1e-9)
    nu = np.linspace(0, d.nu_max, 5001)
    g = d.ccdf(nu)
    assert np.all(np.diff(g) <= 0)
    assert np.all(d.pdf(nu[1:]) >= 0)
    assert d.expect(lambda v: np.ones_like(v)) == pytest.approx(1.0, abs=1e-8)


def test_annulus_is_near_step_at_edge():
    R, eps = 1.0, 1e-3
    dens = RadialProfile((0.0, R - eps, R - eps, R), (0.0, 0.0, 1.0, 1.0))
    sc = cell(radius=R, alpha=3.65, density=dens)
    d = derive_noise_distribution(sc, 256)
    edge = sc.nu_edge
    inner = noise_at(sc, R - eps)
    assert d.ccdf(0.999 * inner) == pytest.approx(1.0, abs=1e-9)
    assert inner > 0.99 * edge
    assert d.ccdf(edge) == 0.0


def test_two_equal_annuli():
    eps = 1e-3
    r1, r2 = 0.4, 1.0
    # equal masses: ring area ~ r * width, so the inner ring is denser
    u1 = r2 / r1
    dens = RadialProfile(
        (0.0, r1 - eps, r1 - eps, r1, r1, r2 - eps, r2 - eps, r2),
        (0.0, 0.0, u1, u1, 0.0, 0.0, 1.0, 1.0),
    )
    sc = cell(radius=r2, alpha=2.0, density=dens)
    d = derive_noise_distribution(sc, 256)
    assert d.ccdf(0.5 * noise_at(sc, r1 - eps)) == pytest.approx(1.0, abs=1e-9)
    mid = 0.5 * (noise_at(sc, r1) + noise_at(sc, r2 - eps))
    assert d.ccdf(mid) == pytest.approx(0.5, abs=2e-3)
    assert d.ccdf(sc.nu_edge) == 0.0


def test_point_mass_becomes_narrow_distribution():
    sc = cell(radius=2.0, alpha=2.0, density=PointMass(1.5))
    d = derive_noise_distribution(sc)
    assert d.kind == "uniform"
    assert 0.5 * (d.nu_min + d.nu_max) == pytest.approx(noise_at(sc, 1.5), rel=1e-12)
    assert d.nu_max - d.nu_min == pytest.approx(2e-6 * noise_at(sc, 1.5), rel=1e-9)


def test_grid_size_validation():
    with pytest.raises(ValueError):
        derive_noise_distribution(cell(), 8)


def test_narrow_distribution():
    d = narrow_noise_distribution(3.0, 0.3)
    assert d.ccdf(2.7) == 1.0 and d.ccdf(3.3) == 0.0
    assert d.ccdf(3.0) == pytest.approx(0.5)
    assert d.expect(lambda v: np.ones_like(v)) == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(ValueError):
        narrow_noise_distribution(1.0, 2.0)


def test_tabulate_ccdf_columns():
    d = disk_noise_distribution(2.0, 1.0)
    table = tabulate_ccdf(d, [0.0, 0.5, 1.0])
    assert table.shape == (3, 2)
    assert table[:, 1].tolist() == pytest.approx([1.0, 0.5, 0.0])


# -- traffic ----------------------------------------------------------------

def test_traffic_proportional_to_users_matches_user_distribution():
    dens = RadialProfile((0.0, 0.3, 1.0), (2.0, 1.0, 0.5))
    sc = cell(alpha=3.65, density=dens)
    prof = TrafficProfile(1.0, dens).normalized(1.0)
    a = derive_noise_distribution(sc, 512)
    b = traffic_to_noise_distribution(prof, sc, 512)
    nu = np.linspace(0, sc.nu_edge, 301)
    assert np.allclose(a.ccdf(nu), b.ccdf(nu), atol=1e-12)


def test_uniform_traffic_alpha2_is_linear():
    sc = cell(alpha=2.0)
    prof = TrafficProfile(2.0, UniformDensity(1.0)).normalized(1.0)
    d = traffic_to_noise_distribution(prof, sc, 1024)
    nu = np.linspace(0.01, 0.99, 50)
    assert np.allclose(d.ccdf(nu), 1 - nu, atol=1e-6)


def test_traffic_point_mass_is_degenerate():
    sc = cell(radius=2.0, alpha=3.0)
    prof = TrafficProfile(1.0, PointMass(1.0))
    d = traffic_to_noise_distribution(prof, sc)
    assert d.nu_max - d.nu_min < 1e-5 * noise_at(sc, 1.0)


def test_traffic_must_be_normalized():
    with pytest.raises(ValueError):
        traffic_to_noise_distribution(TrafficProfile(1.0, UniformDensity(1.0)), cell())
    with pytest.raises(ValueError):
        TrafficProfile(1.0, RadialProfile((0.0, 1.0), (0.0, 0.0))).normalized(1.0)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.one_of(st.just(0.0), st.floats(1e-3, 5.0)), min_size=3, max_size=6),
    st.floats(1.5, 5.0),
)
def test_random_profiles_give_valid_distributions(values, alpha):
    if sum(values) == 0:
        values[0] = 1.0
    radii = tuple(np.linspace(0.0, 1.0, len(values)))
    d = derive_noise_distribution(cell(alpha=alpha, density=RadialProfile(radii, tuple(values))), 64)
    nu = np.linspace(d.nu_min, d.nu_max, 400)
    g = d.ccdf(nu)
    assert g[0] == pytest.approx(1.0, abs=1e-9) and g[-1] == pytest.approx(0.0, abs=1e-9)
    assert np.all(np.diff(g) <= 1e-15)
    assert np.all(d.pdf(nu) >= 0)
