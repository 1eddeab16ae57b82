"""Cell geometry and the equivalent-noise distribution it induces.

A user at distance ``r`` from the base station behaves like a receiver with
noise variance ``nu(r) = sigma2 / h(r)``. Every capacity computation in this
package only needs the distribution of that scalar over the users (or over
the requested traffic): its ccdf ``G`` and pdf ``f = -G'``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.interpolate import PchipInterpolator

from .numerics import QuadratureSpec, RootBracket, bisect_monotone, integrate

__all__ = [
    "PathlossModel",
    "UniformDensity",
    "RadialProfile",
    "PointMass",
    "Scenario",
    "NoiseDistribution",
    "TrafficProfile",
    "noise_at",
    "disk_noise_distribution",
    "narrow_noise_distribution",
    "derive_noise_distribution",
    "traffic_to_noise_distribution",
]

# Relative half-width used when a point mass is smeared into a narrow uniform law.
POINT_MASS_HALF_WIDTH = 1e-6
# Smallest tabulated radius, as a fraction of the cell radius.
_RADIAL_FLOOR = 1e-6


@dataclass(frozen=True)
class PathlossModel:
    h0: float
    alpha: float

    def __post_init__(self):
        if not self.h0 > 0:
            raise ValueError(f"pathloss h0 must be > 0, got {self.h0}")
        if not self.alpha > 0:
            raise ValueError(f"pathloss alpha must be > 0, got {self.alpha}")

    def gain(self, r):
        return self.h0 * np.power(r, -self.alpha)


# --------------------------------------------------------------------------
# radial densities (users or traffic per m^2, rotationally symmetric)


@dataclass(frozen=True)
class UniformDensity:
    u0: float

    def __post_init__(self):
        if not (self.u0 > 0 and math.isfinite(self.u0)):
            raise ValueError(f"uniform density u0 must be positive and finite, got {self.u0}")

    def cumulative(self, r):
        """Mass inside radius ``r``."""
        return self.u0 * math.pi * np.square(r)

    def breakpoints(self) -> tuple[float, ...]:
        return ()

    def scaled(self, c: float) -> "UniformDensity":
        return UniformDensity(self.u0 * c)


@dataclass(frozen=True)
class RadialProfile:
    """Piecewise-linear density u(r) given at increasing radii.

    Repeated radii encode jumps; the density is zero beyond the table.
    """

    radii: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        u = np.asarray(self.values, dtype=float)
        if r.ndim != 1 or r.shape != u.shape or r.size < 2:
            raise ValueError("radial profile needs matching radii/values with at least two points")
        if r[0] < 0 or np.any(np.diff(r) < 0):
            raise ValueError("radial profile radii must be non-negative and non-decreasing")
        if np.any(u < 0) or not np.all(np.isfinite(u)):
            raise ValueError("radial profile values must be finite and non-negative")
        object.__setattr__(self, "radii", tuple(float(x) for x in r))
        object.__setattr__(self, "values", tuple(float(x) for x in u))
        # segment masses of 2 pi r u(r) with u linear: exact
        r0, r1, u0, u1 = r[:-1], r[1:], u[:-1], u[1:]
        seg = _linear_ring_mass(r0, r1, u0, u1, r1)
        object.__setattr__(self, "_prefix", np.concatenate([[0.0], np.cumsum(seg)]))

    def cumulative(self, r):
        r = np.asarray(r, dtype=float)
        radii = np.asarray(self.radii)
        u = np.asarray(self.values)
        idx = np.clip(np.searchsorted(radii, r, side="right") - 1, 0, radii.size - 2)
        r0, r1, u0, u1 = radii[idx], radii[idx + 1], u[idx], u[idx + 1]
        upper = np.clip(r, r0, r1)
        partial = _linear_ring_mass(r0, r1, u0, u1, upper)
        out = self._prefix[idx] + partial
        out = np.where(r < radii[0], 0.0, out)
        out = np.where(r >= radii[-1], self._prefix[-1], out)
        return out if out.ndim else float(out)

    def breakpoints(self) -> tuple[float, ...]:
        return self.radii

    def scaled(self, c: float) -> "RadialProfile":
        return RadialProfile(self.radii, tuple(c * v for v in self.values))


def _linear_ring_mass(r0, r1, u0, u1, x):
    """Integral of 2 pi r u(r) over [r0, x] with u linear between (r0, u0), (r1, u1)."""
    width = np.asarray(r1 - r0, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = np.where(width > 0, (u1 - u0) / np.where(width > 0, width, 1.0), 0.0)
    a = u0 - slope * r0  # u(r) = a + slope * r
    return 2.0 * math.pi * (a * (x**2 - r0**2) / 2.0 + slope * (x**3 - r0**3) / 3.0)


@dataclass(frozen=True)
class PointMass:
    """All mass on the circle of radius ``r0``."""

    r0: float
    mass: float = 1.0

    def __post_init__(self):
        if not self.r0 > 0:
            raise ValueError(f"point-mass radius must be > 0, got {self.r0}")
        if not self.mass > 0:
            raise ValueError("point mass must be positive")

    def cumulative(self, r):
        return np.where(np.asarray(r) >= self.r0, self.mass, 0.0)

    def breakpoints(self) -> tuple[float, ...]:
        return (self.r0,)

    def scaled(self, c: float) -> "PointMass":
        return PointMass(self.r0, self.mass * c)


Density = Union[UniformDensity, RadialProfile, PointMass]


@dataclass(frozen=True)
class Scenario:
    """A single disk cell with the base station at its centre.

    ``total_users`` defaults to the integral of the density over the disk;
    if given explicitly it must match that integral.
    """

    radius: float
    pathloss: PathlossModel
    sigma2: float
    power_budget: float
    density: Density
    total_users: Optional[float] = None

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"cell radius must be > 0, got {self.radius}")
        if not self.sigma2 > 0:
            raise ValueError(f"noise variance sigma2 must be > 0, got {self.sigma2}")
        if not self.power_budget >= 0:
            raise ValueError(f"power budget must be >= 0, got {self.power_budget}")
        mass = float(self.density.cumulative(self.radius))
        if not (mass > 0 and math.isfinite(mass)):
            raise ValueError(f"user density integrates to {mass} over the cell")
        if self.total_users is None:
            object.__setattr__(self, "total_users", mass)
        elif abs(self.total_users - mass) > 1e-9 * mass:
            raise ValueError(
                f"total_users={self.total_users} disagrees with the density integral {mass}"
            )

    @property
    def nu_edge(self) -> float:
        return noise_at(self, self.radius)

    @property
    def edge_snr(self) -> float:
        return self.power_budget / self.nu_edge


@dataclass(frozen=True)
class TrafficProfile:
    """Requested traffic ``rho_total * f(x)`` with ``f`` integrating to one over the cell."""

    rho_total: float
    shape: Density

    def __post_init__(self):
        if not self.rho_total >= 0:
            raise ValueError("rho_total must be >= 0")

    def normalized(self, radius: float) -> "TrafficProfile":
        mass = float(self.shape.cumulative(radius))
        if not (mass > 0 and math.isfinite(mass)):
            raise ValueError(f"traffic shape integrates to {mass} over the cell")
        return TrafficProfile(self.rho_total, self.shape.scaled(1.0 / mass))

    def check_normalized(self, radius: float) -> None:
        mass = float(self.shape.cumulative(radius))
        if abs(mass - 1.0) > 1e-8:
            raise ValueError(f"traffic shape must integrate to 1 over the cell, got {mass}")


# --------------------------------------------------------------------------
# noise distributions


@dataclass(frozen=True)
class NoiseDistribution:
    """Distribution of the equivalent noise over the users (or traffic).

    ``lower_exponent`` is the power p with f(nu) ~ (nu - nu_min)^p near the
    lower end; quadrature uses it to remove integrable singularities.
    ``quantile(g)`` returns a noise level with ccdf ``g``.
    """

    nu_min: float
    nu_max: float
    pdf: Callable
    ccdf: Callable
    kind: str
    quantile: Optional[Callable[[float], float]] = None
    lower_exponent: float = 0.0
    breakpoints: tuple[float, ...] = field(default=(), repr=False)

    def __post_init__(self):
        if not (self.nu_min >= 0 and self.nu_max > self.nu_min):
            raise ValueError(f"invalid noise support [{self.nu_min}, {self.nu_max}]")

    def inverse_ccdf(self, g: float) -> float:
        if not 0.0 <= g <= 1.0:
            raise ValueError(f"ccdf level must lie in [0, 1], got {g}")
        if g == 1.0:
            return self.nu_min
        if g == 0.0:
            return self.nu_max
        if self.quantile is not None:
            return float(self.quantile(g))
        width = self.nu_max - self.nu_min
        return bisect_monotone(
            lambda v: float(self.ccdf(v)), g, RootBracket(self.nu_min, self.nu_max, 1e-13, 1e-14 * width)
        )

    def expect(self, h: Callable, spec: Optional[QuadratureSpec] = None, *, extra_exponent: float = 0.0) -> float:
        """Integral of ``h(nu) f(nu)`` over the support.

        ``extra_exponent`` is the power with which ``h`` itself vanishes at
        the lower end, used together with ``lower_exponent`` to pick the
        smoothing substitution.
        """
        spec = spec or QuadratureSpec()

        def integrand(v):
            return h(v) * self.pdf(v)

        p = self.lower_exponent + extra_exponent
        singular = None if p == 0.0 else p
        return integrate(
            integrand,
            self.nu_min,
            self.nu_max,
            spec,
            singularity=(singular, None),
            breakpoints=self.breakpoints,
            vectorized=True,
        )

    def mean(self) -> float:
        return self.expect(lambda v: v, extra_exponent=1.0 if self.nu_min == 0 else 0.0)


def noise_at(scenario: Scenario, r: float) -> float:
    """Equivalent noise sigma2 / h(r) of a user at distance ``r``."""
    if not 0 < r <= scenario.radius:
        raise ValueError(f"radius {r} outside the cell (0, {scenario.radius}]")
    return scenario.sigma2 / float(scenario.pathloss.gain(r))


def disk_noise_distribution(alpha: float, nu_edge: float) -> NoiseDistribution:
    """Uniform users on a disk with power-law pathloss.

    G(nu) = 1 - (nu / nu_edge)^(2 / alpha) on (0, nu_edge].
    """
    if not alpha > 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    if not nu_edge > 0:
        raise ValueError(f"edge noise must be > 0, got {nu_edge}")
    k = 2.0 / alpha

    def ccdf(v):
        t = np.clip(np.asarray(v, dtype=float) / nu_edge, 0.0, 1.0)
        out = 1.0 - t**k
        return out if out.ndim else float(out)

    def pdf(v):
        v = np.asarray(v, dtype=float)
        t = v / nu_edge
        inside = (t > 0) & (t <= 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(inside, k / nu_edge * np.where(inside, t, 1.0) ** (k - 1.0), 0.0)
        out = np.where(t == 0, np.inf if k < 1 else (k / nu_edge if k == 1 else 0.0), out)
        return out if out.ndim else float(out)

    def quantile(g):
        return nu_edge * (1.0 - g) ** (alpha / 2.0)

    return NoiseDistribution(0.0, nu_edge, pdf, ccdf, "analytic-disk", quantile, k - 1.0)


def narrow_noise_distribution(nu0: float, half_width: Optional[float] = None) -> NoiseDistribution:
    """Stand-in for a point mass at ``nu0``: uniform on [nu0 - w, nu0 + w]."""
    if not nu0 > 0:
        raise ValueError(f"point-mass noise must be > 0, got {nu0}")
    w = POINT_MASS_HALF_WIDTH * nu0 if half_width is None else half_width
    if not 0 < w < nu0:
        raise ValueError(f"half-width must lie in (0, nu0), got {w}")
    lo, hi = nu0 - w, nu0 + w

    def ccdf(v):
        v = np.asarray(v, dtype=float)
        out = np.clip((hi - v) / (2 * w), 0.0, 1.0)
        out = np.where(v <= lo, 1.0, out)
        return out if out.ndim else float(out)

    def pdf(v):
        v = np.asarray(v, dtype=float)
        out = np.where((v >= lo) & (v <= hi), 1.0 / (2 * w), 0.0)
        return out if out.ndim else float(out)

    def quantile(g):
        return hi - 2 * w * g

    return NoiseDistribution(lo, hi, pdf, ccdf, "uniform", quantile, 0.0)


def _radial_distribution(density: Density, scenario: Scenario, grid_size: int) -> NoiseDistribution:
    if grid_size < 16:
        raise ValueError(f"grid_size must be >= 16, got {grid_size}")
    R = scenario.radius
    alpha = scenario.pathloss.alpha
    total = float(density.cumulative(R))
    if not (total > 0 and math.isfinite(total)):
        raise ValueError(f"density integrates to {total} over the cell")
    if isinstance(density, PointMass):
        if density.r0 > R:
            raise ValueError("point mass lies outside the cell")
        return narrow_noise_distribution(noise_at(scenario, density.r0))

    scale = scenario.sigma2 / scenario.pathloss.h0  # nu = scale * r^alpha
    radii = R * np.geomspace(_RADIAL_FLOOR, 1.0, grid_size)
    extra = [b for b in density.breakpoints() if _RADIAL_FLOOR * R < b < R]
    radii = np.unique(np.concatenate([radii, extra]))
    ccdf_nodes = 1.0 - np.asarray(density.cumulative(radii), dtype=float) / total
    ccdf_nodes = np.minimum.accumulate(np.clip(ccdf_nodes, 0.0, 1.0))
    ccdf_nodes[-1] = 0.0
    log_nu = math.log(scale) + alpha * np.log(radii)
    nu_nodes = np.exp(log_nu)
    nu_edge = float(nu_nodes[-1])
    nu_first = float(nu_nodes[0])
    head = 1.0 - float(ccdf_nodes[0])  # mass below the first node
    k = 2.0 / alpha  # mass ~ r^2 near the origin
    spline = PchipInterpolator(log_nu, ccdf_nodes, extrapolate=False)
    slope = spline.derivative()

    def ccdf(v):
        v = np.asarray(v, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            x = np.log(np.clip(v, nu_first, nu_edge))
            body = spline(x)
            low = 1.0 - head * np.clip(v / nu_first, 0.0, 1.0) ** k
        out = np.where(v < nu_first, low, body)
        out = np.where(v >= nu_edge, 0.0, out)
        out = np.clip(out, 0.0, 1.0)
        return out if out.ndim else float(out)

    def pdf(v):
        v = np.asarray(v, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            x = np.log(np.clip(v, nu_first, nu_edge))
            body = -slope(x) / np.clip(v, nu_first, nu_edge)
            t = np.clip(v / nu_first, 0.0, 1.0)
            low = head * k * t**k / np.where(v > 0, v, 1.0)
            low = np.where(v > 0, low, np.inf if (head > 0 and k < 1) else 0.0)
        out = np.where(v < nu_first, low, np.maximum(body, 0.0))
        out = np.where((v > nu_edge) | (v < 0), 0.0, out)
        return out if out.ndim else float(out)

    def quantile(g):
        if g > 1.0 - head:
            return nu_first * ((1.0 - g) / head) ** (alpha / 2.0) if head > 0 else 0.0
        # nodes are non-increasing in ccdf; find the segment holding g
        j = int(np.searchsorted(-ccdf_nodes, -g, side="left"))
        j = min(max(j, 1), len(ccdf_nodes) - 1)
        lo_x, hi_x = log_nu[j - 1], log_nu[j]
        if ccdf_nodes[j - 1] == ccdf_nodes[j]:
            return float(np.exp(lo_x))
        x = bisect_monotone(lambda s: float(spline(s)), g, RootBracket(lo_x, hi_x, 1e-14, 1e-13))
        return float(np.exp(x))

    return NoiseDistribution(
        0.0, nu_edge, pdf, ccdf, "tabulated", quantile, k - 1.0, tuple(float(v) for v in nu_nodes[:-1])
    )


def derive_noise_distribution(scenario: Scenario, grid_size: int = 1024) -> NoiseDistribution:
    """Tabulate the user-noise ccdf of ``scenario`` on a geometric noise grid.

    Node values are exact for the supported densities (the radial mass is
    integrated in closed form); between nodes the ccdf is a monotone cubic
    in log(nu). Below the first node users are taken as locally uniform,
    which keeps the nu -> 0 behaviour of the pdf analytic.
    """
    return _radial_distribution(scenario.density, scenario, grid_size)


def traffic_to_noise_distribution(
    profile: TrafficProfile, scenario: Scenario, grid_size: int = 1024
) -> NoiseDistribution:
    """Noise distribution weighted by requested traffic instead of users."""
    profile.check_normalized(scenario.radius)
    return _radial_distribution(profile.shape, scenario, grid_size)


def tabulate_ccdf(dist: NoiseDistribution, nu: Sequence[float]) -> np.ndarray:
    """Two-column (nu, G) array for CSV export."""
    nu = np.asarray(nu, dtype=float)
    return np.column_stack([nu, np.asarray(dist.ccdf(nu), dtype=float)])
