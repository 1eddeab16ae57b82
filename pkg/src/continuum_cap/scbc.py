"""Downlink (broadcast) capacity of a spatial continuum of users.

The central quantity is the minimal transmit power that serves a spectral
efficiency ``eta_s`` (nats per channel use) to a noise distribution:

    P(eta_s) = 2 eta_s * integral of nu f(nu) exp(2 eta_s G(nu)) dnu

It is evaluated three ways: direct quadrature, the equivalent linear ODE
P'(nu) = 2 eta_s f(nu) (nu + P(nu)), and, for the uniform disk, a closed form
in the lower incomplete gamma function. Capacities are obtained by
inverting P, which is continuous and strictly increasing in ``eta_s``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .numerics import (
    IntegrationError,
    QuadratureSpec,
    RootBracket,
    bisect_monotone,
    kummer_1f1,
    lower_incomplete_gamma,
    solve_ode,
    upper_incomplete_gamma,
)
from .rates import LN2, per_user_rate
from .scenario import NoiseDistribution

__all__ = [
    "CapacityError",
    "CapacityResult",
    "ETA_CAP",
    "min_power",
    "min_power_ode",
    "disk_min_power_closed",
    "printed_disk_min_power",
    "disk_uniform_capacity",
    "uniform_capacity",
    "max_sum_rate",
    "invert_increasing",
]

# Largest spectral efficiency the inversions will search, in nats.
ETA_CAP = 64.0


class CapacityError(ArithmeticError):
    """The requested power is out of reach of the searched rate range."""


@dataclass(frozen=True)
class CapacityResult:
    i0: float
    eta_s: float
    min_power: float
    edge_snr: Optional[float] = None


def _integrand_exponent(dist: NoiseDistribution) -> float:
    # nu itself vanishes to first order at nu_min = 0
    return 1.0 if dist.nu_min == 0 else 0.0


def min_power(dist: NoiseDistribution, eta_s: float, spec: Optional[QuadratureSpec] = None) -> float:
    """Minimal power serving ``eta_s`` nats per channel use, by quadrature."""
    if eta_s < 0:
        raise ValueError(f"eta_s must be >= 0, got {eta_s}")
    if eta_s == 0:
        return 0.0
    two_eta = 2.0 * eta_s

    def weight(v):
        return v * np.exp(two_eta * dist.ccdf(v))

    try:
        value = dist.expect(weight, spec, extra_exponent=_integrand_exponent(dist))
    except IntegrationError as exc:
        raise IntegrationError(f"min_power quadrature failed at eta_s={eta_s}", exc.value, exc.error) from exc
    return two_eta * value


def min_power_ode(dist: NoiseDistribution, eta_s: float, step_tol: float = 1e-12) -> float:
    """Minimal power by integrating the accumulated-power ODE from nu_min to nu_max.

    The noise axis is reparametrised as nu = nu_min + (nu_max - nu_min) s^m with
    m = 1 / (1 + p), p being the pdf's exponent at nu_min, so the right-hand
    side stays bounded. Tabulated distributions are integrated node to node.
    """
    if eta_s < 0:
        raise ValueError(f"eta_s must be >= 0, got {eta_s}")
    if eta_s == 0:
        return 0.0
    lo, hi = dist.nu_min, dist.nu_max
    width = hi - lo
    m = 1.0 / (1.0 + dist.lower_exponent)
    two_eta = 2.0 * eta_s
    s_floor = 1e-12

    def nu_of(s):
        return lo + width * s**m

    def rhs(s, y):
        s = max(s, s_floor)
        v = nu_of(s)
        jac = width * m * s ** (m - 1.0)
        return two_eta * dist.pdf(v) * jac * (v + y)

    knots = [0.0]
    for b in dist.breakpoints:
        if lo < b < hi:
            knots.append(((b - lo) / width) ** (1.0 / m))
    knots.append(1.0)
    knots = sorted(set(knots))
    y = 0.0
    for a, b in zip(knots[:-1], knots[1:]):
        y = solve_ode(rhs, a, y, b, step_tol, first_step=(b - a) * 0.05)
    return float(y)


def disk_min_power_closed(alpha: float, nu_edge: float, eta_s: float, *, form: str = "gamma") -> float:
    """Closed-form minimal power for uniformly spread users on a disk.

    With a = 1 + alpha/2 and x = 2 eta_s,

        P = nu_edge * e^x * x^(-alpha/2) * gamma(a, x)
          = nu_edge * (x / a) * 1F1(1; a + 1; x),

    ``form`` selects which of the two equivalent expressions is evaluated.
    """
    if not alpha > 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    if eta_s < 0:
        raise ValueError(f"eta_s must be >= 0, got {eta_s}")
    if eta_s == 0:
        return 0.0
    a = 1.0 + alpha / 2.0
    x = 2.0 * eta_s
    if form == "gamma":
        log_scale = x - (alpha / 2.0) * math.log(x)
        return nu_edge * math.exp(log_scale) * lower_incomplete_gamma(a, x)
    if form == "kummer":
        return nu_edge * (x / a) * kummer_1f1(1.0, a + 1.0, x)
    raise ValueError(f"unknown closed form {form!r}")


def printed_disk_min_power(alpha: float, nu_edge: float, eta_s: float) -> float:
    """nu_edge * 2 eta_s * e^(2 eta_s) * Gamma(1 + alpha/2, 2 eta_s), upper incomplete gamma.

    Kept only to document that this expression does not reproduce the
    quadrature; :func:`disk_min_power_closed` is the consistent form.
    """
    x = 2.0 * eta_s
    return nu_edge * x * math.exp(x) * upper_incomplete_gamma(1.0 + alpha / 2.0, x)


def invert_increasing(power_of_eta, power: float, *, eta_cap: float = ETA_CAP, what: str = "power") -> float:
    """Find eta with power_of_eta(eta) = power for a continuous increasing map with value 0 at 0.

    The upper bracket doubles from 0.5 until it overshoots; the search gives up
    at ``eta_cap``. Tolerances: 1e-10 absolute on eta, 1e-9 relative on power.
    """
    if power < 0:
        raise ValueError(f"{what} must be >= 0, got {power}")
    if power == 0:
        return 0.0
    hi = 0.5
    while power_of_eta(hi) <= power:
        if hi >= eta_cap:
            raise CapacityError(f"{what}={power!r} needs eta_s beyond the search cap {eta_cap}")
        hi = min(2.0 * hi, eta_cap)
    return bisect_monotone(
        lambda e: power_of_eta(e) / power, 1.0, RootBracket(0.0, hi, tol=1e-9, xtol=1e-10)
    )


def uniform_capacity(
    dist: NoiseDistribution,
    power: float,
    total_users: float,
    spec: Optional[QuadratureSpec] = None,
) -> CapacityResult:
    """Largest per-user rate I0 (bits per channel use) deliverable with ``power``."""
    if not total_users > 0:
        raise ValueError(f"total_users must be > 0, got {total_users}")
    edge_snr = power / dist.nu_max if dist.kind in ("analytic-disk", "tabulated") else None
    eta = invert_increasing(lambda e: min_power(dist, e, spec), power)
    p = min_power(dist, eta, spec) if eta > 0 else 0.0
    return CapacityResult(per_user_rate(eta, total_users), eta, p, edge_snr)


def disk_uniform_capacity(alpha: float, edge_snr: float, total_users: float = 1.0) -> float:
    """Per-user uniform capacity of a disk cell from its edge SNR alone.

    Inverts x -> (x / (1 + alpha/2)) 1F1(1; 2 + alpha/2; x) for x = 2 eta_s and
    returns x / (2 ln2 U_T).
    """
    if edge_snr < 0:
        raise ValueError(f"edge SNR must be >= 0, got {edge_snr}")
    eta = invert_increasing(lambda e: disk_min_power_closed(alpha, 1.0, e, form="kummer"), edge_snr)
    return (2.0 * eta) / (2.0 * LN2 * total_users)


def max_sum_rate(dist: NoiseDistribution, power_budget: float, spec: Optional[QuadratureSpec] = None) -> float:
    """Largest sum rate rho_T (bits) for the traffic shape behind ``dist``.

    ``dist`` is the traffic-weighted noise distribution; the boundary point
    solves rho_T * integral of nu f(nu) 2^(2 rho_T G(nu)) dnu = P_t / (2 ln2).
    """
    budget = power_budget / (2.0 * LN2)

    def load(rho):
        if rho == 0:
            return 0.0
        k = 2.0 * LN2 * rho
        return rho * dist.expect(lambda v: v * np.exp(k * dist.ccdf(v)), spec, extra_exponent=_integrand_exponent(dist))

    if power_budget < 0:
        raise ValueError(f"power budget must be >= 0, got {power_budget}")
    return invert_increasing(load, budget, eta_cap=ETA_CAP / LN2, what="power budget")
