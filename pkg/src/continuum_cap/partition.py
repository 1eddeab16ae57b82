"""Finite partitions of the noise axis and layered superposition power.

Splitting the users into K noise intervals and serving each with one virtual
receiver turns the continuum into an ordinary degraded K-user broadcast
channel. Placing that receiver at the interval's least noisy point (``best``)
gives a power that can only be optimistic; placing it at the noisiest point
(``worst``) gives an achievable one. The two bracket the continuum minimal
power and meet as the partition is refined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .numerics import QuadratureSpec
from .rates import eta_to_bits, layer_gain, per_user_rate, real_awgn_capacity
from .scbc import ETA_CAP, CapacityError, invert_increasing, uniform_capacity
from .scenario import NoiseDistribution

__all__ = [
    "Partition",
    "LayeredAllocation",
    "split",
    "split_uniform_mass",
    "make_partition",
    "downlink_allocation",
    "sandwich_bounds",
    "bounded_capacity",
    "time_sharing_capacity",
    "superposition_gain",
]

SIDES = ("best", "worst")


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Partition:
    """Noise intervals in increasing order, each with its requested rate in bits."""

    intervals: tuple[tuple[float, float, float], ...]
    level: Optional[int] = None

    def __post_init__(self):
        ivs = tuple((float(a), float(b), float(r)) for a, b, r in self.intervals)
        if not ivs:
            raise ValueError("a partition needs at least one interval")
        for k, (lo, hi, rate) in enumerate(ivs):
            if not lo <= hi:
                raise ValueError(f"interval {k} has nu_lo={lo} > nu_hi={hi}")
            if not (rate >= 0 and math.isfinite(rate)):
                raise ValueError(f"interval {k} has invalid rate {rate}")
            if lo < 0:
                raise ValueError(f"interval {k} has negative noise {lo}")
        for k in range(len(ivs) - 1):
            if ivs[k][1] != ivs[k + 1][0]:
                raise ValueError(f"intervals {k} and {k + 1} do not tile: {ivs[k][1]} != {ivs[k + 1][0]}")
        object.__setattr__(self, "intervals", ivs)

    @property
    def size(self) -> int:
        return len(self.intervals)

    @property
    def nu_lo(self) -> np.ndarray:
        return np.array([iv[0] for iv in self.intervals])

    @property
    def nu_hi(self) -> np.ndarray:
        return np.array([iv[1] for iv in self.intervals])

    @property
    def rates(self) -> np.ndarray:
        return np.array([iv[2] for iv in self.intervals])

    @property
    def total_rate(self) -> float:
        return math.fsum(iv[2] for iv in self.intervals)

    def noise(self, side: str) -> np.ndarray:
        if side == "best":
            return self.nu_lo
        if side == "worst":
            return self.nu_hi
        raise ValueError(f"side must be 'best' or 'worst', got {side!r}")

    def with_total_rate(self, rho_total: float) -> "Partition":
        """Same intervals, rates rescaled to sum to ``rho_total``."""
        total = self.total_rate
        if total == 0:
            raise ValueError("cannot rescale a partition with zero total rate")
        c = rho_total / total
        return Partition(tuple((lo, hi, r * c) for lo, hi, r in self.intervals), self.level)

    def merged(self, k: int) -> "Partition":
        """Merge interval ``k`` with interval ``k + 1``."""
        if not 0 <= k < self.size - 1:
            raise IndexError(f"cannot merge interval {k} of {self.size}")
        ivs = list(self.intervals)
        (lo, _, r1), (_, hi, r2) = ivs[k], ivs[k + 1]
        ivs[k : k + 2] = [(lo, hi, r1 + r2)]
        return Partition(tuple(ivs))


@dataclass(frozen=True)
class LayeredAllocation:
    side: str
    direction: str
    layer_powers: np.ndarray
    cumulative: np.ndarray
    total_power: float


def _partition_from_edges(dist: NoiseDistribution, edges, rho_total: float, level=None) -> Partition:
    g = np.asarray(dist.ccdf(np.asarray(edges, dtype=float)), dtype=float)
    g[0], g[-1] = 1.0, 0.0
    mass = np.maximum(-np.diff(g), 0.0)
    mass /= mass.sum()
    rates = rho_total * mass
    return Partition(tuple(zip(edges[:-1], edges[1:], rates)), level)


def split(dist: NoiseDistribution, levels: int, rho_total: float) -> Partition:
    """Dyadic midpoint splitting of the noise support, ``levels`` times.

    Returns 2**levels intervals; an interval without probability mass keeps
    its slot with rate 0.
    """
    if levels < 0:
        raise ValueError(f"levels must be >= 0, got {levels}")
    if rho_total < 0:
        raise ValueError("rho_total must be >= 0")
    edges = [dist.nu_min, dist.nu_max]
    for _ in range(levels):
        refined = []
        for a, b in zip(edges[:-1], edges[1:]):
            refined.extend([a, 0.5 * (a + b)])
        refined.append(edges[-1])
        edges = refined
    return _partition_from_edges(dist, edges, rho_total, level=levels)


def split_uniform_mass(dist: NoiseDistribution, k: int, rho_total: float) -> Partition:
    """K intervals cut at ccdf quantiles, each carrying rho_total / k."""
    if k < 1:
        raise ValueError(f"subset count must be >= 1, got {k}")
    if rho_total < 0:
        raise ValueError("rho_total must be >= 0")
    cuts = [dist.inverse_ccdf(1.0 - j / k) for j in range(1, k)]
    edges = [dist.nu_min, *cuts, dist.nu_max]
    edges = list(np.maximum.accumulate(edges))  # guard against round-off inversions
    share = rho_total / k
    return Partition(tuple((a, b, share) for a, b in zip(edges[:-1], edges[1:])))


def make_partition(dist: NoiseDistribution, k: int, rho_total: float, method: str = "quantile") -> Partition:
    """``quantile`` (equal-rate cuts, any k) or ``dyadic`` (midpoint splits, k a power of two)."""
    if method == "quantile":
        return split_uniform_mass(dist, k, rho_total)
    if method == "dyadic":
        levels = int(round(math.log2(k))) if k >= 1 else -1
        if k < 1 or 2**levels != k:
            raise ValueError(f"dyadic partitions need a power-of-two subset count, got {k}")
        return split(dist, levels, rho_total)
    raise ValueError(f"unknown partition method {method!r}")


def downlink_allocation(partition: Partition, side: str) -> LayeredAllocation:
    """Superposition-coding powers, least noisy layer first.

    Layer k is decoded by its virtual receiver with everything allocated to
    better receivers still present as interference:
    P_k = (2^(2 R_k) - 1) * (nu_k + sum_{q<k} P_q).
    """
    noise = partition.noise(side)
    powers = np.empty(partition.size)
    acc = 0.0
    for k, rate in enumerate(partition.rates):
        p = layer_gain(rate) * (noise[k] + acc)
        powers[k] = p
        acc += p
    if not math.isfinite(acc):
        raise OverflowError("downlink power overflowed")
    return LayeredAllocation(side, "downlink", _frozen(powers), _frozen(np.cumsum(powers)), acc)


def sandwich_bounds(
    dist: NoiseDistribution, eta_s: float, k: int, method: str = "quantile"
) -> tuple[float, float]:
    """(best-side, worst-side) total power for ``eta_s`` nats on a k-subset partition."""
    if eta_s < 0:
        raise ValueError(f"eta_s must be >= 0, got {eta_s}")
    if eta_s == 0:
        return 0.0, 0.0
    part = make_partition(dist, k, eta_to_bits(eta_s), method)
    return (
        downlink_allocation(part, "best").total_power,
        downlink_allocation(part, "worst").total_power,
    )


def bounded_capacity(
    dist: NoiseDistribution,
    power: float,
    total_users: float,
    k: int,
    side: str,
    method: str = "quantile",
    *,
    direction: str = "downlink",
) -> float:
    """Per-user rate that the k-subset best/worst network supports with ``power``.

    The worst side is achievable; the best side is an upper bound on the
    uniform capacity. A best-side network whose powers vanish identically
    (one subset touching nu = 0) returns ``inf``.
    """
    if side not in SIDES:
        raise ValueError(f"side must be 'best' or 'worst', got {side!r}")
    if not total_users > 0:
        raise ValueError(f"total_users must be > 0, got {total_users}")
    if power < 0:
        raise ValueError(f"power must be >= 0, got {power}")
    if power == 0:
        return 0.0
    base = make_partition(dist, k, 1.0, method)
    if direction == "downlink":
        def total(eta):
            return downlink_allocation(base.with_total_rate(eta_to_bits(eta)), side).total_power
    elif direction == "uplink":
        from .scmac import uplink_allocation

        def total(eta):
            return uplink_allocation(base.with_total_rate(eta_to_bits(eta)), side).total_power
    else:
        raise ValueError(f"direction must be 'downlink' or 'uplink', got {direction!r}")
    if side == "best" and total(ETA_CAP) == 0.0:
        return math.inf
    eta = invert_increasing(total, power)
    return per_user_rate(eta, total_users)


def time_sharing_capacity(
    dist: NoiseDistribution,
    power: float,
    total_users: float,
    spec: Optional[QuadratureSpec] = None,
) -> float:
    """Per-user rate under orthogonal full-power scheduling.

    A user with noise nu gets c(nu) = 0.5 log2(1 + P / nu) while scheduled and
    is scheduled a fraction I0 / c(nu) of the time; the fractions of all
    U_T users must sum to one.
    """
    if not power > 0:
        raise ValueError(f"time sharing needs power > 0, got {power}")
    if not total_users > 0:
        raise ValueError(f"total_users must be > 0, got {total_users}")

    def inv_rate(v):
        v = np.asarray(v, dtype=float)
        with np.errstate(divide="ignore"):
            snr = np.where(v > 0, power / np.where(v > 0, v, 1.0), np.inf)
        return 2.0 * np.log(2.0) / np.log1p(snr)

    load = dist.expect(inv_rate, spec)
    if not (math.isfinite(load) and load > 0):
        raise CapacityError(f"time-sharing load integral is {load}")
    return 1.0 / (total_users * load)


def superposition_gain(dist: NoiseDistribution, power: float, spec: Optional[QuadratureSpec] = None) -> float:
    """Relative uniform-capacity gain of superposition coding over time sharing."""
    exact = uniform_capacity(dist, power, 1.0, spec).i0
    return exact / time_sharing_capacity(dist, power, 1.0, spec) - 1.0


def point_to_point_rate(noise: float, power: float) -> float:
    """Single-user rate at equivalent noise ``noise``."""
    return real_awgn_capacity(power / noise) if noise > 0 else math.inf
