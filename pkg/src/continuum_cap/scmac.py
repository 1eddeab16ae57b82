"""Uplink (multiple access) counterpart with successive interference cancellation.

Powers are transferable between users, so only the sum power is budgeted.
The receiver decodes the nearest subset first; the furthest subset is decoded
last, against noise alone, which is why the recursion starts from it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .partition import Partition, downlink_allocation
from .rates import layer_gain

__all__ = ["UplinkAllocation", "DualityReport", "uplink_allocation", "uplink_sinr", "verify_duality"]

DUALITY_TOL = 1e-9


@dataclass(frozen=True)
class UplinkAllocation:
    side: str
    layer_powers: np.ndarray
    decode_order: tuple[int, ...]
    total_power: float


@dataclass(frozen=True)
class DualityReport:
    downlink_total: float
    uplink_total: float
    relative_gap: float

    @property
    def ok(self) -> bool:
        return self.relative_gap <= DUALITY_TOL


def uplink_allocation(partition: Partition, side: str = "worst") -> UplinkAllocation:
    """Transmit powers for SIC decoding of every subset at its requested rate.

    P_k = (2^(2 R_k) - 1) * (1 + sum_{l>k} P_l / nu_l) * nu_k, evaluated from
    the furthest subset inwards. ``nu_k`` is the subset's worst (default) or
    best noise point.
    """
    noise = partition.noise(side)
    if side == "worst" and np.any(noise <= 0):
        raise ValueError("uplink worst-point noises must be > 0")
    K = partition.size
    rates = partition.rates
    powers = np.zeros(K)
    interference = 0.0  # sum of received SNRs of subsets decoded later
    for k in range(K - 1, -1, -1):
        snr_k = layer_gain(rates[k]) * (1.0 + interference)
        powers[k] = snr_k * noise[k]
        interference += snr_k
    total = math.fsum(powers)
    if not math.isfinite(total):
        raise OverflowError("uplink power overflowed")
    powers.setflags(write=False)
    return UplinkAllocation(side, powers, tuple(range(K)), total)


def uplink_sinr(alloc: UplinkAllocation, partition: Partition) -> np.ndarray:
    """Post-cancellation SINR of each subset, in decoding order."""
    noise = partition.noise(alloc.side)
    snr = np.asarray(alloc.layer_powers) / noise
    later = np.concatenate([np.cumsum(snr[::-1])[::-1][1:], [0.0]])
    return snr / (1.0 + later)


def verify_duality(partition: Partition) -> DualityReport:
    """Compare worst-side uplink and downlink sum powers on one partition."""
    down = downlink_allocation(partition, "worst").total_power
    up = uplink_allocation(partition, "worst").total_power
    scale = max(abs(down), abs(up))
    gap = 0.0 if scale == 0 else abs(down - up) / scale
    return DualityReport(down, up, gap)
