"""Rate bookkeeping shared by the downlink and uplink code.

Rates are carried in bits per channel use; the system spectral efficiency is
in nats. This module is the only place the ln 2 factor appears.
"""

from __future__ import annotations

import math

LN2 = math.log(2.0)
# 2^(2R) - 1 overflows a double beyond this many bits per layer.
MAX_LAYER_RATE = 1023.0 / 2.0


class AllocationOverflowError(OverflowError):
    """A layer rate is too large for 2^(2R) to be represented."""


def eta_to_bits(eta_s: float) -> float:
    """Sum rate in bits for a spectral efficiency in nats."""
    return eta_s / LN2


def bits_to_eta(bits: float) -> float:
    return bits * LN2


def spectral_efficiency(i0: float, total_users: float) -> float:
    """eta_s = ln2 * I0 * U_T."""
    return bits_to_eta(i0 * total_users)


def per_user_rate(eta_s: float, total_users: float) -> float:
    return eta_to_bits(eta_s) / total_users


def layer_gain(rate_bits: float) -> float:
    """SINR needed to carry ``rate_bits`` over a real Gaussian channel: 2^(2R) - 1."""
    if rate_bits < 0:
        raise ValueError(f"layer rate must be >= 0, got {rate_bits}")
    if rate_bits > MAX_LAYER_RATE:
        raise AllocationOverflowError(f"2^(2R) overflows for R={rate_bits} bits")
    return math.expm1(2.0 * LN2 * rate_bits)


def real_awgn_capacity(snr: float) -> float:
    """0.5 * log2(1 + snr) bits per real channel use."""
    return 0.5 * math.log1p(snr) / LN2
