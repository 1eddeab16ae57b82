import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from continuum_cap.partition import Partition, downlink_allocation, split_uniform_mass
from continuum_cap.scenario import disk_noise_distribution
from continuum_cap.scmac import DUALITY_TOL, uplink_allocation, uplink_sinr, verify_duality

from test_partition import partitions


def test_uplink_examples():
    zero = uplink_allocation(Partition(((0.0, 1.0, 0.0), (1.0, 2.0, 0.0))))
    assert zero.total_power == 0.0
    single = uplink_allocation(Partition(((0.0, 3.0, 1.0),)))
    assert single.total_power == pytest.approx(3.0 * 3.0)
    two = uplink_allocation(Partition(((0.0, 1.0, 0.5), (1.0, 2.0, 0.5))))
    assert two.layer_powers.tolist() == pytest.approx([2.0, 2.0], rel=1e-15)
    assert two.total_power == pytest.approx(4.0, rel=1e-15)
    assert two.decode_order == (0, 1)


def test_duality_examples():
    rep = verify_duality(Partition(((0.0, 1.0, 0.5), (1.0, 2.0, 0.5))))
    assert rep.downlink_total == pytest.approx(4.0) and rep.uplink_total == pytest.approx(4.0)
    assert rep.relative_gap == 0.0 and rep.ok
    assert verify_duality(Partition(((0.0, 2.0, 1.3),))).relative_gap == 0.0


def test_duality_on_quantile_partition():
    d = disk_noise_distribution(3.65, 1.0)
    rep = verify_duality(split_uniform_mass(d, 16, 5.0))
    assert rep.relative_gap <= DUALITY_TOL


def test_worst_noise_must_be_positive():
    with pytest.raises(ValueError):
        uplink_allocation(Partition(((0.0, 0.0, 1.0), (0.0, 1.0, 1.0))))


@settings(max_examples=200, deadline=None)
@given(partitions())
def test_random_duality(part):
    assert verify_duality(part).relative_gap <= DUALITY_TOL


@settings(max_examples=100, deadline=None)
@given(partitions(max_k=40))
def test_uplink_meets_rates_exactly(part):
    alloc = uplink_allocation(part)
    assert np.all(alloc.layer_powers >= 0)
    sinr = uplink_sinr(alloc, part)
    rates = 0.5 * np.log2(1 + sinr)
    assert np.allclose(rates, part.rates, rtol=1e-10, atol=1e-12)


def test_per_layer_powers_differ():
    part = Partition(((0.0, 1.0, 0.7), (1.0, 2.5, 0.4), (2.5, 4.0, 1.1)))
    up = uplink_allocation(part).layer_powers
    down = downlink_allocation(part, "worst").layer_powers
    assert up.sum() == pytest.approx(down.sum(), rel=1e-14)
    assert not np.allclose(up, down)


@settings(max_examples=100, deadline=None)
@given(partitions(max_k=20), st.data(), st.floats(1e-3, 1.0))
def test_uplink_monotone_in_rate_and_noise(part, data, bump):
    k = data.draw(st.integers(0, part.size - 1))
    base = uplink_allocation(part).total_power
    ivs = list(part.intervals)
    lo, hi, r = ivs[k]
    ivs[k] = (lo, hi, r + bump)
    assert uplink_allocation(Partition(tuple(ivs))).total_power > base
    # raise the top noise of interval k and shift everything above it
    shifted = []
    for j, (a, b, rr) in enumerate(part.intervals):
        if j > k:
            a += bump
        if j >= k:
            b += bump
        shifted.append((a, b, rr))
    assert uplink_allocation(Partition(tuple(shifted))).total_power >= base
