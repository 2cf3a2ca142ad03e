import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tradesync.community import Partition
from tradesync.dynamics import CascadeRecord, RunResult, run_ensemble
from tradesync.generators import planted_blocks
from tradesync.metrics import (Histogram, OrderParameterSample, cascade_size_distribution,
                               community_order_parameters, default_fit_range, first_crossing,
                               fit_power_law, order_parameter, r_alpha_vs_r_scatter,
                               samples_from_result, sync_time_distribution)


def _result(sync_time=None, sizes=(), n=5):
    cascades = [CascadeRecord(0, tuple(range(s)), float(k)) for k, s in enumerate(sizes)]
    return RunResult(seed=0, n_nodes=n, cascades=cascades, sync_time=sync_time, final_clock=0.0)


def test_order_parameter_identities():
    assert order_parameter([0.3] * 7) == pytest.approx(1.0, abs=1e-12)
    assert order_parameter([0, 1 / 3, 2 / 3]) <= 1e-12
    assert order_parameter([0, 0.5]) <= 1e-12
    with pytest.raises(ValueError):
        order_parameter([])


@pytest.mark.parametrize("n", range(2, 13))
def test_roots_of_unity(n):
    assert order_parameter(np.arange(n) / n) <= 1e-12


@given(st.lists(st.floats(0, 1, exclude_max=True), min_size=1, max_size=50),
       st.floats(0, 1, exclude_max=True))
def test_rotation_invariance(phases, shift):
    phases = np.array(phases)
    r = order_parameter(phases)
    assert 0 <= r <= 1
    assert order_parameter((phases + shift) % 1.0) == pytest.approx(r, abs=1e-12)


def test_community_order_parameters():
    phases = np.array([0.1, 0.1, 0.6, 0.6])
    part = Partition((0, 0, 1, 1))
    assert np.allclose(community_order_parameters(phases, part), [1, 1])
    assert order_parameter(phases) <= 1e-12
    one = community_order_parameters(phases, [0, 0, 0, 0])
    assert one[0] == pytest.approx(order_parameter(phases))
    single = community_order_parameters([0.3, 0.1, 0.9], [0, 1, 1])
    assert single[0] == pytest.approx(1.0)


@given(st.lists(st.floats(0, 1, exclude_max=True), min_size=2, max_size=30), st.data())
def test_triangle_inequality(phases, data):
    labels = data.draw(st.lists(st.integers(0, 3), min_size=len(phases), max_size=len(phases)))
    part = Partition(tuple(labels))
    ra = community_order_parameters(phases, part)
    weights = np.array(part.sizes) / len(phases)
    assert order_parameter(phases) <= weights @ ra + 1e-12


def test_sync_time_distribution():
    h = sync_time_distribution([_result(10.0)] * 4, 50)
    assert h.counts.tolist() == [4] and h.cumulative_counts[0] == 4
    assert h.bin_edges.tolist() == [0, 50]

    h = sync_time_distribution([_result(10.0), _result(60.0)], 50)
    assert h.cumulative_counts.tolist() == [1, 2]
    assert h.bin_edges.tolist() == [0, 50, 100]

    h = sync_time_distribution([_result(None)] * 3, 50)
    assert h.counts.size == 0 and h.censored == 3

    h = sync_time_distribution([_result(50.0), _result(None)], 50)
    assert h.counts.tolist() == [0, 1] and h.censored == 1
    with pytest.raises(ValueError):
        sync_time_distribution([], 50)
    with pytest.raises(ValueError):
        sync_time_distribution([_result(1.0)], 0)


def test_cascade_size_distribution():
    h = cascade_size_distribution([_result(sizes=(1, 1, 2)), _result(sizes=(5,))])
    assert h.counts.tolist() == [2, 1, 0, 0, 1]
    assert h.bin_edges.tolist() == [1, 2, 3, 4, 5, 6]
    ones = cascade_size_distribution([_result(sizes=(1,) * 9)])
    assert ones.counts[0] == 9 and ones.counts[1:].sum() == 0


def test_histogram_invariants():
    with pytest.raises(ValueError):
        Histogram([0, 1, 2], [1])
    with pytest.raises(ValueError):
        Histogram([0, 2, 1], [1, 1])
    h = Histogram([0, 1, 2, 3], [3, 0, 2], cumulative=True)
    assert h.total == 5 and np.all(np.diff(h.cumulative_counts) >= 0)


def exact_power_law_hist(exponent=-2, smax=100, c=2**12):
    """Integer counts c * s^exponent on powers of two, zero elsewhere (exact in floats)."""
    counts = np.zeros(smax, dtype=np.int64)
    s = 1
    while s <= smax and c * s**exponent >= 1:
        counts[s - 1] = round(c * s**exponent)
        s *= 2
    return Histogram(np.arange(1, smax + 2, dtype=float), counts)


def test_fit_exact_power_law():
    fit = fit_power_law(exact_power_law_hist(), (1, 100))
    assert abs(fit.exponent + 2.0) <= 1e-9
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    assert fit.n_points == 7


def test_fit_flat_and_errors():
    flat = Histogram(np.arange(1, 12, dtype=float), np.full(10, 7))
    fit = fit_power_law(flat, (1, 10))
    assert abs(fit.exponent) <= 1e-9
    with pytest.raises(ValueError, match="at least 3"):
        fit_power_law(Histogram([1, 2], [5]), (1, 1))
    with pytest.raises(ValueError):
        fit_power_law(Histogram([1, 2, 3, 4], [0, 0, 0]), (1, 3))


def test_default_fit_range():
    assert default_fit_range(40) == (2, 20)
    assert default_fit_range(3) == (2, 2)


def test_scatter():
    sample = OrderParameterSample(0.0, 0.5, (0.1, 0.2, 0.3, 0.4))
    rows = r_alpha_vs_r_scatter([sample])
    assert len(rows) == 4 and rows[2] == (0.5, 0.3, 2)
    synced = OrderParameterSample(1.0, 1.0, (1.0, 1.0))
    assert all(r[:2] == (1.0, 1.0) for r in r_alpha_vs_r_scatter([synced] * 3))
    assert r_alpha_vs_r_scatter([]) == []


def test_samples_from_run_respect_triangle_inequality():
    net, part = planted_blocks(3, 6, 10, 0.2)
    weights = np.array(part.sizes) / net.n_nodes
    for res in run_ensemble(net, 3.0, range(5), partition=part):
        for s in samples_from_result(res):
            assert 0 <= s.r_global <= 1 and all(0 <= v <= 1 for v in s.r_by_community)
            assert s.r_global <= weights @ np.array(s.r_by_community) + 1e-12


def test_first_crossing():
    assert first_crossing([0, 1, 2], [0.1, 0.95, 0.99], 0.9) == 1
    assert math.isinf(first_crossing([0, 1], [0.1, 0.2], 0.9))
