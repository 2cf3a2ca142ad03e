"""Order parameters, sync-time and cascade-size histograms, log-log power-law fits."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class OrderParameterSample:
    clock: float
    r_global: float
    r_by_community: tuple[float, ...] = ()


@dataclass(frozen=True, eq=False)
class Histogram:
    bin_edges: np.ndarray
    counts: np.ndarray
    cumulative: bool = False
    # samples left out of the bins, e.g. replicas that never synchronized
    censored: int = 0

    def __post_init__(self):
        edges = np.asarray(self.bin_edges, dtype=float)
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.size != max(edges.size - 1, 0):
            raise ValueError("need len(counts) == len(bin_edges) - 1")
        if np.any(np.diff(edges) <= 0):
            raise ValueError("bin edges must be strictly increasing")
        if np.any(counts < 0):
            raise ValueError("counts must be nonnegative")
        object.__setattr__(self, "bin_edges", edges)
        object.__setattr__(self, "counts", counts)

    @property
    def cumulative_counts(self) -> np.ndarray:
        return np.cumsum(self.counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def rows(self) -> list[tuple]:
        lows, highs = self.bin_edges[:-1], self.bin_edges[1:]
        if self.cumulative:
            return list(zip(lows.tolist(), highs.tolist(), self.counts.tolist(),
                            self.cumulative_counts.tolist()))
        return list(zip(lows.tolist(), highs.tolist(), self.counts.tolist()))


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    intercept: float
    fit_range: tuple[float, float]
    r_squared: float
    n_points: int


def order_parameter(phases) -> float:
    """Modulus of the mean unit phasor ``exp(2 pi i phi)``."""
    phi = np.asarray(phases, dtype=float)
    if phi.size == 0:
        raise ValueError("order parameter of an empty phase vector")
    angle = 2.0 * np.pi * phi
    r = math.hypot(float(np.cos(angle).mean()), float(np.sin(angle).mean()))
    return min(r, 1.0)


def community_order_parameters(phases, partition) -> np.ndarray:
    """``r_alpha`` for every community, in community-id order."""
    phi = np.asarray(phases, dtype=float)
    labels = np.asarray(getattr(partition, "assignment", partition), dtype=np.int64)
    if labels.size != phi.size:
        raise ValueError("partition does not cover the phase vector")
    m = int(labels.max()) + 1
    sizes = np.bincount(labels, minlength=m)
    if np.any(sizes == 0):
        raise ValueError("partition has an empty community")
    angle = 2.0 * np.pi * phi
    c = np.bincount(labels, weights=np.cos(angle), minlength=m) / sizes
    s = np.bincount(labels, weights=np.sin(angle), minlength=m) / sizes
    return np.minimum(np.hypot(c, s), 1.0)


def sync_time_distribution(results: Sequence, bin_width: float = 50.0) -> Histogram:
    """Cumulative histogram of sync times over replicas that synchronized.

    Bins are ``[k w, (k+1) w)`` from 0 up to the bin holding the latest
    time; non-synchronizing replicas go to ``censored``.
    """
    if not bin_width > 0:
        raise ValueError("bin_width must be positive")
    results = list(results)
    if not results:
        raise ValueError("no replicas")
    times = np.array([r.sync_time for r in results if r.sync_time is not None], dtype=float)
    censored = len(results) - times.size
    if times.size == 0:
        return Histogram(np.zeros(1), np.zeros(0, dtype=np.int64), cumulative=True, censored=censored)
    idx = np.floor(times / bin_width).astype(np.int64)
    n_bins = int(idx.max()) + 1
    edges = bin_width * np.arange(n_bins + 1, dtype=float)
    counts = np.bincount(idx, minlength=n_bins)
    return Histogram(edges, counts, cumulative=True, censored=censored)


def cascade_size_distribution(results: Sequence, n_nodes: int | None = None) -> Histogram:
    """Pooled counts of cascade sizes, unit bins ``[s, s+1)`` for s = 1..N."""
    results = list(results)
    if not results:
        raise ValueError("empty ensemble")
    n = n_nodes if n_nodes is not None else max(r.n_nodes for r in results)
    sizes = np.fromiter((c.size for r in results for c in r.cascades), dtype=np.int64)
    counts = np.bincount(sizes, minlength=n + 1)[1:]
    if counts.size > n:
        raise ValueError("cascade larger than the network")
    return Histogram(np.arange(1, n + 2, dtype=float), counts)


def default_fit_range(n_nodes: int) -> tuple[int, int]:
    """Sizes 2..N/2: skips single firings and the finite-size bump."""
    return 2, max(2, n_nodes // 2)


def fit_power_law(hist: Histogram, fit_range: tuple[float, float] | None = None) -> PowerLawFit:
    """Least-squares line through (log10 size, log10 frequency).

    A bin's size coordinate is its lower edge, which for the unit bins of
    :func:`cascade_size_distribution` is the cascade size itself. Frequencies
    are counts normalized by the histogram total. Empty bins are skipped.
    """
    lows = hist.bin_edges[:-1]
    if fit_range is None:
        fit_range = (1.0, float(lows[-1])) if lows.size else (1.0, 1.0)
    lo, hi = fit_range
    if lo < 1 or hi < lo:
        raise ValueError(f"bad fit range {fit_range}")
    sel = (lows >= lo) & (lows <= hi) & (hist.counts > 0)
    if sel.sum() < 3:
        raise ValueError(f"need at least 3 nonzero bins in {fit_range}, found {int(sel.sum())}")
    x = np.log10(lows[sel])
    y = np.log10(hist.counts[sel] / hist.total)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot <= 1e-24 else max(0.0, 1.0 - ss_res / ss_tot)
    return PowerLawFit(float(slope), float(intercept), (lo, hi), r2, int(sel.sum()))


def samples_from_result(result) -> list[OrderParameterSample]:
    ra = result.r_alpha
    return [OrderParameterSample(float(t), float(r), tuple(float(v) for v in ra[k]))
            for k, (t, r) in enumerate(zip(result.sample_times, result.r))]


def r_alpha_vs_r_scatter(samples: Iterable[OrderParameterSample]) -> list[tuple[float, float, int]]:
    """One ``(r, r_alpha, community)`` row per sample and community."""
    return [(s.r_global, ra, alpha) for s in samples for alpha, ra in enumerate(s.r_by_community)]


def first_crossing(times, values, level: float) -> float:
    """Earliest time with ``values >= level``; ``inf`` if never."""
    values = np.asarray(values)
    hit = np.flatnonzero(values >= level)
    return float(np.asarray(times)[hit[0]]) if hit.size else math.inf
