"""Event-driven simulation of pulse-coupled integrate-and-fire oscillators.

Every oscillator carries a phase ``phi`` in [0, 1) that grows at unit rate;
its state is ``x = f(phi)`` with the concave map ``f`` below. When a phase
reaches 1 the oscillator fires, resets to 0 and kicks every node ``j`` that
exports to it by ``eps[i, j] = w_ji / s_j^out`` in state space. Kicks that
push a state to or past 1 absorb the receiver into the same cascade.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import sparse

from .netcore import Network

DEFAULT_B = 3.0
DEFAULT_SYNC_FRACTION = 0.9
DEFAULT_MAX_CYCLES = 1e4
DEFAULT_SAMPLE_INTERVAL = 0.1


class ReplicaError(RuntimeError):
    def __init__(self, seed: int, cause: BaseException):
        self.seed = seed
        super().__init__(f"replica with seed {seed} failed: {cause!r}")


def _check_b(b: float) -> float:
    b = float(b)
    if not (b > 0 and math.isfinite(b)):
        raise ValueError(f"dissipation b must be a positive finite number, got {b}")
    return b


def state_from_phase(phi, b: float):
    """``f(phi) = ln(1 + (e^b - 1) phi) / b``; accepts scalars or arrays."""
    b = _check_b(b)
    p = np.asarray(phi, dtype=float)
    if np.any((p < 0) | (p > 1)) or np.any(np.isnan(p)):
        raise ValueError("phase must lie in [0, 1]")
    x = np.log1p(np.expm1(b) * p) / b
    return float(x) if x.ndim == 0 else x


def phase_from_state(x, b: float):
    """Inverse of :func:`state_from_phase`: ``(e^(b x) - 1) / (e^b - 1)``."""
    b = _check_b(b)
    s = np.asarray(x, dtype=float)
    if np.any((s < 0) | (s > 1)) or np.any(np.isnan(s)):
        raise ValueError("state must lie in [0, 1]")
    p = np.expm1(b * s) / np.expm1(b)
    return float(p) if p.ndim == 0 else p


# unchecked versions for the inner loop
def _f(phi, expm1_b, b):
    return np.log1p(expm1_b * phi) / b


def _finv(x, expm1_b, b):
    return np.expm1(b * x) / expm1_b


def build_coupling(net: Network) -> sparse.csr_array:
    """Pulse amplitudes as a CSR matrix: row = firing node i, column = receiver j.

    ``eps[i, j] = w_ji / s_j^out``. Receivers without exports get no entries.
    Column indices within each row are sorted ascending.
    """
    src, dst, w = net.edge_arrays
    s_out = net.out_strengths
    keep = s_out[src] > 0
    # edge j->i (src=j, dst=i) becomes the pulse i -> j
    firing, receiver = dst[keep], src[keep]
    eps = w[keep] / s_out[receiver]
    n = net.n_nodes
    mat = sparse.csr_array((eps, (firing, receiver)), shape=(n, n))
    mat.sort_indices()
    return mat


def coupling_map(eps: sparse.csr_array) -> dict[tuple[int, int], float]:
    coo = eps.tocoo()
    return {(int(i), int(j)): float(v) for i, j, v in zip(coo.row, coo.col, coo.data)}


def init_phases(n: int, rng_seed: int) -> np.ndarray:
    """``n`` independent uniform phases on [0, 1) from a seeded generator."""
    if n < 2:
        raise ValueError(f"need at least 2 oscillators, got {n}")
    return np.random.default_rng(np.random.SeedSequence(rng_seed)).random(n)


@dataclass
class OscillatorSystem:
    phases: np.ndarray
    b: float
    epsilon: sparse.csr_array
    clock: float = 0.0

    def __post_init__(self):
        self.b = _check_b(self.b)
        self.phases = np.array(self.phases, dtype=float)
        self.epsilon = sparse.csr_array(self.epsilon)
        self.epsilon.sort_indices()
        self._expm1_b = math.expm1(self.b)

    @classmethod
    def from_network(cls, net: Network, b: float, phases) -> "OscillatorSystem":
        return cls(phases, b, build_coupling(net))

    @property
    def n(self) -> int:
        return self.phases.size


@dataclass(frozen=True)
class CascadeRecord:
    origin: int
    # firing order, origin first
    members: tuple[int, ...]
    cycle_time: float

    @property
    def size(self) -> int:
        return len(self.members)


def advance_to_next_firing(sys: OscillatorSystem) -> tuple[int, float]:
    """Flow all phases until the leading oscillator hits threshold.

    Ties go to the lowest index. The returned node is left at phase exactly 1.
    """
    k = int(np.argmax(sys.phases))
    elapsed = max(0.0, 1.0 - float(sys.phases[k]))
    sys.phases += elapsed
    sys.phases[k] = 1.0
    sys.clock += elapsed
    return k, elapsed


def resolve_cascade(sys: OscillatorSystem, origin: int) -> CascadeRecord:
    """Fire ``origin`` and propagate pulses breadth-first.

    Each node fires at most once per cascade; nodes that already fired
    ignore later pulses. Receivers of one firing node are handled in
    ascending index order.
    """
    eps = sys.epsilon
    indptr, indices, data = eps.indptr, eps.indices, eps.data
    b, expm1_b = sys.b, sys._expm1_b
    phases = sys.phases
    fired = np.zeros(sys.n, dtype=bool)
    fired[origin] = True
    order = [origin]
    head = 0
    while head < len(order):
        k = order[head]
        head += 1
        phases[k] = 0.0
        lo, hi = indptr[k], indptr[k + 1]
        if lo == hi:
            continue
        recv = indices[lo:hi]
        live = ~fired[recv]
        recv = recv[live]
        if recv.size == 0:
            continue
        x = _f(phases[recv], expm1_b, b) + data[lo:hi][live]
        fire = x >= 1.0
        stay = ~fire
        new_phi = _finv(x[stay], expm1_b, b)
        # a state a rounding error below threshold maps back to phase 1.0
        at_top = new_phi >= 1.0
        if at_top.any():
            fire[np.flatnonzero(stay)[at_top]] = True
            stay = ~fire
            new_phi = new_phi[~at_top]
        phases[recv[stay]] = new_phi
        absorbed = recv[fire]
        if absorbed.size:
            fired[absorbed] = True
            phases[absorbed] = 0.0
            order.extend(int(a) for a in absorbed)
    return CascadeRecord(origin=origin, members=tuple(order), cycle_time=sys.clock)


@dataclass
class RunResult:
    seed: int
    n_nodes: int
    cascades: list[CascadeRecord]
    sync_time: float | None
    final_clock: float
    sample_times: np.ndarray = field(default_factory=lambda: np.zeros(0))
    r: np.ndarray = field(default_factory=lambda: np.zeros(0))
    # shape (n_samples, M); M = 0 without a partition
    r_alpha: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))

    @property
    def synced(self) -> bool:
        return self.sync_time is not None

    def same_as(self, other: "RunResult") -> bool:
        return (self.seed == other.seed and self.n_nodes == other.n_nodes
                and self.cascades == other.cascades and self.sync_time == other.sync_time
                and self.final_clock == other.final_clock
                and np.array_equal(self.sample_times, other.sample_times)
                and np.array_equal(self.r, other.r)
                and np.array_equal(self.r_alpha, other.r_alpha))


def sync_threshold(n: int, sync_fraction: float) -> int:
    """Smallest cascade size that counts as synchronized."""
    # guard against 0.9 * N landing a hair above an integer
    return max(1, math.ceil(sync_fraction * n - 1e-9))


def _phasor_moduli(phases: np.ndarray, labels: np.ndarray | None, sizes: np.ndarray | None):
    z = np.exp(2j * np.pi * phases)
    r = min(1.0, abs(z.mean()))
    if labels is None:
        return r, None
    sums = np.bincount(labels, weights=z.real, minlength=sizes.size) + 1j * np.bincount(
        labels, weights=z.imag, minlength=sizes.size)
    return r, np.minimum(1.0, np.abs(sums / sizes))


def run_replica(net: Network, b: float = DEFAULT_B, seed: int = 0,
                sync_fraction: float = DEFAULT_SYNC_FRACTION,
                max_cycles: float = DEFAULT_MAX_CYCLES,
                sample_interval: float | None = DEFAULT_SAMPLE_INTERVAL,
                partition=None, coupling: sparse.csr_array | None = None) -> RunResult:
    """Simulate one replica from random initial phases until sync or ``max_cycles``.

    The order parameter (and per-community values when ``partition`` is
    given) is sampled at ``0, dt, 2dt, ...``; events at a sample instant are
    applied before sampling. ``sample_interval=None`` skips sampling.
    """
    _check_b(b)
    if not 0 < sync_fraction <= 1:
        raise ValueError(f"sync_fraction must be in (0, 1], got {sync_fraction}")
    if not max_cycles > 0:
        raise ValueError(f"max_cycles must be positive, got {max_cycles}")
    if sample_interval is not None and not sample_interval > 0:
        raise ValueError(f"sample_interval must be positive, got {sample_interval}")
    n = net.n_nodes
    labels = sizes = None
    if partition is not None:
        labels = np.asarray(partition.assignment, dtype=np.int64)
        if labels.size != n:
            raise ValueError("partition does not cover the network")
        sizes = np.bincount(labels).astype(float)

    eps = build_coupling(net) if coupling is None else coupling
    sys = OscillatorSystem(init_phases(n, seed), b, eps)
    target = sync_threshold(n, sync_fraction)

    times, rs, ras = [], [], []
    next_sample = 0
    cascades: list[CascadeRecord] = []
    sync_time = None

    def sample_until(t_end: float, inclusive: bool):
        nonlocal next_sample
        while True:
            t = next_sample * sample_interval
            if t > max_cycles or t > t_end or (t == t_end and not inclusive):
                return
            r, ra = _phasor_moduli((sys.phases + (t - sys.clock)) % 1.0, labels, sizes)
            times.append(t)
            rs.append(r)
            if ra is not None:
                ras.append(ra)
            next_sample += 1

    while True:
        t_next = sys.clock + (1.0 - float(sys.phases.max()))
        if t_next > max_cycles:
            if sample_interval is not None:
                sample_until(max_cycles, inclusive=True)
            break
        if sample_interval is not None:
            sample_until(t_next, inclusive=False)
        origin, _ = advance_to_next_firing(sys)
        rec = resolve_cascade(sys, origin)
        cascades.append(rec)
        if rec.size >= target:
            sync_time = sys.clock
            break

    m = 0 if sizes is None else sizes.size
    return RunResult(
        seed=seed, n_nodes=n, cascades=cascades, sync_time=sync_time, final_clock=sys.clock,
        sample_times=np.array(times, dtype=float), r=np.array(rs, dtype=float),
        r_alpha=np.array(ras, dtype=float).reshape(len(times), m) if m else np.zeros((len(times), 0)),
    )


def _replica_task(args):
    net, seed, kwargs = args
    try:
        return run_replica(net, seed=seed, **kwargs)
    except Exception as exc:  # noqa: BLE001 - re-raised with seed attribution
        raise ReplicaError(seed, exc) from exc


def run_ensemble(net: Network, b: float = DEFAULT_B, seeds: Sequence[int] = (0,), *,
                 jobs: int = 1, **kwargs) -> list[RunResult]:
    """Independent replicas, one per seed, returned in seed order.

    ``jobs > 1`` spreads replicas over worker processes; the results do not
    depend on the number of workers.
    """
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise ValueError("need at least one seed")
    if jobs < 1:
        raise ValueError("jobs must be >= 1")
    kwargs = dict(kwargs, b=b)
    kwargs.setdefault("coupling", build_coupling(net))
    tasks = [(net, s, kwargs) for s in seeds]
    if jobs == 1 or len(seeds) == 1:
        return [_replica_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_replica_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
