"""Directed weighted modularity, a multi-level greedy optimizer and an exact oracle.

For total weight ``W = sum_ij w_ij``::

    Q = (1/W) * sum_ij (w_ij - s_i^out s_j^in / W) * [C_i == C_j]

which, per community ``c``, is ``W_c / W - S^out_c S^in_c / W^2`` with
``W_c`` the weight of links inside ``c``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .netcore import Network

BRUTE_FORCE_MAX_N = 12
_TIE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Partition:
    assignment: tuple[int, ...]
    q: float = float("nan")

    def __post_init__(self):
        labels = relabel(self.assignment)
        object.__setattr__(self, "assignment", labels)

    @property
    def m_communities(self) -> int:
        return max(self.assignment) + 1 if self.assignment else 0

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(int(c) for c in np.bincount(self.assignment, minlength=self.m_communities))

    def members(self) -> list[list[int]]:
        groups: list[list[int]] = [[] for _ in range(self.m_communities)]
        for node, c in enumerate(self.assignment):
            groups[c].append(node)
        return groups

    def blocks(self) -> frozenset[frozenset[int]]:
        return frozenset(frozenset(g) for g in self.members())

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return self.assignment == other.assignment


def relabel(assignment: Sequence[int]) -> tuple[int, ...]:
    """Map community ids to 0..M-1 in order of first appearance."""
    seen: dict[int, int] = {}
    return tuple(seen.setdefault(int(c), len(seen)) for c in assignment)


def modularity(net: Network, assignment: Sequence[int] | Partition) -> float:
    if isinstance(assignment, Partition):
        assignment = assignment.assignment
    labels = np.asarray(assignment, dtype=np.int64)
    if net.n_nodes == 0:
        raise ValueError("empty network")
    if labels.size != net.n_nodes:
        raise ValueError(f"assignment has {labels.size} entries for {net.n_nodes} nodes")
    total = net.total_weight
    if total <= 0:
        raise ValueError("modularity undefined for a network with zero total weight")
    _, inv = np.unique(labels, return_inverse=True)
    m = inv.max() + 1
    src, dst, w = net.edge_arrays
    inside = float(w[inv[src] == inv[dst]].sum())
    s_out = np.bincount(inv, weights=net.out_strengths, minlength=m)
    s_in = np.bincount(inv, weights=net.in_strengths, minlength=m)
    return inside / total - float(s_out @ s_in) / total**2


def _one_level(a: np.ndarray, order: np.ndarray, total: float) -> tuple[np.ndarray, bool]:
    """Local moving on a (possibly self-looped) weight matrix.

    Returns the community label of each node and whether anything moved.
    """
    n = a.shape[0]
    s_out = a.sum(axis=1)
    s_in = a.sum(axis=0)
    comm = np.arange(n)
    c_out = s_out.copy()
    c_in = s_in.copy()
    sym = a + a.T
    np.fill_diagonal(sym, 0.0)
    moved_any = False
    improved = True
    while improved:
        improved = False
        for i in order:
            old = comm[i]
            c_out[old] -= s_out[i]
            c_in[old] -= s_in[i]
            # links between i and each community, both directions
            links = np.bincount(comm, weights=sym[i], minlength=n)
            gain = links / total - (s_out[i] * c_in + s_in[i] * c_out) / total**2
            best = old
            best_gain = gain[old]
            cand = np.flatnonzero(links > 0)
            if cand.size:
                k = cand[np.argmax(gain[cand])]
                if gain[k] > best_gain + _TIE_TOL:
                    best = k
            comm[i] = best
            c_out[best] += s_out[i]
            c_in[best] += s_in[i]
            if best != old:
                improved = True
                moved_any = True
    return comm, moved_any


def _aggregate(a: np.ndarray, labels: np.ndarray) -> np.ndarray:
    m = labels.max() + 1
    proj = np.zeros((a.shape[0], m))
    proj[np.arange(a.shape[0]), labels] = 1.0
    return proj.T @ a @ proj


def _louvain(a: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    total = a.sum()
    n = a.shape[0]
    node_comm = np.arange(n)
    level = a
    while True:
        order = rng.permutation(level.shape[0])
        comm, moved = _one_level(level, order, total)
        if not moved:
            break
        _, comm = np.unique(comm, return_inverse=True)
        node_comm = comm[node_comm]
        level = _aggregate(level, comm)
        if level.shape[0] == 1:
            break
    return node_comm


def _refine(a: np.ndarray, labels: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Single-node moves on the original graph starting from ``labels``."""
    total = a.sum()
    n = a.shape[0]
    s_out = a.sum(axis=1)
    s_in = a.sum(axis=0)
    comm = labels.copy()
    c_out = np.bincount(comm, weights=s_out, minlength=n)
    c_in = np.bincount(comm, weights=s_in, minlength=n)
    sym = a + a.T
    improved = True
    while improved:
        improved = False
        for i in rng.permutation(n):
            old = comm[i]
            c_out[old] -= s_out[i]
            c_in[old] -= s_in[i]
            links = np.bincount(comm, weights=sym[i], minlength=n)
            gain = links / total - (s_out[i] * c_in + s_in[i] * c_out) / total**2
            # an empty community is a valid target: the node goes alone
            empty = np.flatnonzero(np.bincount(comm, minlength=n) == 0)
            cand = np.flatnonzero(links > 0)
            if empty.size:
                cand = np.append(cand, empty[0])
            best = old
            if cand.size:
                k = cand[np.argmax(gain[cand])]
                if gain[k] > gain[old] + _TIE_TOL:
                    best = k
            comm[i] = best
            c_out[best] += s_out[i]
            c_in[best] += s_in[i]
            improved |= best != old
    return comm


def optimize_modularity(net: Network, rng_seed: int = 0, restarts: int = 10) -> Partition:
    """Best of ``restarts`` randomized multi-level greedy runs.

    Each run starts from singletons, moves single nodes while Q increases,
    collapses communities into super-nodes and repeats; a last pass of
    single-node moves on the original graph polishes the result.
    """
    if net.n_nodes < 2:
        raise ValueError("need at least 2 nodes")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    a = net.adjacency()
    if a.sum() <= 0:
        raise ValueError("modularity undefined for a network with zero total weight")
    rng = np.random.default_rng(np.random.SeedSequence(rng_seed))
    best: Partition | None = None
    for _ in range(restarts):
        labels = _louvain(a, rng)
        labels = _refine(a, labels, rng)
        part = Partition(tuple(int(c) for c in labels))
        q = modularity(net, part)
        if best is None or q > best.q + _TIE_TOL:
            best = Partition(part.assignment, q)
    return best


def _rgs_search(a: np.ndarray):
    """Exhaustive search over restricted growth strings with incremental Q."""
    n = a.shape[0]
    total = a.sum()
    s_out = a.sum(axis=1)
    s_in = a.sum(axis=0)
    sym = a + a.T
    labels = np.zeros(n, dtype=np.int64)
    c_out = np.zeros(n)
    c_in = np.zeros(n)
    best = [-np.inf, n + 1, None]

    def visit(i: int, m: int, inside: float, null: float):
        if i == n:
            q = inside / total - null / total**2
            if q > best[0] + _TIE_TOL or (abs(q - best[0]) <= _TIE_TOL and m < best[1]):
                best[0], best[1], best[2] = q, m, labels.copy()
            return
        prev = labels[:i]
        for c in range(m + 1):
            d_inside = float(sym[i, :i][prev == c].sum()) if c < m else 0.0
            d_null = s_out[i] * c_in[c] + s_in[i] * c_out[c] + s_out[i] * s_in[i]
            labels[i] = c
            c_out[c] += s_out[i]
            c_in[c] += s_in[i]
            visit(i + 1, max(m, c + 1), inside + d_inside, null + d_null)
            c_out[c] -= s_out[i]
            c_in[c] -= s_in[i]

    labels[0] = 0
    c_out[0], c_in[0] = s_out[0], s_in[0]
    visit(1, 1, 0.0, s_out[0] * s_in[0])
    return best[2]


def brute_force_modularity(net: Network) -> Partition:
    """Exact maximum of Q over all set partitions (``N <= 12``).

    Ties go to fewer communities, then to the lexicographically smallest
    assignment.
    """
    n = net.n_nodes
    if n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute force limited to N <= {BRUTE_FORCE_MAX_N}, got {n}")
    if n < 1:
        raise ValueError("empty network")
    a = net.adjacency()
    if a.sum() <= 0:
        raise ValueError("modularity undefined for a network with zero total weight")
    labels = _rgs_search(a)
    part = Partition(tuple(int(c) for c in labels))
    return Partition(part.assignment, modularity(net, part))


def write_partition_csv(net: Network, part: Partition, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["node_label", "community_id"])
        for label, c in zip(net.node_ids, part.assignment):
            writer.writerow([label, c])


def read_partition_csv(net: Network, path: str | Path) -> Partition:
    """Read ``node_label,community_id`` rows; every node of ``net`` must appear once."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"partition file not found: {path}")
    found: dict[int, str] = {}
    with open(path, newline="") as fh:
        rows = csv.reader(fh)
        for lineno, row in enumerate(rows, start=1):
            if not row or row[0].startswith("#"):
                continue
            if lineno == 1 and row[0] == "node_label":
                continue
            if len(row) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'node_label,community_id'")
            label, cid = row[0].strip(), row[1].strip()
            if label not in net.index:
                raise ValueError(f"{path}:{lineno}: unknown node {label!r}")
            k = net.index[label]
            if k in found:
                raise ValueError(f"{path}:{lineno}: node {label!r} listed twice")
            found[k] = cid
    missing = [net.node_ids[k] for k in range(net.n_nodes) if k not in found]
    if missing:
        raise ValueError(f"{path}: partition misses nodes {missing[:5]}")
    part = Partition(relabel_strings([found[k] for k in range(net.n_nodes)]))
    q = modularity(net, part) if net.total_weight > 0 else float("nan")
    return Partition(part.assignment, q)


def relabel_strings(ids: Sequence[str]) -> tuple[int, ...]:
    seen: dict[str, int] = {}
    return tuple(seen.setdefault(c, len(seen)) for c in ids)
