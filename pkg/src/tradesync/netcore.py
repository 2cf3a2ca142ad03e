"""Weighted directed networks: construction, validation, strengths and edge-list I/O.

A link ``(i, j)`` with weight ``w_ij`` carries the exports of node ``i`` to
node ``j``. Node labels are interned to dense indices ``0..N-1``.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np


class EdgeListError(ValueError):
    """Raised for malformed or invalid edge-list input."""

    def __init__(self, message: str, path: str | Path | None = None, line: int | None = None):
        self.path = None if path is None else str(path)
        self.line = line
        where = ""
        if self.path is not None:
            where = self.path
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


@dataclass(frozen=True, eq=False)
class Network:
    """Immutable weighted digraph with positive weights and no self-loops."""

    node_ids: tuple[str, ...]
    weights: Mapping[tuple[int, int], float] = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "node_ids", tuple(str(x) for x in self.node_ids))
        n = len(self.node_ids)
        if len(set(self.node_ids)) != n:
            raise ValueError("node labels must be unique")
        clean = {}
        for (i, j), w in self.weights.items():
            i, j, w = int(i), int(j), float(w)
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i}, {j}) references a node outside 0..{n - 1}")
            if i == j:
                raise ValueError(f"self-loop on node {i}")
            if not np.isfinite(w) or w < 0:
                raise ValueError(f"weight of edge ({i}, {j}) must be finite and nonnegative, got {w}")
            if w > 0:
                clean[(i, j)] = w
        object.__setattr__(self, "weights", dict(sorted(clean.items())))

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_links(self) -> int:
        return len(self.weights)

    @cached_property
    def index(self) -> dict[str, int]:
        return {label: k for k, label in enumerate(self.node_ids)}

    @cached_property
    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(sources, targets, weights)`` sorted by (source, target)."""
        if not self.weights:
            return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64), np.zeros(0)
        src, dst = zip(*self.weights.keys())
        return (np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64),
                np.fromiter(self.weights.values(), dtype=float, count=len(self.weights)))

    @cached_property
    def out_strengths(self) -> np.ndarray:
        src, _, w = self.edge_arrays
        return np.bincount(src, weights=w, minlength=self.n_nodes).astype(float)

    @cached_property
    def in_strengths(self) -> np.ndarray:
        _, dst, w = self.edge_arrays
        return np.bincount(dst, weights=w, minlength=self.n_nodes).astype(float)

    @property
    def total_weight(self) -> float:
        return float(sum(self.weights.values()))

    def adjacency(self) -> np.ndarray:
        """Dense ``N x N`` weight matrix, ``A[i, j] = w_ij``."""
        a = np.zeros((self.n_nodes, self.n_nodes))
        src, dst, w = self.edge_arrays
        a[src, dst] = w
        return a

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return self.node_ids == other.node_ids and self.weights == other.weights

    def __hash__(self):
        return hash((self.node_ids, tuple(self.weights.items())))

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[str, str, float]], nodes: Iterable[str] = ()) -> "Network":
        """Build from labelled edges; labels are interned in first-appearance order."""
        index: dict[str, int] = {}
        for label in nodes:
            index.setdefault(str(label), len(index))
        weights = {}
        for s, t, w in edges:
            i = index.setdefault(str(s), len(index))
            j = index.setdefault(str(t), len(index))
            if (i, j) in weights:
                raise ValueError(f"duplicate edge {s} -> {t}")
            weights[(i, j)] = w
        return cls(tuple(index), weights)

    @classmethod
    def from_matrix(cls, matrix, node_ids: Iterable[str] | None = None) -> "Network":
        a = np.asarray(matrix, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("adjacency matrix must be square")
        if np.any(np.diag(a) != 0):
            raise ValueError("adjacency matrix has self-loops")
        ids = tuple(str(k) for k in range(a.shape[0])) if node_ids is None else tuple(node_ids)
        rows, cols = np.nonzero(a)
        return cls(ids, {(int(i), int(j)): float(a[i, j]) for i, j in zip(rows, cols)})


@dataclass(frozen=True)
class NetworkSummary:
    n: int
    links: int
    density: float
    mean_k_total: float
    mean_k_in: float
    mean_k_out: float
    mean_strength: float
    # reciprocated pairs counted once
    links_undirected: int
    density_undirected: float

    @property
    def mean_degree(self) -> float:
        return self.mean_k_total

    FIELDS = ("n", "links", "density", "mean_k_total", "mean_k_in", "mean_k_out",
              "mean_strength", "links_undirected", "density_undirected")

    def as_row(self) -> list:
        return [getattr(self, name) for name in self.FIELDS]


def _check_index(net: Network, i: int) -> int:
    if not 0 <= i < net.n_nodes:
        raise IndexError(f"node index {i} out of range 0..{net.n_nodes - 1}")
    return i


def out_strength(net: Network, i: int) -> float:
    """Total exports of node ``i``: sum over j of ``w_ij``."""
    return float(net.out_strengths[_check_index(net, i)])


def in_strength(net: Network, i: int) -> float:
    """Total imports of node ``i``: sum over j of ``w_ji``."""
    return float(net.in_strengths[_check_index(net, i)])


def summarize(net: Network) -> NetworkSummary:
    n = net.n_nodes
    if n < 2:
        raise ValueError("summary needs at least 2 nodes")
    L = net.n_links
    pairs = {(min(i, j), max(i, j)) for i, j in net.weights}
    return NetworkSummary(
        n=n,
        links=L,
        density=L / (n * (n - 1)),
        mean_k_total=2.0 * L / n,
        mean_k_in=L / n,
        mean_k_out=L / n,
        mean_strength=net.total_weight / n,
        links_undirected=len(pairs),
        density_undirected=2.0 * len(pairs) / (n * (n - 1)),
    )


def parse_edge_list(text: str, delimiter: str | None = None, source: str | Path | None = None) -> Network:
    """Parse ``source target weight`` records; ``#`` lines and blank lines are skipped.

    ``delimiter=None`` splits on any run of whitespace. Zero-weight records
    register their nodes but add no link.
    """
    index: dict[str, int] = {}
    weights: dict[tuple[int, int], float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split() if delimiter is None else [p.strip() for p in line.split(delimiter)]
        if len(parts) != 3 or not parts[0] or not parts[1]:
            raise EdgeListError(f"expected 'source target weight', got {raw!r}", source, lineno)
        s, t, w_text = parts
        try:
            w = float(w_text)
        except ValueError:
            raise EdgeListError(f"weight {w_text!r} is not a number", source, lineno) from None
        if not np.isfinite(w):
            raise EdgeListError(f"weight {w_text!r} is not finite", source, lineno)
        if w < 0:
            raise EdgeListError(f"negative weight {w_text}", source, lineno)
        if s == t:
            raise EdgeListError(f"self-loop on {s!r}", source, lineno)
        i = index.setdefault(s, len(index))
        j = index.setdefault(t, len(index))
        if (i, j) in weights:
            raise EdgeListError(f"duplicate edge {s} -> {t}", source, lineno)
        weights[(i, j)] = w
    if len(index) < 2:
        raise EdgeListError("a network needs at least 2 nodes", source)
    return Network(tuple(index), weights)


def load_edge_list(path: str | Path, delimiter: str | None = None) -> Network:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"edge-list file not found: {path}")
    return parse_edge_list(path.read_text(), delimiter=delimiter, source=path)


def format_edge_list(net: Network, delimiter: str = " ") -> str:
    out = io.StringIO()
    for (i, j), w in net.weights.items():
        out.write(f"{net.node_ids[i]}{delimiter}{net.node_ids[j]}{delimiter}{w!r}\n")
    return out.getvalue()


def write_edge_list(net: Network, path: str | Path, delimiter: str = " ") -> None:
    """Write ``net`` so that :func:`load_edge_list` reloads it bit-exactly.

    Isolated nodes are not representable in the format and are dropped.
    """
    Path(path).write_text(format_edge_list(net, delimiter))


def write_summary_csv(summary: NetworkSummary, path: str | Path, extra: Mapping[str, object] | None = None) -> None:
    extra = dict(extra or {})
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(NetworkSummary.FIELDS) + list(extra))
        writer.writerow(summary.as_row() + list(extra.values()))
