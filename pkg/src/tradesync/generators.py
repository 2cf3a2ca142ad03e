"""Synthetic networks with known structure, for tests and desk-scale experiments."""
from __future__ import annotations

import numpy as np

from .community import Partition
from .netcore import Network


def complete(n: int, weight: float = 1.0) -> Network:
    if n < 2:
        raise ValueError("complete graph needs n >= 2")
    if not weight > 0:
        raise ValueError("weight must be positive")
    a = np.full((n, n), float(weight))
    np.fill_diagonal(a, 0.0)
    return Network.from_matrix(a)


def planted_blocks(blocks: int, block_size: int, intra: float = 10.0,
                   inter: float = 0.1) -> tuple[Network, Partition]:
    """Complete digraph with weight ``intra`` inside blocks and ``inter`` across."""
    if blocks < 1 or block_size < 1 or blocks * block_size < 2:
        raise ValueError("need blocks >= 1, block_size >= 1 and at least 2 nodes")
    if not intra > 0 or inter < 0:
        raise ValueError("need intra > 0 and inter >= 0")
    truth = np.repeat(np.arange(blocks), block_size)
    a = np.where(truth[:, None] == truth[None, :], float(intra), float(inter))
    np.fill_diagonal(a, 0.0)
    return Network.from_matrix(a), Partition(tuple(int(c) for c in truth))


def random_sparse(n: int, density: float, seed: int = 0) -> Network:
    """Each ordered pair linked independently with probability ``density``.

    Weights are uniform on (0, 1].
    """
    if n < 2:
        raise ValueError("need n >= 2")
    if not 0 <= density <= 1:
        raise ValueError("density must be in [0, 1]")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    mask = rng.random((n, n)) < density
    np.fill_diagonal(mask, False)
    w = 1.0 - rng.random((n, n))
    return Network.from_matrix(np.where(mask, w, 0.0))
