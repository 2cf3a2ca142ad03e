import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tradesync.community import (Partition, brute_force_modularity, modularity, optimize_modularity,
                                 read_partition_csv, write_partition_csv)
from tradesync.generators import complete, planted_blocks
from tradesync.netcore import Network

from conftest import random_weighted


def _naive_q(a, labels):
    """Direct double sum, independent of the per-community form used in the package."""
    total = a.sum()
    s_out, s_in = a.sum(axis=1), a.sum(axis=0)
    q = 0.0
    for i in range(a.shape[0]):
        for j in range(a.shape[0]):
            if labels[i] == labels[j]:
                q += a[i, j] - s_out[i] * s_in[j] / total
    return q / total


def _set_partitions(n):
    def grow(prefix, m):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for c in range(m + 1):
            yield from grow(prefix + [c], max(m, c + 1))
    yield from grow([0], 1)


def test_single_community_is_zero(two_triangles):
    assert abs(modularity(two_triangles, [0] * 6)) <= 1e-12


def test_two_triangles(two_triangles):
    assert modularity(two_triangles, [0, 0, 0, 1, 1, 1]) == pytest.approx(0.5, abs=1e-12)
    # brute force over all 203 partitions of 6 nodes agrees
    a = two_triangles.adjacency()
    best = max(_naive_q(a, p) for p in _set_partitions(6))
    assert best == pytest.approx(0.5, abs=1e-12)


def test_matches_naive_double_sum():
    rng = np.random.default_rng(0)
    for _ in range(30):
        net = random_weighted(rng, int(rng.integers(2, 9)))
        labels = rng.integers(0, 3, net.n_nodes)
        assert modularity(net, labels) == pytest.approx(_naive_q(net.adjacency(), labels), abs=1e-12)


def test_modularity_errors():
    net = Network(("a", "b"), {})
    with pytest.raises(ValueError, match="zero total weight"):
        modularity(net, [0, 1])
    with pytest.raises(ValueError):
        modularity(Network(("a", "b"), {(0, 1): 1.0}), [0])


def test_brute_force_small_cases(two_triangles):
    one_edge = Network(("a", "b"), {(0, 1): 1.0})
    p = brute_force_modularity(one_edge)
    assert p.m_communities == 1 and p.q == pytest.approx(0.0, abs=1e-15)
    # the split ties at Q = 0 under the directed null model; fewer communities wins
    assert modularity(one_edge, [0, 1]) == 0.0

    p = brute_force_modularity(two_triangles)
    assert p.m_communities == 2 and p.q == pytest.approx(0.5, abs=1e-12)
    assert p.assignment == (0, 0, 0, 1, 1, 1)


def test_brute_force_matches_naive_enumeration():
    rng = np.random.default_rng(1)
    for _ in range(15):
        net = random_weighted(rng, int(rng.integers(2, 7)))
        a = net.adjacency()
        best = max(_naive_q(a, p) for p in _set_partitions(net.n_nodes))
        assert brute_force_modularity(net).q == pytest.approx(best, abs=1e-12)


def test_brute_force_guard():
    with pytest.raises(ValueError, match="N <= 12"):
        brute_force_modularity(complete(13))


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_complete_graph_single_community(n):
    net = complete(n)
    assert brute_force_modularity(net).m_communities == 1
    p = optimize_modularity(net, 0)
    assert p.q == pytest.approx(0.0, abs=1e-12)
    assert p.m_communities == 1


def test_optimizer_two_triangles(two_triangles):
    p = optimize_modularity(two_triangles, rng_seed=3)
    assert p.m_communities == 2 and p.q == pytest.approx(0.5, abs=1e-12)


def test_optimizer_planted_blocks():
    net, truth = planted_blocks(4, 10, 10.0, 0.1)
    for seed in range(20):
        p = optimize_modularity(net, rng_seed=seed, restarts=2)
        assert p.blocks() == truth.blocks()
        assert p.q == pytest.approx(modularity(net, p), abs=1e-15)


def test_optimizer_deterministic():
    rng = np.random.default_rng(9)
    net = random_weighted(rng, 30, p=0.15)
    assert optimize_modularity(net, 5) == optimize_modularity(net, 5)


def test_optimizer_never_beats_oracle():
    rng = np.random.default_rng(2)
    for k in range(40):
        net = random_weighted(rng, int(rng.integers(2, 8)))
        assert optimize_modularity(net, k).q <= brute_force_modularity(net).q + 1e-12


def test_optimizer_errors():
    with pytest.raises(ValueError):
        optimize_modularity(complete(3), restarts=0)
    with pytest.raises(ValueError):
        optimize_modularity(Network(("a", "b"), {}))


def test_partition_type():
    p = Partition((5, 5, 2, 7))
    assert p.assignment == (0, 0, 1, 2)
    assert p.m_communities == 3 and p.sizes == (2, 1, 1)
    assert sum(p.sizes) == 4


def test_partition_csv_roundtrip(tmp_path, two_triangles):
    p = brute_force_modularity(two_triangles)
    write_partition_csv(two_triangles, p, tmp_path / "p.csv")
    assert (tmp_path / "p.csv").read_text().splitlines()[0] == "node_label,community_id"
    back = read_partition_csv(two_triangles, tmp_path / "p.csv")
    assert back == p and back.q == pytest.approx(0.5)


def test_partition_csv_errors(tmp_path, two_triangles):
    bad = tmp_path / "bad.csv"
    bad.write_text("node_label,community_id\na,0\nb,0\n")
    with pytest.raises(ValueError, match="misses"):
        read_partition_csv(two_triangles, bad)
    bad.write_text("a,0\nzz,1\n")
    with pytest.raises(ValueError, match="unknown node"):
        read_partition_csv(two_triangles, bad)
    with pytest.raises(FileNotFoundError):
        read_partition_csv(two_triangles, tmp_path / "none.csv")


def test_string_community_ids(tmp_path, two_triangles):
    f = tmp_path / "p.csv"
    f.write_text("a,Black\nb,Black\nc,Black\nd,Red\ne,Red\nf,Red\n")
    assert read_partition_csv(two_triangles, f).sizes == (3, 3)


@st.composite
def small_networks(draw):
    n = draw(st.integers(2, 6))
    a = np.array(draw(st.lists(st.floats(0, 10), min_size=n * n, max_size=n * n))).reshape(n, n)
    np.fill_diagonal(a, 0)
    if a.sum() == 0:
        a[0, 1] = 1.0
    return Network.from_matrix(a)


@given(small_networks(), st.floats(1e-3, 1e3))
@settings(max_examples=40)
def test_scale_invariance(net, c):
    scaled = Network(net.node_ids, {k: w * c for k, w in net.weights.items()})
    labels = [i % 2 for i in range(net.n_nodes)]
    assert modularity(scaled, labels) == pytest.approx(modularity(net, labels), abs=1e-12)
    assert abs(modularity(net, [0] * net.n_nodes)) <= 1e-12
    assert brute_force_modularity(scaled).q == pytest.approx(brute_force_modularity(net).q, abs=1e-12)


def test_relabeling_equivariance():
    rng = np.random.default_rng(5)
    for _ in range(20):
        n = int(rng.integers(3, 8))
        net = random_weighted(rng, n, p=0.5)
        perm = rng.permutation(n)
        a = net.adjacency()
        permuted = Network.from_matrix(a[np.ix_(perm, perm)])
        p, pp = brute_force_modularity(net), brute_force_modularity(permuted)
        assert pp.q == pytest.approx(p.q, abs=1e-12)
        # continuous random weights give a unique optimum
        mapped = frozenset(frozenset(int(perm[k]) for k in g) for g in pp.blocks())
        assert mapped == p.blocks()
