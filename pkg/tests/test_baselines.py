import random

import pytest

from bikeflow import (
    FlowNetwork,
    Partition,
    Station,
    compare_partitions,
    greedy_modularity,
    louvain,
    modularity,
)

import oracles as oc


def _net(n, edges):
    return FlowNetwork(
        [Station(id=i) for i in range(n)],
        [e[0] for e in edges],
        [e[1] for e in edges],
        [e[2] for e in edges],
    )


def _two_cliques():
    edges = []
    for base in (0, 4):
        for i in range(4):
            for j in range(i + 1, 4):
                edges.append((base + i, base + j, 1))
    return _net(8, edges)


def test_modularity_two_disconnected_edges():
    net = _net(4, [(0, 1, 1), (2, 3, 1)])
    score = modularity(net, Partition([0, 0, 1, 1]))
    assert score.q == pytest.approx(0.5, abs=1e-12)


def test_modularity_single_module_is_zero():
    net = _net(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)])
    assert modularity(net, Partition([0, 0, 0, 0])).q == pytest.approx(0.0, abs=1e-12)


def test_modularity_random_partitions_score_near_zero():
    net = oc.random_digraph(60, seed=4242, density=0.5)
    rng = random.Random(7)
    for _ in range(20):
        labels = [rng.randrange(4) for _ in range(60)]
        assert abs(modularity(net, Partition(labels)).q) < 0.05


def test_modularity_matches_dense_reference():
    rng = random.Random(31)
    for name, net in oc.small_fixture_networks():
        for _ in range(10):
            labels = [rng.randrange(3) for _ in range(net.n_nodes)]
            mine = modularity(net, Partition(labels), resolution=1.3).q
            ref = oc.dense_modularity(net, labels, resolution=1.3)
            assert mine == pytest.approx(ref, abs=1e-12), name


def test_modularity_scaling_invariance():
    net = oc.bridged_triangles()
    part = Partition([0, 0, 0, 1, 1, 1])
    assert modularity(net, part).q == pytest.approx(
        modularity(net.scaled(11.0), part).q, abs=1e-12
    )


def test_modularity_validation():
    with pytest.raises(ValueError):
        modularity(FlowNetwork([], [], [], []), Partition([]))
    net = _net(2, [(0, 1, 1)])
    with pytest.raises(ValueError):
        modularity(net, Partition([0, -1]))  # positive-strength node unassigned
    with pytest.raises(ValueError):
        modularity(net, Partition([0, 0]), resolution=0.0)


def test_louvain_two_cliques():
    res = louvain(_two_cliques(), seed=1)
    assert res.partition.n_modules == 2
    assert res.codelength == pytest.approx(0.5, abs=1e-12)
    assert res.partition[0] == res.partition[3]
    assert res.partition[4] == res.partition[7]


def test_louvain_single_edge_merges():
    res = louvain(_net(2, [(0, 1, 1)]), seed=0)
    assert res.partition.labels == [0, 0]
    assert res.codelength == pytest.approx(0.0, abs=1e-12)


def test_louvain_planted_recovery():
    net, truth = oc.planted_partition(seed=5)
    res = louvain(net, seed=5)
    assert compare_partitions(res.partition, Partition(truth)).nmi >= 0.9


def test_louvain_deterministic_and_consistent():
    net = oc.random_digraph(20, seed=2020, density=0.25)
    a = louvain(net, seed=9)
    b = louvain(net, seed=9)
    assert a.partition.labels == b.partition.labels
    assert a.codelength == b.codelength
    assert a.codelength == pytest.approx(modularity(net, a.partition).q, abs=1e-10)


def test_greedy_two_cliques():
    res = greedy_modularity(_two_cliques())
    assert res.partition.n_modules == 2
    assert res.codelength == pytest.approx(0.5, abs=1e-12)


def test_greedy_star_collapses():
    res = greedy_modularity(_net(4, [(0, 1, 1), (0, 2, 1), (0, 3, 1)]))
    assert res.partition.n_modules == 1


def test_greedy_edgeless_gives_singletons():
    res = greedy_modularity(_net(3, []))
    assert res.partition.labels == [0, 1, 2]
    assert res.codelength == 0.0


def test_methods_never_beat_enumerated_maximum():
    for name, net in oc.small_fixture_networks():
        qmax, _ = oc.brute_force_max_modularity(net)
        for res in (louvain(net, seed=3), greedy_modularity(net)):
            assert res.codelength <= qmax + 1e-10, (name, res.method)
            assert res.codelength == pytest.approx(
                modularity(net, res.partition).q, abs=1e-10
            ), (name, res.method)


def test_resolution_changes_granularity():
    net = _two_cliques()
    coarse = louvain(net, seed=1, resolution=0.05)
    fine = louvain(net, seed=1, resolution=1.0)
    assert coarse.partition.n_modules <= fine.partition.n_modules
