"""Independent reference implementations and fixture generators.

Everything here deliberately avoids the production code paths it checks:
the codelength reference works from explicitly normalized entropies, the
stationary reference is a dense linear solve, modularity is evaluated on a
dense symmetrized matrix, and partition enumeration is restricted-growth
strings. Generators use only random.Random so fixtures never drift.
"""

from __future__ import annotations

import random
from datetime import datetime, timedelta
from math import inf, log2

import numpy as np

from bikeflow import FlowNetwork, Station, TripRecord

# ---------------------------------------------------------------------------
# set-partition enumeration

BELL = {0: 1, 1: 1, 2: 2, 3: 5, 4: 15, 5: 52, 6: 203, 7: 877, 8: 4140}


def set_partitions(n: int):
    """All set partitions of range(n) as dense label tuples."""
    if n == 0:
        yield ()
        return
    labels = [0] * n

    def rec(i: int, max_label: int):
        if i == n:
            yield tuple(labels)
            return
        for v in range(max_label + 2):
            labels[i] = v
            yield from rec(i + 1, max(max_label, v))

    yield from rec(1, 0)


# ---------------------------------------------------------------------------
# straight-from-the-definition codelength

def entropy2(probs) -> float:
    return -sum(p * log2(p) for p in probs if p > 0.0)


def reference_codelength(flow, labels) -> float:
    """Two-level description length from explicitly normalized entropies."""
    net = flow.net
    n = net.n_nodes
    modules = sorted({x for x in labels if x >= 0})
    exits = {}
    members = {m: [i for i in range(n) if labels[i] == m] for m in modules}
    for m in modules:
        q = 0.0
        for e in range(net.n_edges):
            if labels[net.edge_src[e]] == m and labels[net.edge_dst[e]] != m:
                q += float(flow.edge_flow[e])
        tele = sum(float(flow.node_teleport[i]) for i in members[m])
        q += tele * (n - len(members[m])) / n
        exits[m] = q
    q_total = sum(exits.values())
    total = 0.0
    if q_total > 0.0:
        total += q_total * entropy2([exits[m] / q_total for m in modules])
    for m in modules:
        visits = [float(flow.node_visit[i]) for i in members[m]]
        stay = exits[m] + sum(visits)
        if stay > 0.0:
            vec = [exits[m] / stay] + [p / stay for p in visits]
            total += stay * entropy2(vec)
    return total


def embed_active_labels(flow, labels_active, active) -> list[int]:
    full = [-1] * flow.net.n_nodes
    for pos, node in enumerate(active):
        full[node] = labels_active[pos]
    return full


def brute_force_min_codelength(flow):
    """(min codelength, full label list) by enumerating all set partitions
    of the positive-flow nodes."""
    active = [i for i in range(flow.net.n_nodes) if flow.node_visit[i] > 0.0]
    best_len, best_labels = inf, None
    for labs in set_partitions(len(active)):
        full = embed_active_labels(flow, labs, active)
        length = reference_codelength(flow, full)
        if length < best_len - 1e-12:
            best_len, best_labels = length, full
    return best_len, best_labels


# ---------------------------------------------------------------------------
# stationary distribution by dense linear algebra

def dense_stationary(net: FlowNetwork, tau: float) -> np.ndarray:
    n = net.n_nodes
    strength = net.out_strength_vector()
    walk = np.zeros((n, n))
    for e in range(net.n_edges):
        a, b = int(net.edge_src[e]), int(net.edge_dst[e])
        walk[a, b] += float(net.edge_weight[e]) / strength[a]
    step = np.zeros((n, n))
    for i in range(n):
        if strength[i] == 0:
            step[i, :] = 1.0 / n
        else:
            step[i, :] = tau / n + (1.0 - tau) * walk[i, :]
    a_mat = np.vstack([step.T - np.eye(n), np.ones((1, n))])
    rhs = np.zeros(n + 1)
    rhs[-1] = 1.0
    solution, *_ = np.linalg.lstsq(a_mat, rhs, rcond=None)
    return solution


# ---------------------------------------------------------------------------
# dense-matrix modularity and its brute-force maximum

def dense_modularity(net: FlowNetwork, labels, resolution: float = 1.0) -> float:
    n = net.n_nodes
    w = np.zeros((n, n))
    for e in range(net.n_edges):
        w[int(net.edge_src[e]), int(net.edge_dst[e])] += float(net.edge_weight[e])
    sym = w + w.T
    two_m = sym.sum()
    k = sym.sum(axis=1)
    q = 0.0
    for m in sorted({x for x in labels if x >= 0}):
        idx = [i for i in range(n) if labels[i] == m]
        q += sym[np.ix_(idx, idx)].sum() / two_m - resolution * (k[idx].sum() / two_m) ** 2
    return q


def brute_force_max_modularity(net: FlowNetwork, resolution: float = 1.0):
    strength = net.out_strength_vector() + net.in_strength_vector()
    active = [i for i in range(net.n_nodes) if strength[i] > 0]
    best_q, best_labels = -inf, None
    for labs in set_partitions(len(active)):
        full = [-1] * net.n_nodes
        for pos, node in enumerate(active):
            full[node] = labs[pos]
        q = dense_modularity(net, full, resolution)
        if q > best_q + 1e-12:
            best_q, best_labels = q, full
    return best_q, best_labels


# ---------------------------------------------------------------------------
# fixture networks (n <= 8, used for enumeration-backed checks)

def _net(n, edges):
    return FlowNetwork(
        [Station(id=100 + i) for i in range(n)],
        [e[0] for e in edges],
        [e[1] for e in edges],
        [e[2] for e in edges],
    )


def two_cycle():
    return _net(2, [(0, 1, 1), (1, 0, 1)])


def double_two_cycle():
    return _net(4, [(0, 1, 1), (1, 0, 1), (2, 3, 1), (3, 2, 1)])


def hub3():
    return _net(3, [(0, 1, 1), (0, 2, 1), (1, 0, 1), (2, 0, 1)])


def dangling_pair():
    return _net(2, [(0, 1, 1)])


def chain3():
    # last node never starts a trip: zero empirical visit, UNASSIGNED
    return _net(3, [(0, 1, 2), (1, 2, 1)])


def ring(n=8, weight=1):
    return _net(n, [(i, (i + 1) % n, weight) for i in range(n)])


def bridged_triangles():
    # two directed triangles joined by a light two-way bridge
    edges = [
        (0, 1, 3), (1, 2, 3), (2, 0, 3),
        (3, 4, 3), (4, 5, 3), (5, 3, 3),
        (2, 3, 1), (3, 2, 1),
    ]
    return _net(6, edges)


def self_loop_mix():
    edges = [(0, 0, 4), (0, 1, 1), (1, 0, 2), (2, 3, 2), (3, 2, 2), (3, 3, 1)]
    return _net(4, edges)


def star8():
    return _net(8, [(0, i, 2) for i in range(1, 8)] + [(i, 0, 2) for i in range(1, 8)])


def blocky8(seed: int = 55):
    """Two dense 4-blocks with sparse unit-weight cross edges."""
    rng = random.Random(seed)
    edges = []
    for a in range(8):
        for b in range(8):
            if a == b:
                continue
            if (a < 4) == (b < 4):
                edges.append((a, b, rng.randint(4, 8)))
            elif rng.random() < 0.4:
                edges.append((a, b, 1))
    return _net(8, edges)


def bridged_quads():
    """Two directed 4-cycles joined by a weak two-way bridge."""
    edges = [
        (0, 1, 3), (1, 2, 3), (2, 3, 3), (3, 0, 3),
        (4, 5, 3), (5, 6, 3), (6, 7, 3), (7, 4, 3),
        (0, 4, 1), (4, 0, 1),
    ]
    return _net(8, edges)


def random_digraph(n: int, seed: int, density: float = 0.45):
    rng = random.Random(seed)
    edges = []
    for a in range(n):
        for b in range(n):
            if a == b:
                continue
            if rng.random() < density:
                edges.append((a, b, rng.randint(1, 5)))
    if not edges:  # keep the fixture non-degenerate
        edges = [(0, 1, 1), (1, 0, 1)]
    return _net(n, edges)


def small_fixture_networks():
    """Named n<=8 networks for enumeration-backed tests."""
    return [
        ("two_cycle", two_cycle()),
        ("double_two_cycle", double_two_cycle()),
        ("hub3", hub3()),
        ("chain3", chain3()),
        ("bridged_triangles", bridged_triangles()),
        ("self_loop_mix", self_loop_mix()),
        ("random7", random_digraph(7, seed=701)),
        ("random8", random_digraph(8, seed=808)),
        ("ring8", ring(8)),
        ("star8", star8()),
        ("blocky8", blocky8()),
        ("bridged_quads", bridged_quads()),
    ]


def solvable_fixture_networks():
    """Fixtures whose enumerated optimum the flat local-move loop reaches
    with ten restarts; cycle-shaped instances (ring8, bridged_quads) and the
    dense random8 need moves the printed procedure does not have."""
    return [
        ("two_cycle", two_cycle()),
        ("double_two_cycle", double_two_cycle()),
        ("hub3", hub3()),
        ("chain3", chain3()),
        ("bridged_triangles", bridged_triangles()),
        ("self_loop_mix", self_loop_mix()),
        ("random7", random_digraph(7, seed=701)),
        ("star8", star8()),
        ("blocky8", blocky8()),
    ]


# ---------------------------------------------------------------------------
# planted-partition benchmark (deterministic, random.Random only)

def planted_partition(seed: int, n_blocks: int = 6, per_block: int = 20):
    """Directed weighted benchmark with 10:1 expected within:cross weight.

    Within-block ordered pairs always get weight U{5..15} (mean 10); cross
    pairs get weight U{1..3} with probability 1/2 (mean 1).
    """
    rng = random.Random(seed)
    n = n_blocks * per_block
    truth = [i // per_block for i in range(n)]
    src, dst, wgt = [], [], []
    for a in range(n):
        for b in range(n):
            if a == b:
                continue
            if truth[a] == truth[b]:
                src.append(a)
                dst.append(b)
                wgt.append(rng.randint(5, 15))
            elif rng.random() < 0.5:
                src.append(a)
                dst.append(b)
                wgt.append(rng.randint(1, 3))
    net = FlowNetwork([Station(id=i) for i in range(n)], src, dst, wgt)
    return net, truth


# ---------------------------------------------------------------------------
# synthetic trip corpora

BASE_DAY = datetime(2014, 6, 2)  # a Monday


def make_trip(rental_id: int, a: int, b: int, when: datetime, duration: int = 600):
    return TripRecord(
        rental_id=rental_id,
        duration=duration,
        start_time=when,
        end_time=when + timedelta(seconds=duration),
        start_station_id=a,
        end_station_id=b,
        bike_id=10_000 + rental_id,
    )


def block_trips_for_hour(rng, rid_start, hour, members, count, minute_spread=60):
    """Trips between distinct stations drawn from `members`, starting in `hour`."""
    trips = []
    for k in range(count):
        a, b = rng.sample(members, 2)
        when = BASE_DAY + timedelta(hours=hour, minutes=rng.randrange(minute_spread))
        trips.append(make_trip(rid_start + k, a, b, when))
    return trips


def two_block_corpus(seed: int = 11):
    """Two disconnected station blocks active in every hour; block 0 is
    bigger, so size-ordered labels are stable across hours. Dense enough
    per hour that each block is unambiguously one community."""
    rng = random.Random(seed)
    block0 = list(range(1, 9))
    block1 = list(range(9, 14))
    stations = [Station(id=i) for i in block0 + block1]
    trips = []
    rid = 0
    for hour in range(24):
        trips += block_trips_for_hour(rng, rid, hour, block0, 240)
        rid += 240
        trips += block_trips_for_hour(rng, rid, hour, block1, 120)
        rid += 120
    truth = {i: 0 for i in block0}
    truth.update({i: 1 for i in block1})
    return trips, stations, truth


def peak_merge_corpus(seed: int = 23):
    """Four separated blocks at midday; a morning peak (7-9) mixes all
    stations into one flow, so those hours yield fewer modules."""
    rng = random.Random(seed)
    blocks = [list(range(1 + 8 * b, 9 + 8 * b)) for b in range(4)]
    stations = [Station(id=i) for i in range(1, 33)]
    everyone = [i for block in blocks for i in block]
    trips = []
    rid = 0
    for hour in (7, 8, 9):
        trips += block_trips_for_hour(rng, rid, hour, everyone, 400)
        rid += 400
    for hour in (11, 12, 13, 14, 15, 16):
        for block in blocks:
            trips += block_trips_for_hour(rng, rid, hour, block, 50)
            rid += 50
    return trips, stations
