"""Modularity-based comparison methods: Louvain and greedy agglomeration.

Modularity needs undirected information, so directed weights are symmetrized
(w'_ab = w_ab + w_ba) before scoring; node strength is in-strength plus
out-strength. A resolution parameter scales the null-model term. Both
methods start from singletons and keep isolated nodes as their own
(zero-mass) modules.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .infomap import OptimizationResult, derive_seed
from .network import FlowNetwork
from .partition import UNASSIGNED, Partition


@dataclass(frozen=True)
class ModularityScore:
    q: float
    resolution: float = 1.0


def _symmetric_adjacency(net: FlowNetwork):
    """(adjacency dict without loops, loop weight per node, strength, 2m).

    All quantities follow the symmetrized matrix W + W^T: the off-diagonal
    entry for {a, b} is w_ab + w_ba, a self-loop contributes twice to its
    node's diagonal and strength.
    """
    n = net.n_nodes
    adj: list[dict[int, float]] = [{} for _ in range(n)]
    loops = [0.0] * n
    for e in range(net.n_edges):
        a = int(net.edge_src[e])
        b = int(net.edge_dst[e])
        w = float(net.edge_weight[e])
        if a == b:
            loops[a] += 2.0 * w
        else:
            adj[a][b] = adj[a].get(b, 0.0) + w
            adj[b][a] = adj[b].get(a, 0.0) + w
    strength = [sum(adj[i].values()) + loops[i] for i in range(n)]
    return adj, loops, strength, sum(strength)


def modularity(net: FlowNetwork, part: Partition, resolution: float = 1.0) -> ModularityScore:
    """Q = sum over modules of (within-weight share - resolution * strength share^2).

    An edgeless network scores 0 by convention.
    """
    if net.n_nodes == 0:
        raise ValueError("empty network")
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    if len(part) != net.n_nodes:
        raise ValueError("partition does not cover the network's nodes")
    adj, loops, strength, two_m = _symmetric_adjacency(net)
    uncovered = [i for i in range(net.n_nodes) if strength[i] > 0 and part[i] == UNASSIGNED]
    if uncovered:
        raise ValueError(f"nodes with positive strength are unassigned: {uncovered[:10]}")
    if two_m == 0:
        return ModularityScore(q=0.0, resolution=resolution)

    labels = part.labels
    within: dict[int, float] = {}
    mass: dict[int, float] = {}
    for i in range(net.n_nodes):
        m = labels[i]
        if m == UNASSIGNED:
            continue
        mass[m] = mass.get(m, 0.0) + strength[i]
        within[m] = within.get(m, 0.0) + loops[i]
        for j, w in adj[i].items():
            if labels[j] == m:
                within[m] = within.get(m, 0.0) + w  # each inner pair hit twice
    q = 0.0
    for m in mass:
        q += within.get(m, 0.0) / two_m - resolution * (mass[m] / two_m) ** 2
    return ModularityScore(q=q, resolution=resolution)


class _Condensed:
    """Symmetrized working graph that Louvain repeatedly collapses."""

    def __init__(self, adj, loops, strength):
        self.adj = adj
        self.loops = loops
        self.strength = strength
        self.n = len(strength)


def _local_moves(g: _Condensed, two_m: float, resolution: float, rng: random.Random):
    """One Louvain level: move nodes between communities until no gain.

    Returns (labels per node, gained_anything). Ties prefer keeping the
    current community, then the lowest community id, for determinism.
    """
    labels = list(range(g.n))
    comm_mass = list(g.strength)
    order = list(range(g.n))
    improved = False
    while True:
        rng.shuffle(order)
        moved = 0
        for i in order:
            if g.strength[i] == 0:
                continue
            here = labels[i]
            link: dict[int, float] = {}
            for j, w in g.adj[i].items():
                link[labels[j]] = link.get(labels[j], 0.0) + w
            k_i = g.strength[i]
            # Gain of leaving `here` (its aggregates exclude i below).
            base = link.get(here, 0.0) - resolution * k_i * (comm_mass[here] - k_i) / two_m
            best_gain = 0.0
            best_comm = here
            for c in sorted(link):
                if c == here:
                    continue
                gain = (link[c] - resolution * k_i * comm_mass[c] / two_m) - base
                if gain > best_gain + 1e-12:
                    best_gain = gain
                    best_comm = c
            if best_comm != here:
                comm_mass[here] -= k_i
                comm_mass[best_comm] += k_i
                labels[i] = best_comm
                moved += 1
                improved = True
        if moved == 0:
            break
    return labels, improved


def _condense(g: _Condensed, labels: list[int]):
    """Collapse communities into supernodes, preserving modularity."""
    remap: dict[int, int] = {}
    for lab in labels:
        if lab not in remap:
            remap[lab] = len(remap)
    k = len(remap)
    adj: list[dict[int, float]] = [{} for _ in range(k)]
    loops = [0.0] * k
    strength = [0.0] * k
    for i in range(g.n):
        ci = remap[labels[i]]
        loops[ci] += g.loops[i]
        strength[ci] += g.strength[i]
        for j, w in g.adj[i].items():
            cj = remap[labels[j]]
            if ci == cj:
                loops[ci] += w  # both directions of the pair land here
            else:
                adj[ci][cj] = adj[ci].get(cj, 0.0) + w
    return _Condensed(adj, loops, strength), remap


def louvain(net: FlowNetwork, seed: int = 0, resolution: float = 1.0) -> OptimizationResult:
    """Two-phase Louvain on the symmetrized network.

    Deterministic under a fixed seed; the returned ``codelength`` field
    carries the modularity Q of the final partition.
    """
    if net.n_nodes == 0:
        raise ValueError("empty network")
    adj, loops, strength, two_m = _symmetric_adjacency(net)
    if two_m == 0:
        part = Partition(range(net.n_nodes))
        return OptimizationResult(
            partition=part,
            codelength=0.0,
            sweeps_run=0,
            trial_codelengths=[0.0],
            seed_used=seed,
            method="louvain",
        )
    g = _Condensed(adj, loops, strength)
    rng = random.Random(derive_seed(seed, 0))

    node_to_super = list(range(net.n_nodes))
    levels = 0
    while True:
        labels, improved = _local_moves(g, two_m, resolution, rng)
        if not improved and levels > 0:
            break
        levels += 1
        g, remap = _condense(g, labels)
        node_to_super = [remap[labels[s]] for s in node_to_super]
        if not improved or g.n == 1:
            break

    part = Partition(node_to_super).compact().relabeled_by_mass(strength)
    q = modularity(net, part, resolution).q
    return OptimizationResult(
        partition=part,
        codelength=q,
        sweeps_run=levels,
        trial_codelengths=[q],
        seed_used=seed,
        method="louvain",
    )


def greedy_modularity(net: FlowNetwork, resolution: float = 1.0) -> OptimizationResult:
    """Agglomerative modularity: repeatedly merge the connected module pair
    with the largest gain until none is positive.

    Deterministic: gains tie-break on the lowest (id, id) pair, communities
    are identified by their smallest member node. ``codelength`` carries Q.
    An edgeless network comes back as all singletons (nothing to merge).
    """
    if net.n_nodes == 0:
        raise ValueError("empty network")
    adj, loops, strength, two_m = _symmetric_adjacency(net)
    if two_m == 0:
        return OptimizationResult(
            partition=Partition(range(net.n_nodes)),
            codelength=0.0,
            sweeps_run=0,
            trial_codelengths=[0.0],
            seed_used=0,
            method="greedy",
        )

    active = [i for i in range(net.n_nodes) if strength[i] > 0]
    comm_of = {i: i for i in active}
    members: dict[int, list[int]] = {i: [i] for i in active}
    mass = {i: strength[i] for i in active}
    cross: dict[int, dict[int, float]] = {i: {} for i in active}
    for i in active:
        for j, w in adj[i].items():
            if strength[j] > 0 and i != j:
                cross[i][j] = cross[i].get(j, 0.0) + w

    def gain(c: int, d: int) -> float:
        return 2.0 * (cross[c].get(d, 0.0) / two_m - resolution * mass[c] * mass[d] / (two_m * two_m))

    while True:
        best = None
        best_gain = 1e-12
        for c in sorted(cross):
            for d in sorted(cross[c]):
                if d <= c:
                    continue
                val = gain(c, d)
                if val > best_gain:
                    best_gain = val
                    best = (c, d)
        if best is None:
            break
        c, d = best
        # Merge d into c (c < d keeps the smallest-member id stable).
        members[c].extend(members[d])
        mass[c] += mass[d]
        for e, w in cross[d].items():
            if e == c:
                continue
            cross[c][e] = cross[c].get(e, 0.0) + w
            cross[e][c] = cross[e].get(c, 0.0) + w
        for e in cross[d]:
            cross[e].pop(d, None)
        cross[c].pop(d, None)
        del cross[d], members[d], mass[d]
        for i in comm_of:
            if comm_of[i] == d:
                comm_of[i] = c

    # Isolated nodes stay as their own singleton communities.
    labels = [comm_of.get(i, i) for i in range(net.n_nodes)]
    part = Partition(labels).compact().relabeled_by_mass(strength)
    q = modularity(net, part, resolution).q
    return OptimizationResult(
        partition=part,
        codelength=q,
        sweeps_run=len(active) - len(members),
        trial_codelengths=[q],
        seed_used=0,
        method="greedy",
    )
