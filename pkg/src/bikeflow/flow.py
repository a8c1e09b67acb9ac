"""Node visit rates and edge flow rates under two flow models.

``empirical`` takes the rates straight from normalized trip counts; the
``random_walk`` model solves for the stationary distribution of a walker
that follows out-edges proportionally to weight and teleports to a uniformly
random node with probability tau (dangling nodes always teleport).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .network import FlowNetwork

EMPIRICAL = "empirical"
RANDOM_WALK = "random_walk"


class ConvergenceError(RuntimeError):
    """Stationary solve did not reach the tolerance within max_iter."""

    def __init__(self, residual: float, iterations: int):
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"stationary distribution not converged after {iterations} iterations "
            f"(last L1 residual {residual:.3e})"
        )


@dataclass
class FlowState:
    """Per-node visit rates and per-edge flow rates for one network.

    ``edge_flow`` is aligned with ``net.edge_*``. ``node_teleport`` is the
    per-node teleport emission (tau * visit for nodes with out-edges, the
    full visit rate for dangling ones; all zero in the empirical model) and
    feeds exit-rate accounting downstream. ``node_out_flow`` caches each
    node's total recorded out-flow.
    """

    net: FlowNetwork
    model: str
    tau: float
    node_visit: np.ndarray
    edge_flow: np.ndarray
    node_teleport: np.ndarray
    node_out_flow: np.ndarray


def empirical_flow(net: FlowNetwork) -> FlowState:
    """Flow rates proportional to observed trip counts.

    Edge flow is weight / total weight; a node's visit rate is its
    out-strength share, so nodes that never start a trip get zero visit and
    end up UNASSIGNED downstream.
    """
    if net.n_nodes == 0:
        raise ValueError("empty network")
    total = net.total_weight
    if total <= 0:
        raise ValueError("network has no edge weight")
    edge_flow = net.edge_weight / total
    node_visit = net.out_strength_vector() / total
    zeros = np.zeros(net.n_nodes)
    return FlowState(
        net=net,
        model=EMPIRICAL,
        tau=0.0,
        node_visit=node_visit,
        edge_flow=edge_flow,
        node_teleport=zeros,
        node_out_flow=np.bincount(net.edge_src, weights=edge_flow, minlength=net.n_nodes),
    )


def random_walk_flow(
    net: FlowNetwork,
    tau: float = 0.15,
    tol: float = 1e-12,
    max_iter: int = 10_000,
) -> FlowState:
    """Stationary visit rates of the teleporting random walk.

    One step from a node with out-edges teleports with probability tau and
    otherwise follows an out-edge proportionally to weight; a dangling node
    teleports with probability 1. The fixed point is found by half-damped
    power iteration (the damping removes period-2 oscillation on cyclic
    graphs without changing the fixed point), converged when successive
    iterates differ by less than ``tol`` in L1.
    """
    if net.n_nodes == 0:
        raise ValueError("empty network")
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must be in [0, 1], got {tau}")
    if tol <= 0 or max_iter <= 0:
        raise ValueError("tol and max_iter must be positive")

    n = net.n_nodes
    strength = net.out_strength_vector()
    dangling = strength == 0
    # Per-edge transition probability w / out_strength(origin).
    trans = np.zeros(net.n_edges)
    if net.n_edges:
        trans = net.edge_weight / strength[net.edge_src]

    p = np.full(n, 1.0 / n)
    residual = np.inf
    for it in range(max_iter):
        follow = np.bincount(net.edge_dst, weights=p[net.edge_src] * trans, minlength=n)
        teleport_mass = tau * float(p[~dangling].sum()) + float(p[dangling].sum())
        stepped = (1.0 - tau) * follow + teleport_mass / n
        nxt = 0.5 * (p + stepped)
        residual = float(np.abs(nxt - p).sum())
        p = nxt
        if residual < tol:
            break
    else:
        raise ConvergenceError(residual, max_iter)

    p = p / p.sum()
    edge_flow = (1.0 - tau) * p[net.edge_src] * trans
    node_teleport = np.where(dangling, p, tau * p)
    return FlowState(
        net=net,
        model=RANDOM_WALK,
        tau=tau,
        node_visit=p,
        edge_flow=edge_flow,
        node_teleport=node_teleport,
        node_out_flow=np.bincount(net.edge_src, weights=edge_flow, minlength=n),
    )


def flow_csv(flow: FlowState) -> str:
    """Audit dump: station_id,visit_rate with 12 significant digits."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["station_id", "visit_rate"])
    for station, rate in zip(flow.net.stations, flow.node_visit):
        writer.writerow([station.id, format(float(rate), ".12g")])
    return buf.getvalue()
