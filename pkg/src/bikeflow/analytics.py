"""Community interaction accounting and the centroid-collapsed network.

All counts here are raw trip counts straight from edge weights, never
normalized flow, so totals reconcile exactly. Trips touching UNASSIGNED
stations land in a residual bucket that keeps the books balanced.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .network import FlowNetwork, Station
from .partition import UNASSIGNED, Partition

#: Row label used for the residual (unassigned) bucket in exports.
RESIDUAL_LABEL = "unassigned"


@dataclass
class InteractionTable:
    """Per-module trip counts plus the full module-to-module matrix.

    ``matrix`` has one extra trailing row/column for the residual bucket of
    UNASSIGNED stations (all zero when everything is assigned). Diagonal
    entries are within-module trips; self-loop trips count as within.
    """

    n_modules: int
    stations: list[int]
    trips_within: list[float]
    trips_out: list[float]
    trips_in: list[float]
    matrix: np.ndarray
    residual_stations: int = 0
    metadata: dict = field(default_factory=dict)

    @property
    def total_trips(self) -> float:
        return float(self.matrix.sum())

    def row(self, module: int) -> tuple[int, float, float, float]:
        return (
            self.stations[module],
            self.trips_within[module],
            self.trips_out[module],
            self.trips_in[module],
        )


def interaction_table(net: FlowNetwork, part: Partition) -> InteractionTable:
    """Count trips within, out of and into every module.

    The partition must have one entry per station (UNASSIGNED allowed);
    the residual bucket absorbs trips whose origin or destination is
    unassigned, so sum(within) + sum(out) over all rows including the
    residual equals the total trip count exactly.
    """
    if len(part) != net.n_nodes:
        raise ValueError(
            f"partition covers {len(part)} stations, network has {net.n_nodes}"
        )
    m = part.n_modules
    labels = [x if x != UNASSIGNED else m for x in part.labels]
    matrix = np.zeros((m + 1, m + 1))
    for e in range(net.n_edges):
        matrix[labels[net.edge_src[e]], labels[net.edge_dst[e]]] += net.edge_weight[e]

    station_count = [0] * (m + 1)
    for x in labels:
        station_count[x] += 1
    within = [float(matrix[i, i]) for i in range(m + 1)]
    out = [float(matrix[i].sum() - matrix[i, i]) for i in range(m + 1)]
    into = [float(matrix[:, i].sum() - matrix[i, i]) for i in range(m + 1)]
    return InteractionTable(
        n_modules=m,
        stations=station_count,
        trips_within=within,
        trips_out=out,
        trips_in=into,
        matrix=matrix,
        residual_stations=station_count[m],
        metadata={"within_includes_self_loops": True},
    )


def self_containment(table: InteractionTable) -> float:
    """Fraction of all trips that start and end in the same module.

    Residual (unassigned) trips count only toward the denominator.
    """
    total = table.total_trips
    if total <= 0:
        raise ValueError("interaction table has no trips")
    return float(sum(table.trips_within[: table.n_modules])) / total


@dataclass
class CommunityGraph:
    """One node per module at its members' mean coordinate.

    ``centroids[i]`` is (lat, lon) or None when no member has coordinates;
    such modules are listed in ``missing_centroid``. Edge weights are the
    off-diagonal interaction counts; zero-exchange pairs get no edge.
    """

    n_modules: int
    centroids: list[tuple[float, float] | None]
    stations: list[int]
    trips_within: list[float]
    trips_out: list[float]
    trips_in: list[float]
    edges: list[tuple[int, int, float]]
    missing_centroid: list[int]


def community_graph(
    net: FlowNetwork, part: Partition, stations: Sequence[Station] | None = None
) -> CommunityGraph:
    """Collapse the station network onto module centroids."""
    table = interaction_table(net, part)
    if stations is None:
        stations = net.stations
    m = table.n_modules
    sums = [[0.0, 0.0, 0] for _ in range(m)]
    for i, label in enumerate(part.labels):
        if label == UNASSIGNED:
            continue
        s = stations[i]
        if s.has_coord:
            sums[label][0] += s.lat
            sums[label][1] += s.lon
            sums[label][2] += 1
    centroids: list[tuple[float, float] | None] = []
    missing = []
    for i, (lat, lon, k) in enumerate(sums):
        if k:
            centroids.append((lat / k, lon / k))
        else:
            centroids.append(None)
            missing.append(i)
    edges = [
        (i, j, float(table.matrix[i, j]))
        for i in range(m)
        for j in range(m)
        if i != j and table.matrix[i, j] > 0
    ]
    return CommunityGraph(
        n_modules=m,
        centroids=centroids,
        stations=table.stations[:m],
        trips_within=table.trips_within[:m],
        trips_out=table.trips_out[:m],
        trips_in=table.trips_in[:m],
        edges=edges,
        missing_centroid=missing,
    )


def _fmt_count(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else format(x, ".12g")


def interaction_table_csv(table: InteractionTable) -> str:
    """Per-module summary with columns cluster,stations,within,out,in.

    The residual row appears last, only when any station is unassigned.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["cluster", "stations", "within", "out", "in"])
    for i in range(table.n_modules):
        writer.writerow(
            [
                i,
                table.stations[i],
                _fmt_count(table.trips_within[i]),
                _fmt_count(table.trips_out[i]),
                _fmt_count(table.trips_in[i]),
            ]
        )
    if table.residual_stations:
        r = table.n_modules
        writer.writerow(
            [
                RESIDUAL_LABEL,
                table.stations[r],
                _fmt_count(table.trips_within[r]),
                _fmt_count(table.trips_out[r]),
                _fmt_count(table.trips_in[r]),
            ]
        )
    return buf.getvalue()


def interaction_matrix_csv(table: InteractionTable) -> str:
    """Full module-to-module trip matrix, residual bucket included."""
    names = [str(i) for i in range(table.n_modules)] + [RESIDUAL_LABEL]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["module"] + names)
    for i, name in enumerate(names):
        writer.writerow([name] + [_fmt_count(x) for x in table.matrix[i]])
    return buf.getvalue()


def community_edges_csv(graph: CommunityGraph) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["origin_module", "destination_module", "trips"])
    for i, j, w in graph.edges:
        writer.writerow([i, j, _fmt_count(w)])
    return buf.getvalue()


def community_geojson(graph: CommunityGraph) -> str:
    """GeoJSON FeatureCollection: Point per located module, LineString per
    inter-module exchange with both endpoints located."""
    features = []
    for i in range(graph.n_modules):
        c = graph.centroids[i]
        if c is None:
            continue
        features.append(
            {
                "type": "Feature",
                "geometry": {"type": "Point", "coordinates": [c[1], c[0]]},
                "properties": {
                    "module": i,
                    "stations": graph.stations[i],
                    "trips_within": graph.trips_within[i],
                    "trips_out": graph.trips_out[i],
                    "trips_in": graph.trips_in[i],
                },
            }
        )
    for i, j, w in graph.edges:
        ci, cj = graph.centroids[i], graph.centroids[j]
        if ci is None or cj is None:
            continue
        features.append(
            {
                "type": "Feature",
                "geometry": {
                    "type": "LineString",
                    "coordinates": [[ci[1], ci[0]], [cj[1], cj[0]]],
                },
                "properties": {"origin_module": i, "destination_module": j, "trips": w},
            }
        )
    doc = {
        "type": "FeatureCollection",
        "features": features,
        "properties": {"modules_without_centroid": graph.missing_centroid},
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
