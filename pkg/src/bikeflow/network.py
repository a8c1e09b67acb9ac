"""Stations and the directed trip-count graph (origin-destination matrix).

The network aggregates cleaned trips into at most one weighted edge per
ordered station pair; edge weights are observed trip counts, so the total
edge weight always equals the number of aggregated trips.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

if TYPE_CHECKING:
    from .trips import TripRecord


class UnknownStationError(ValueError):
    """Trips reference station ids missing from the station metadata."""

    def __init__(self, ids: Iterable[int]):
        self.station_ids = sorted(set(ids))
        shown = ", ".join(str(i) for i in self.station_ids[:20])
        extra = "" if len(self.station_ids) <= 20 else f" (+{len(self.station_ids) - 20} more)"
        super().__init__(f"trips reference unknown station ids: {shown}{extra}")


@dataclass(frozen=True)
class Station:
    id: int
    name: str = ""
    lat: float | None = None
    lon: float | None = None

    def __post_init__(self):
        if (self.lat is None) != (self.lon is None):
            raise ValueError(f"station {self.id}: lat and lon must be given together")
        if self.lat is not None and not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"station {self.id}: latitude {self.lat} out of range")
        if self.lon is not None and not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"station {self.id}: longitude {self.lon} out of range")

    @property
    def has_coord(self) -> bool:
        return self.lat is not None


class FlowNetwork:
    """Immutable directed weighted graph over a fixed station universe.

    Edges are stored as parallel arrays sorted by (origin, destination);
    every weight is positive and there is at most one edge per ordered pair.
    Stations with no trips remain as isolated nodes.
    """

    def __init__(
        self,
        stations: Sequence[Station],
        edge_src: Sequence[int],
        edge_dst: Sequence[int],
        edge_weight: Sequence[float],
    ):
        self.stations = list(stations)
        ids = [s.id for s in self.stations]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate station ids in station list")
        self._index = {s.id: i for i, s in enumerate(self.stations)}

        src = np.asarray(edge_src, dtype=np.int64)
        dst = np.asarray(edge_dst, dtype=np.int64)
        w = np.asarray(edge_weight, dtype=np.float64)
        if not (len(src) == len(dst) == len(w)):
            raise ValueError("edge arrays must have equal length")
        n = len(self.stations)
        if len(src) and (src.min() < 0 or src.max() >= n or dst.min() < 0 or dst.max() >= n):
            raise ValueError("edge endpoint index out of range")
        if len(w) and w.min() <= 0:
            raise ValueError("edge weights must be positive")
        order = np.lexsort((dst, src))
        self.edge_src = src[order]
        self.edge_dst = dst[order]
        self.edge_weight = w[order]
        pairs = set(zip(self.edge_src.tolist(), self.edge_dst.tolist()))
        if len(pairs) != len(self.edge_src):
            raise ValueError("duplicate edges for the same ordered station pair")

        self._out_strength: np.ndarray | None = None
        self._in_strength: np.ndarray | None = None

    @property
    def n_nodes(self) -> int:
        return len(self.stations)

    @property
    def n_edges(self) -> int:
        return len(self.edge_src)

    @property
    def total_weight(self) -> float:
        return float(self.edge_weight.sum())

    def index_of(self, station_id: int) -> int:
        return self._index[station_id]

    def out_strength_vector(self) -> np.ndarray:
        if self._out_strength is None:
            self._out_strength = np.bincount(
                self.edge_src, weights=self.edge_weight, minlength=self.n_nodes
            )
        return self._out_strength

    def in_strength_vector(self) -> np.ndarray:
        if self._in_strength is None:
            self._in_strength = np.bincount(
                self.edge_dst, weights=self.edge_weight, minlength=self.n_nodes
            )
        return self._in_strength

    def scaled(self, factor: float) -> "FlowNetwork":
        """Same graph with every edge weight multiplied by ``factor`` > 0."""
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        return FlowNetwork(self.stations, self.edge_src, self.edge_dst, self.edge_weight * factor)


def out_strength(net: FlowNetwork, node: int) -> float:
    """Sum of out-edge weights of ``node``, self-loops included."""
    if not 0 <= node < net.n_nodes:
        raise IndexError(f"node index {node} out of range")
    return float(net.out_strength_vector()[node])


def in_strength(net: FlowNetwork, node: int) -> float:
    """Sum of in-edge weights of ``node``, self-loops included."""
    if not 0 <= node < net.n_nodes:
        raise IndexError(f"node index {node} out of range")
    return float(net.in_strength_vector()[node])


def build_network(trips: Iterable["TripRecord"], stations: Sequence[Station]) -> FlowNetwork:
    """Aggregate trips into the directed origin-destination graph.

    Every trip's endpoints must appear in ``stations``; unknown ids raise
    :class:`UnknownStationError` listing the offending ids. Trips between the
    same ordered pair collapse into one edge whose weight is the trip count.
    """
    index = {s.id: i for i, s in enumerate(stations)}
    counts: dict[tuple[int, int], int] = {}
    unknown: set[int] = set()
    for t in trips:
        a = index.get(t.start_station_id)
        b = index.get(t.end_station_id)
        if a is None:
            unknown.add(t.start_station_id)
        if b is None:
            unknown.add(t.end_station_id)
        if a is None or b is None:
            continue
        counts[(a, b)] = counts.get((a, b), 0) + 1
    if unknown:
        raise UnknownStationError(unknown)
    keys = sorted(counts)
    return FlowNetwork(
        stations,
        [k[0] for k in keys],
        [k[1] for k in keys],
        [counts[k] for k in keys],
    )


def _fmt_weight(w: float) -> str:
    return str(int(w)) if float(w).is_integer() else format(w, ".12g")


def edge_list_csv(net: FlowNetwork) -> str:
    """Edge list as CSV text: origin_id,destination_id,weight."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["origin_id", "destination_id", "weight"])
    for s, d, w in zip(net.edge_src, net.edge_dst, net.edge_weight):
        writer.writerow([net.stations[s].id, net.stations[d].id, _fmt_weight(w)])
    return buf.getvalue()


def read_edge_list_csv(path: str | Path, stations: Sequence[Station] | None = None) -> FlowNetwork:
    """Load an edge-list CSV; without station metadata the node universe is
    the set of ids appearing in the edges, in ascending id order."""
    rows: list[tuple[int, int, float]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"origin_id", "destination_id", "weight"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ValueError(f"{path}: expected header origin_id,destination_id,weight")
        for row in reader:
            rows.append(
                (int(row["origin_id"]), int(row["destination_id"]), float(row["weight"]))
            )
    if stations is None:
        ids = sorted({r[0] for r in rows} | {r[1] for r in rows})
        stations = [Station(id=i) for i in ids]
    index = {s.id: i for i, s in enumerate(stations)}
    missing = {i for r in rows for i in (r[0], r[1]) if i not in index}
    if missing:
        raise UnknownStationError(missing)
    return FlowNetwork(
        stations,
        [index[r[0]] for r in rows],
        [index[r[1]] for r in rows],
        [r[2] for r in rows],
    )


def read_stations_csv(path: str | Path) -> list[Station]:
    """Station metadata CSV: id,name,lat,lon (lat/lon may be empty)."""
    out: list[Station] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "id" not in reader.fieldnames:
            raise ValueError(f"{path}: expected header with at least an 'id' column")
        for row in reader:
            lat = row.get("lat") or None
            lon = row.get("lon") or None
            out.append(
                Station(
                    id=int(row["id"]),
                    name=(row.get("name") or "").strip(),
                    lat=float(lat) if lat is not None else None,
                    lon=float(lon) if lon is not None else None,
                )
            )
    return out


def stations_csv(stations: Sequence[Station]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["id", "name", "lat", "lon"])
    for s in stations:
        writer.writerow(
            [s.id, s.name, "" if s.lat is None else repr(s.lat), "" if s.lon is None else repr(s.lon)]
        )
    return buf.getvalue()
