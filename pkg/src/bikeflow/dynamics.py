"""Hour-of-day community evolution: per-hour detection over trip slices.

Each hour gets its own network, flow state and detection run (seeded
deterministically from the base seed and the hour), and module labels are
size-ordered within the hour, so label 0 is always that hour's largest-flow
community. Stations below the per-hour flow threshold sit out as UNASSIGNED.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np

from . import metrics
from .flow import EMPIRICAL, empirical_flow, random_walk_flow
from .infomap import OptimizerConfig, infomap
from .network import Station, build_network
from .partition import UNASSIGNED, Partition
from .trips import TripRecord, filter_by_hour


@dataclass
class HourlyAssignment:
    """Station-by-hour module labels plus per-hour summary figures.

    ``labels`` is (n_stations, 24) with UNASSIGNED wherever a station took
    no part in that hour's detection. Per-hour trip counts are bucket sizes
    before any station thresholding, so they always sum to the corpus size.
    """

    station_ids: list[int]
    labels: np.ndarray
    trips: list[int]
    modules: list[int]
    codelengths: list[float]

    def column(self, hour: int) -> list[int]:
        return self.labels[:, hour].tolist()


def hourly_communities(
    trips: Sequence[TripRecord],
    stations: Sequence[Station],
    cfg: OptimizerConfig,
    min_flow: int = 1,
    flow_model: str = EMPIRICAL,
    tau: float = 0.15,
) -> HourlyAssignment:
    """Run detection independently for each of the 24 start-hour buckets.

    Stations with fewer than ``min_flow`` trips (arrivals plus departures)
    in an hour are dropped from that hour's network and reported UNASSIGNED.
    An hour with no usable trips yields an all-UNASSIGNED column. The hour
    seed is ``cfg.seed XOR hour``, keeping columns independent but
    reproducible.
    """
    if min_flow < 0:
        raise ValueError("min_flow must be >= 0")
    n = len(stations)
    station_index = {s.id: i for i, s in enumerate(stations)}
    labels = np.full((n, 24), UNASSIGNED, dtype=np.int64)
    trip_counts: list[int] = []
    module_counts: list[int] = []
    codelengths: list[float] = []

    for hour in range(24):
        bucket = filter_by_hour(trips, hour)
        trip_counts.append(len(bucket))

        involvement: dict[int, int] = {}
        for t in bucket:
            involvement[t.start_station_id] = involvement.get(t.start_station_id, 0) + 1
            involvement[t.end_station_id] = involvement.get(t.end_station_id, 0) + 1
        kept = [s for s in stations if involvement.get(s.id, 0) >= max(min_flow, 1)]
        kept_ids = {s.id for s in kept}
        usable = [
            t for t in bucket if t.start_station_id in kept_ids and t.end_station_id in kept_ids
        ]
        if not usable:
            module_counts.append(0)
            codelengths.append(0.0)
            continue

        net = build_network(usable, kept)
        flow = (
            empirical_flow(net)
            if flow_model == EMPIRICAL
            else random_walk_flow(net, tau=tau)
        )
        result = infomap(flow, net, replace(cfg, seed=cfg.seed ^ hour))
        for i, s in enumerate(kept):
            labels[station_index[s.id], hour] = result.partition[i]
        module_counts.append(result.partition.n_modules)
        codelengths.append(result.codelength)

    return HourlyAssignment(
        station_ids=[s.id for s in stations],
        labels=labels,
        trips=trip_counts,
        modules=module_counts,
        codelengths=codelengths,
    )


class ColumnSimilarity(NamedTuple):
    nmi: float
    insufficient_overlap: bool


def column_similarity(a: Sequence[int], b: Sequence[int]) -> ColumnSimilarity:
    """NMI of two hour columns over stations assigned in both.

    Flags (and scores 0) when fewer than two stations are co-assigned.
    """
    if len(a) != len(b):
        raise metrics.PartitionMismatchError("columns cover different station counts")
    co_assigned = sum(
        1 for x, y in zip(a, b) if x != UNASSIGNED and y != UNASSIGNED
    )
    if co_assigned < 2:
        return ColumnSimilarity(0.0, True)
    return ColumnSimilarity(metrics.nmi(Partition(a), Partition(b)), False)


def assignments_csv(ha: HourlyAssignment) -> str:
    """station_id,h00..h23 with empty cells for UNASSIGNED."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["station_id"] + [f"h{h:02d}" for h in range(24)])
    for i, sid in enumerate(ha.station_ids):
        row: list[object] = [sid]
        for h in range(24):
            x = int(ha.labels[i, h])
            row.append("" if x == UNASSIGNED else x)
        writer.writerow(row)
    return buf.getvalue()


def hourly_summary_csv(ha: HourlyAssignment) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["hour", "trips", "modules", "codelength"])
    for h in range(24):
        writer.writerow(
            [h, ha.trips[h], ha.modules[h], format(ha.codelengths[h], ".12g")]
        )
    return buf.getvalue()
