"""Node-to-module assignments shared by detectors, reports and exports."""

from __future__ import annotations

import csv
import io
from collections.abc import Iterable, Sequence
from pathlib import Path

#: Reserved label for nodes that carry no flow and take part in nothing.
UNASSIGNED = -1


class Partition:
    """Module label per node; ``UNASSIGNED`` marks nodes left out of detection.

    Labels are plain integers >= 0. Detectors emit dense labels 0..m-1;
    arbitrary non-negative labels are accepted and can be normalized with
    :meth:`compact`.
    """

    __slots__ = ("labels",)

    def __init__(self, labels: Iterable[int]):
        labels = [int(x) for x in labels]
        for x in labels:
            if x < UNASSIGNED:
                raise ValueError(f"invalid module label {x}")
        self.labels = labels

    def __len__(self) -> int:
        return len(self.labels)

    def __getitem__(self, node: int) -> int:
        return self.labels[node]

    def __iter__(self):
        return iter(self.labels)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return self.labels == other.labels

    def __repr__(self) -> str:
        return f"Partition({self.labels!r})"

    @property
    def n_modules(self) -> int:
        """Number of module slots (max label + 1); 0 if nothing is assigned."""
        return max((x for x in self.labels if x >= 0), default=-1) + 1

    def assigned_nodes(self) -> list[int]:
        return [i for i, x in enumerate(self.labels) if x != UNASSIGNED]

    def modules(self) -> dict[int, list[int]]:
        """Module id -> member node indexes, UNASSIGNED excluded."""
        out: dict[int, list[int]] = {}
        for i, x in enumerate(self.labels):
            if x != UNASSIGNED:
                out.setdefault(x, []).append(i)
        return out

    def copy(self) -> "Partition":
        return Partition(self.labels)

    def compact(self) -> "Partition":
        """Relabel to dense 0..m-1 in order of first appearance."""
        remap: dict[int, int] = {}
        out = []
        for x in self.labels:
            if x == UNASSIGNED:
                out.append(UNASSIGNED)
                continue
            if x not in remap:
                remap[x] = len(remap)
            out.append(remap[x])
        return Partition(out)

    def relabeled_by_mass(self, mass: Sequence[float]) -> "Partition":
        """Dense relabel so module 0 carries the largest total node mass.

        Ties break on the smallest member node index, which keeps the result
        reproducible regardless of incoming label values.
        """
        if len(mass) != len(self.labels):
            raise ValueError("mass vector length does not match node count")
        groups = self.modules()
        order = sorted(
            groups,
            key=lambda m: (-sum(mass[i] for i in groups[m]), min(groups[m])),
        )
        remap = {old: new for new, old in enumerate(order)}
        return Partition(
            [remap[x] if x != UNASSIGNED else UNASSIGNED for x in self.labels]
        )

    @classmethod
    def singletons(cls, n: int, active: Sequence[bool] | None = None) -> "Partition":
        """One module per node; nodes with ``active[i]`` false stay UNASSIGNED."""
        if active is None:
            return cls(range(n))
        return cls([i if active[i] else UNASSIGNED for i in range(n)])

    @classmethod
    def from_modules(cls, n: int, groups: Iterable[Iterable[int]]) -> "Partition":
        """Build from explicit member lists; uncovered nodes are UNASSIGNED."""
        labels = [UNASSIGNED] * n
        for m, members in enumerate(groups):
            for i in members:
                if labels[i] != UNASSIGNED:
                    raise ValueError(f"node {i} listed in more than one module")
                labels[i] = m
        return cls(labels)


def partition_csv(part: Partition, station_ids: Sequence[int]) -> str:
    """station_id,module_id rows; UNASSIGNED becomes an empty field."""
    if len(part) != len(station_ids):
        raise ValueError("partition and station id list differ in length")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["station_id", "module_id"])
    for sid, label in zip(station_ids, part):
        writer.writerow([sid, "" if label == UNASSIGNED else label])
    return buf.getvalue()


def read_partition_csv(path: str | Path, station_ids: Sequence[int]) -> Partition:
    """Load a partition CSV aligned to ``station_ids``.

    Ids present in the file but not in the universe, or vice versa, are a
    mismatch and raise with the offending ids listed.
    """
    seen: dict[int, int] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or {"station_id", "module_id"} - set(reader.fieldnames):
            raise ValueError(f"{path}: expected header station_id,module_id")
        for row in reader:
            sid = int(row["station_id"])
            raw = (row["module_id"] or "").strip()
            seen[sid] = UNASSIGNED if not raw else int(raw)
    universe = set(station_ids)
    unknown = sorted(set(seen) - universe)
    missing = sorted(universe - set(seen))
    if unknown or missing:
        raise ValueError(
            f"{path}: partition/station mismatch; unknown ids {unknown[:10]}, "
            f"missing ids {missing[:10]}"
        )
    return Partition([seen[sid] for sid in station_ids])
