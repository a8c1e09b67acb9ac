"""Trip CSV ingestion, cleaning rules, and hour-of-day slicing.

Parsing and cleaning are deliberately separate: the parser reproduces what
the file says (including negative durations and missing fields), cleaning
applies the drop rules and accounts for every removed row.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, fields
from datetime import datetime
from pathlib import Path
from typing import IO, Iterable, Sequence


class SchemaError(ValueError):
    """The input file does not match the expected column layout."""


#: Default column layout of London cycle-hire open-data trip CSVs.
DEFAULT_COLUMNS: dict[str, str] = {
    "rental_id": "Rental Id",
    "duration": "Duration",
    "bike_id": "Bike Id",
    "end_time": "End Date",
    "end_station_id": "EndStation Id",
    "end_station_name": "EndStation Name",
    "start_time": "Start Date",
    "start_station_id": "StartStation Id",
    "start_station_name": "StartStation Name",
}

DEFAULT_TIMESTAMP_FORMAT = "%d/%m/%Y %H:%M"

#: Canonical column order for cleaned-trip CSVs written by this package.
CLEAN_COLUMNS = [
    "rental_id",
    "duration",
    "bike_id",
    "start_time",
    "end_time",
    "start_station_id",
    "end_station_id",
    "start_station_name",
    "end_station_name",
]

CLEAN_TIMESTAMP_FORMAT = "%Y-%m-%d %H:%M"


@dataclass(frozen=True)
class RawTrip:
    """One rental row as parsed; may still violate the cleaning rules."""

    rental_id: int
    duration: int
    start_time: datetime
    end_time: datetime
    start_station_id: int | None = None
    end_station_id: int | None = None
    bike_id: int | None = None
    start_station_name: str = ""
    end_station_name: str = ""


@dataclass(frozen=True)
class TripRecord(RawTrip):
    """A cleaned rental: endpoints and bike id present, duration >= 0."""

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError(f"trip {self.rental_id}: negative duration")
        if self.start_station_id is None or self.end_station_id is None:
            raise ValueError(f"trip {self.rental_id}: missing station id")
        if self.bike_id is None:
            raise ValueError(f"trip {self.rental_id}: missing bike id")


@dataclass(frozen=True)
class RowError:
    line: int
    message: str


@dataclass
class ParseResult:
    trips: list[RawTrip]
    errors: list[RowError]
    rows_read: int


@dataclass
class CleaningStats:
    total_read: int = 0
    dropped_repair: int = 0
    dropped_negative_or_no_destination: int = 0
    dropped_no_bike_id: int = 0
    dropped_weekend: int = 0
    retained: int = 0

    def reconciles(self) -> bool:
        dropped = (
            self.dropped_repair
            + self.dropped_negative_or_no_destination
            + self.dropped_no_bike_id
            + self.dropped_weekend
        )
        return self.retained + dropped == self.total_read

    def as_dict(self) -> dict[str, int]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def __add__(self, other: "CleaningStats") -> "CleaningStats":
        return CleaningStats(
            *(getattr(self, f.name) + getattr(other, f.name) for f in fields(self))
        )


@dataclass(frozen=True)
class IngestConfig:
    """File-level ingestion settings (repair stations, weekday filter, layout)."""

    repair_station_ids: frozenset[int] = frozenset()
    drop_weekends: bool = True
    columns: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_COLUMNS))
    timestamp_format: str = DEFAULT_TIMESTAMP_FORMAT


def load_ingest_config(path: str | Path) -> IngestConfig:
    """Read ingestion settings from a JSON file; absent keys keep defaults."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    unknown = set(data) - {"repair_station_ids", "drop_weekends", "columns", "timestamp_format"}
    if unknown:
        raise SchemaError(f"{path}: unknown config keys: {sorted(unknown)}")
    columns = dict(DEFAULT_COLUMNS)
    columns.update(data.get("columns", {}))
    bad = set(columns) - set(DEFAULT_COLUMNS)
    if bad:
        raise SchemaError(f"{path}: unknown column fields: {sorted(bad)}")
    return IngestConfig(
        repair_station_ids=frozenset(int(x) for x in data.get("repair_station_ids", [])),
        drop_weekends=bool(data.get("drop_weekends", True)),
        columns=columns,
        timestamp_format=data.get("timestamp_format", DEFAULT_TIMESTAMP_FORMAT),
    )


def _opt_int(value: str | None) -> int | None:
    if value is None:
        return None
    value = value.strip()
    if not value:
        return None
    try:
        return int(value)
    except ValueError:
        return None


def parse_trips(
    source: IO[bytes] | IO[str],
    schema: dict[str, str] | None = None,
    timestamp_format: str = DEFAULT_TIMESTAMP_FORMAT,
) -> ParseResult:
    """Parse a trip CSV stream into RawTrips.

    ``schema`` maps field names to header names (defaults to the London
    open-data layout). Mandatory fields are rental_id, duration and the two
    timestamps; a row where any of them fails to parse is skipped and
    recorded as a RowError. Optional fields (bike id, station ids) become
    absent when blank or unparseable.
    """
    schema = dict(DEFAULT_COLUMNS if schema is None else schema)
    text = io.TextIOWrapper(source, encoding="utf-8") if isinstance(source.read(0), bytes) else source
    reader = csv.DictReader(text)
    if reader.fieldnames is None:
        raise SchemaError("empty input: missing header row")
    headers = set(reader.fieldnames)
    mandatory = ["rental_id", "duration", "start_time", "end_time"]
    missing = [schema[f] for f in mandatory if schema[f] not in headers]
    if missing:
        raise SchemaError(f"missing required columns: {missing}")

    trips: list[RawTrip] = []
    errors: list[RowError] = []
    seen_ids: set[int] = set()
    rows = 0
    for line_no, row in enumerate(reader, start=2):
        rows += 1
        problems = []
        values: dict[str, object] = {}
        for f in mandatory:
            raw = (row.get(schema[f]) or "").strip()
            if f in ("rental_id", "duration"):
                try:
                    values[f] = int(raw)
                except ValueError:
                    problems.append(f"bad {f} {raw!r}")
            else:
                try:
                    values[f] = datetime.strptime(raw, timestamp_format)
                except ValueError:
                    problems.append(f"bad {f} {raw!r}")
        if not problems and values["rental_id"] in seen_ids:
            problems.append(f"duplicate rental_id {values['rental_id']}")
        if problems:
            errors.append(RowError(line_no, "; ".join(problems)))
            continue
        seen_ids.add(values["rental_id"])  # type: ignore[arg-type]
        trips.append(
            RawTrip(
                rental_id=values["rental_id"],  # type: ignore[arg-type]
                duration=values["duration"],  # type: ignore[arg-type]
                start_time=values["start_time"],  # type: ignore[arg-type]
                end_time=values["end_time"],  # type: ignore[arg-type]
                start_station_id=_opt_int(row.get(schema["start_station_id"])),
                end_station_id=_opt_int(row.get(schema["end_station_id"])),
                bike_id=_opt_int(row.get(schema["bike_id"])),
                start_station_name=(row.get(schema["start_station_name"]) or "").strip(),
                end_station_name=(row.get(schema["end_station_name"]) or "").strip(),
            )
        )
    return ParseResult(trips=trips, errors=errors, rows_read=rows)


def clean_trips(
    trips: Iterable[RawTrip],
    repair_station_ids: Iterable[int] = (),
    drop_weekends: bool = True,
) -> tuple[list[TripRecord], CleaningStats]:
    """Apply the drop rules in fixed order: repair station, missing
    destination / negative duration, missing bike id, weekend.

    Each dropped trip is attributed to exactly the first rule it violates,
    so the counters always reconcile with the input count. Cleaning is
    total (never raises) and idempotent.
    """
    repair = frozenset(repair_station_ids)
    stats = CleaningStats()
    kept: list[TripRecord] = []
    for t in trips:
        stats.total_read += 1
        if t.start_station_id in repair or t.end_station_id in repair:
            stats.dropped_repair += 1
            continue
        if t.end_station_id is None or t.start_station_id is None or t.duration < 0:
            stats.dropped_negative_or_no_destination += 1
            continue
        if t.bike_id is None:
            stats.dropped_no_bike_id += 1
            continue
        if drop_weekends and t.start_time.weekday() >= 5:
            stats.dropped_weekend += 1
            continue
        stats.retained += 1
        kept.append(
            TripRecord(
                rental_id=t.rental_id,
                duration=t.duration,
                start_time=t.start_time,
                end_time=t.end_time,
                start_station_id=t.start_station_id,
                end_station_id=t.end_station_id,
                bike_id=t.bike_id,
                start_station_name=t.start_station_name,
                end_station_name=t.end_station_name,
            )
        )
    return kept, stats


def filter_by_hour(trips: Iterable[TripRecord], hour: int) -> list[TripRecord]:
    """Trips whose start time falls in [hour:00, hour+1:00); start-time bucketing."""
    if not isinstance(hour, int) or not 0 <= hour <= 23:
        raise ValueError(f"hour must be an integer in 0..23, got {hour!r}")
    return [t for t in trips if t.start_time.hour == hour]


def clean_trips_csv(trips: Iterable[TripRecord]) -> str:
    """Cleaned trips in the canonical layout consumed by `bikeflow dynamics`."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CLEAN_COLUMNS)
    for t in trips:
        writer.writerow(
            [
                t.rental_id,
                t.duration,
                t.bike_id,
                t.start_time.strftime(CLEAN_TIMESTAMP_FORMAT),
                t.end_time.strftime(CLEAN_TIMESTAMP_FORMAT),
                t.start_station_id,
                t.end_station_id,
                t.start_station_name,
                t.end_station_name,
            ]
        )
    return buf.getvalue()


def read_clean_trips_csv(path: str | Path) -> list[TripRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(CLEAN_COLUMNS) - set(reader.fieldnames):
            raise SchemaError(f"{path}: expected cleaned-trip header {CLEAN_COLUMNS}")
        out = []
        for row in reader:
            out.append(
                TripRecord(
                    rental_id=int(row["rental_id"]),
                    duration=int(row["duration"]),
                    bike_id=int(row["bike_id"]),
                    start_time=datetime.strptime(row["start_time"], CLEAN_TIMESTAMP_FORMAT),
                    end_time=datetime.strptime(row["end_time"], CLEAN_TIMESTAMP_FORMAT),
                    start_station_id=int(row["start_station_id"]),
                    end_station_id=int(row["end_station_id"]),
                    start_station_name=row.get("start_station_name", ""),
                    end_station_name=row.get("end_station_name", ""),
                )
            )
    return out
