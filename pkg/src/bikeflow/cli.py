"""Command-line front end: ingest -> detect/compare -> report, plus dynamics.

Exit codes: 0 success, 1 runtime failure, 2 usage or input/schema error.
Commands compute everything first and only then write outputs (temp file +
atomic rename), so a failing run leaves no partial files.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__, analytics, dynamics
from .baselines import greedy_modularity, louvain
from .flow import EMPIRICAL, RANDOM_WALK, empirical_flow, flow_csv, random_walk_flow
from .infomap import OptimizerConfig, infomap
from .manifest import RunManifest, StageTimer
from .metrics import compare_partitions
from .network import (
    UnknownStationError,
    build_network,
    edge_list_csv,
    read_edge_list_csv,
    read_stations_csv,
)
from .partition import Partition, partition_csv, read_partition_csv
from .trips import (
    IngestConfig,
    SchemaError,
    clean_trips,
    clean_trips_csv,
    load_ingest_config,
    parse_trips,
    read_clean_trips_csv,
)


class InputError(Exception):
    """Bad user input: missing file, schema mismatch, unknown ids."""


def _require_file(path: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"file not found: {p}")
    return p


def _read_input(reader, *args):
    """Run a file-reading function, converting parse failures to InputError."""
    try:
        return reader(*args)
    except (ValueError, KeyError) as exc:
        raise InputError(str(exc)) from exc


def _flow_state(net, model: str, tau: float):
    if model == EMPIRICAL:
        return empirical_flow(net)
    if model == RANDOM_WALK:
        return random_walk_flow(net, tau=tau)
    raise InputError(f"unknown flow model: {model}")


def _sig12(x: float) -> float:
    return float(format(x, ".12g"))


def cmd_ingest(args) -> int:
    manifest = RunManifest(command="ingest", version=__version__)
    timer = StageTimer(manifest)
    cfg = IngestConfig()
    if args.config:
        cfg = load_ingest_config(_require_file(args.config))
        manifest.add_input(args.config)

    timer.stage("parse")
    all_raw = []
    row_errors = []
    rows_read = 0
    for trips_path in args.trips:
        p = _require_file(trips_path)
        manifest.add_input(p)
        with open(p, "rb") as fh:
            result = parse_trips(fh, schema=cfg.columns, timestamp_format=cfg.timestamp_format)
        all_raw.extend(result.trips)
        rows_read += result.rows_read
        row_errors.extend((str(p), e.line, e.message) for e in result.errors)

    timer.stage("clean")
    records, stats = clean_trips(
        all_raw, repair_station_ids=cfg.repair_station_ids, drop_weekends=cfg.drop_weekends
    )

    timer.stage("build")
    stations_path = _require_file(args.stations)
    manifest.add_input(stations_path)
    stations = _read_input(read_stations_csv, stations_path)
    net = build_network(records, stations)

    timer.stage("write")
    out = Path(args.out)
    active = int((net.out_strength_vector() + net.in_strength_vector() > 0).sum())
    import json

    stats_doc = {
        "rows_read": rows_read,
        "row_errors": len(row_errors),
        "row_error_samples": [
            {"file": f, "line": ln, "message": m} for f, ln, m in row_errors[:50]
        ],
        "cleaning": stats.as_dict(),
        "stations_in_metadata": len(stations),
        "stations_with_trips": active,
        "total_edge_weight": int(net.total_weight),
    }
    manifest.config = {
        "repair_station_ids": sorted(cfg.repair_station_ids),
        "drop_weekends": cfg.drop_weekends,
    }
    manifest.write_output(out / "trips_clean.csv", clean_trips_csv(records))
    manifest.write_output(out / "network.csv", edge_list_csv(net))
    manifest.write_output(
        out / "cleaning_stats.json", json.dumps(stats_doc, indent=2, sort_keys=True) + "\n"
    )
    timer.stop()
    manifest.result = {"retained_trips": stats.retained, "edges": net.n_edges}
    manifest.write(out / "manifest.json")
    print(
        f"ingest: {rows_read} rows read, {stats.retained} trips retained, "
        f"{net.n_edges} edges over {len(stations)} stations -> {out}"
    )
    return 0


def _load_network(args, manifest: RunManifest):
    network_path = _require_file(args.network)
    manifest.add_input(network_path)
    stations = None
    if getattr(args, "stations", None):
        stations_path = _require_file(args.stations)
        manifest.add_input(stations_path)
        stations = _read_input(read_stations_csv, stations_path)
    return _read_input(read_edge_list_csv, network_path, stations)


def _detect_one(net, method: str, args):
    cfg = OptimizerConfig(seed=args.seed, trials=args.trials)
    if method == "infomap":
        flow = _flow_state(net, args.flow_model, args.tau)
        return infomap(flow, net, cfg), flow
    if method == "louvain":
        return louvain(net, seed=args.seed, resolution=args.resolution), None
    if method == "greedy":
        return greedy_modularity(net, resolution=args.resolution), None
    raise InputError(f"unknown method: {method}")


def cmd_detect(args) -> int:
    manifest = RunManifest(command="detect", version=__version__)
    timer = StageTimer(manifest)
    timer.stage("load")
    net = _load_network(args, manifest)
    timer.stage("detect")
    result, flow = _detect_one(net, args.method, args)
    timer.stage("write")
    out = Path(args.out)
    station_ids = [s.id for s in net.stations]
    manifest.write_output(out / "partition.csv", partition_csv(result.partition, station_ids))
    if flow is not None:
        manifest.write_output(out / "flow.csv", flow_csv(flow))
    timer.stop()
    manifest.config = {
        "method": args.method,
        "seed": args.seed,
        "trials": args.trials,
        "flow_model": args.flow_model,
        "tau": args.tau,
        "resolution": args.resolution,
    }
    manifest.result = {
        "objective": _sig12(result.codelength),
        "objective_kind": "codelength_bits" if args.method == "infomap" else "modularity_q",
        "modules": result.partition.n_modules,
        "trial_objectives": [_sig12(x) for x in result.trial_codelengths],
        "sweeps_run": result.sweeps_run,
    }
    manifest.write(out / "manifest.json")
    print(
        f"detect[{args.method}]: {result.partition.n_modules} modules, "
        f"objective {result.codelength:.12g} -> {out}"
    )
    return 0


def cmd_report(args) -> int:
    manifest = RunManifest(command="report", version=__version__)
    timer = StageTimer(manifest)
    timer.stage("load")
    net = _load_network(args, manifest)
    partition_path = _require_file(args.partition)
    manifest.add_input(partition_path)
    part = _read_input(read_partition_csv, partition_path, [s.id for s in net.stations])

    timer.stage("report")
    table = analytics.interaction_table(net, part)
    total = table.total_trips
    if total != net.total_weight:
        raise RuntimeError(
            f"interaction totals do not reconcile: table {total}, network {net.total_weight}"
        )
    graph = analytics.community_graph(net, part)

    timer.stage("write")
    out = Path(args.out)
    manifest.write_output(out / "table.csv", analytics.interaction_table_csv(table))
    manifest.write_output(
        out / "interaction_matrix.csv", analytics.interaction_matrix_csv(table)
    )
    manifest.write_output(out / "communities.geojson", analytics.community_geojson(graph))
    manifest.write_output(out / "community_edges.csv", analytics.community_edges_csv(graph))
    timer.stop()
    manifest.result = {
        "modules": table.n_modules,
        "self_containment": _sig12(analytics.self_containment(table)),
        "unassigned_stations": table.residual_stations,
        **table.metadata,
    }
    manifest.write(out / "manifest.json")
    print(
        f"report: {table.n_modules} modules, self-containment "
        f"{analytics.self_containment(table):.4f} -> {out}"
    )
    return 0


def cmd_dynamics(args) -> int:
    manifest = RunManifest(command="dynamics", version=__version__)
    timer = StageTimer(manifest)
    timer.stage("load")
    trips_path = _require_file(args.trips)
    manifest.add_input(trips_path)
    trips = _read_input(read_clean_trips_csv, trips_path)
    stations_path = _require_file(args.stations)
    manifest.add_input(stations_path)
    stations = _read_input(read_stations_csv, stations_path)

    timer.stage("detect")
    cfg = OptimizerConfig(seed=args.seed, trials=args.trials)
    ha = dynamics.hourly_communities(
        trips,
        stations,
        cfg,
        min_flow=args.min_flow,
        flow_model=args.flow_model,
        tau=args.tau,
    )

    timer.stage("write")
    out = Path(args.out)
    manifest.write_output(out / "assignments.csv", dynamics.assignments_csv(ha))
    manifest.write_output(out / "hourly_summary.csv", dynamics.hourly_summary_csv(ha))
    timer.stop()
    manifest.config = {
        "seed": args.seed,
        "trials": args.trials,
        "min_flow": args.min_flow,
        "flow_model": args.flow_model,
        "tau": args.tau,
    }
    manifest.result = {"trips": sum(ha.trips), "max_modules": max(ha.modules)}
    manifest.write(out / "manifest.json")
    print(f"dynamics: {sum(ha.trips)} trips over 24 hour columns -> {out}")
    return 0


def cmd_compare(args) -> int:
    manifest = RunManifest(command="compare", version=__version__)
    timer = StageTimer(manifest)
    timer.stage("load")
    net = _load_network(args, manifest)
    station_ids = [s.id for s in net.stations]

    timer.stage("detect")
    results = {}
    flows = {}
    for method in ("infomap", "louvain", "greedy"):
        results[method], flows[method] = _detect_one(net, method, args)

    if args.reference:
        ref_path = _require_file(args.reference)
        manifest.add_input(ref_path)
        reference = _read_input(read_partition_csv, ref_path, station_ids)
        ref_name = str(ref_path)
    else:
        reference = results["infomap"].partition
        ref_name = "infomap"

    timer.stage("write")
    import csv as _csv
    import io as _io

    buf = _io.StringIO()
    writer = _csv.writer(buf, lineterminator="\n")
    writer.writerow(["method", "modules", "objective", "nmi_vs_reference", "ari_vs_reference"])
    for method, result in results.items():
        sim = compare_partitions(result.partition, reference)
        writer.writerow(
            [
                method,
                result.partition.n_modules,
                format(result.codelength, ".12g"),
                format(sim.nmi, ".12g"),
                format(sim.ari, ".12g"),
            ]
        )
    out = Path(args.out)
    manifest.write_output(out / "comparison.csv", buf.getvalue())
    for method, result in results.items():
        manifest.write_output(
            out / f"partition_{method}.csv", partition_csv(result.partition, station_ids)
        )
    timer.stop()
    manifest.config = {
        "seed": args.seed,
        "trials": args.trials,
        "flow_model": args.flow_model,
        "tau": args.tau,
        "resolution": args.resolution,
        "reference": ref_name,
    }
    manifest.write(out / "manifest.json")
    print(f"compare: 3 methods vs reference {ref_name} -> {out}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bikeflow",
        description="Flow-based community structure for shared-bicycle trip networks",
    )
    parser.add_argument("--version", action="version", version=f"bikeflow {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse and clean trip CSVs, build the network")
    p.add_argument("--trips", action="append", required=True, help="trip CSV (repeatable)")
    p.add_argument("--stations", required=True, help="station metadata CSV (id,name,lat,lon)")
    p.add_argument("--config", help="ingestion config JSON (repair ids, weekday flag)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_ingest)

    def detection_flags(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--trials", type=int, default=10)
        p.add_argument("--flow-model", choices=[EMPIRICAL, RANDOM_WALK], default=EMPIRICAL,
                       dest="flow_model")
        p.add_argument("--tau", type=float, default=0.15)
        p.add_argument("--resolution", type=float, default=1.0)

    p = sub.add_parser("detect", help="run one community detection method")
    p.add_argument("--network", required=True, help="edge-list CSV from ingest")
    p.add_argument("--stations", help="station metadata CSV (optional)")
    p.add_argument("--method", choices=["infomap", "louvain", "greedy"], default="infomap")
    detection_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("report", help="interaction table and centroid network")
    p.add_argument("--network", required=True)
    p.add_argument("--partition", required=True, help="partition CSV from detect")
    p.add_argument("--stations", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("dynamics", help="hour-of-day community evolution")
    p.add_argument("--trips", required=True, help="cleaned trips CSV from ingest")
    p.add_argument("--stations", required=True)
    p.add_argument("--min-flow", type=int, default=1, dest="min_flow")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--flow-model", choices=[EMPIRICAL, RANDOM_WALK], default=EMPIRICAL,
                   dest="flow_model")
    p.add_argument("--tau", type=float, default=0.15)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_dynamics)

    p = sub.add_parser("compare", help="run all methods and score them against a reference")
    p.add_argument("--network", required=True)
    p.add_argument("--stations", help="station metadata CSV (optional)")
    p.add_argument("--reference", help="reference partition CSV (default: the infomap result)")
    detection_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, SchemaError, UnknownStationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
