"""Operator command line: drives the same library code as the HTTP service,
directly against the embedded store (no server required).

Exit codes: 0 success, 1 user error (bad arguments, unknown ids,
unreachable sources), 2 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from . import catalog, enrichment, ingestion
from .config import Config, ConfigError
from .graph import GraphError, MissingNodeError
from .lake import Lake

MODE_NAMES = {"batch": "batch", "realtime": "real-time", "onetime": "one-time"}

USER_ERRORS = (
    catalog.NotFoundError,
    MissingNodeError,
    ingestion.IngestionError,
    enrichment.EnrichmentError,
    ConfigError,
    GraphError,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lakecat", description="Data lake ingestion gateway and metadata catalog")
    parser.add_argument("--config", help="path to the JSON config file")
    parser.add_argument("--format", choices=["text", "json"], default="text", help="output format")
    sub = parser.add_subparsers(dest="command", required=True)

    source = sub.add_parser("source", help="manage data sources")
    source_sub = source.add_subparsers(dest="source_command", required=True)
    add = source_sub.add_parser("add", help="register a data source if reachable")
    add.add_argument("location")
    add.add_argument("--type", required=True, dest="source_type")
    add.add_argument("--name", required=True)
    add.add_argument("--owner", required=True)
    add.add_argument("--administrator")
    add.add_argument("--stream-origin", dest="stream_origin")

    ingest = sub.add_parser("ingest", help="ingest a registered source")
    ingest.add_argument("source_id")
    ingest.add_argument("--mode", choices=sorted(MODE_NAMES), default="batch")
    ingest.add_argument("--duration", type=float, help="window seconds (real-time only)")
    ingest.add_argument("--windows", type=int, default=1, help="window count (real-time only)")
    ingest.add_argument("--comment", default="")
    ingest.add_argument("--user", default="admin")

    search = sub.add_parser("search", help="keyword search over the catalog")
    search.add_argument("keyword", nargs="?", default="")
    search.add_argument("--user", default="admin")

    show = sub.add_parser("show", help="inspect one dataset")
    show.add_argument("dataset_id")
    view = show.add_mutually_exclusive_group()
    view.add_argument("--lineage", action="store_true")
    view.add_argument("--schema", action="store_true")
    view.add_argument("--relationships", action="store_true")
    show.add_argument("--user", default="admin")

    relate = sub.add_parser("relate", help="declare a relationship between two datasets")
    relate.add_argument("dataset1")
    relate.add_argument("dataset2")
    relate.add_argument("--kind", required=True)
    relate.add_argument("--value", type=float, required=True)
    relate.add_argument("--name")
    relate.add_argument("--description")

    link = sub.add_parser("link", help="detect relationships for a dataset automatically")
    link.add_argument("dataset_id")

    sub.add_parser("stats", help="node and edge counts per label")

    serve = sub.add_parser("serve", help="run the HTTP catalog service")
    serve.add_argument("--port", type=int)
    serve.add_argument("--host", default="127.0.0.1")

    return parser


def _emit(args, payload, text_lines) -> None:
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for line in text_lines:
            print(line)


def _summary_line(entry: dict) -> str:
    tags = ",".join(entry["tags"])
    return f"{entry['id']}  {entry['name']}  v{entry['version']}  [{entry['type']}]  tags={tags}"


def _run(args, lake: Lake) -> int:
    if args.command == "source":
        source_id = lake.connect_source(
            location=args.location,
            source_type=args.source_type,
            name=args.name,
            owner=args.owner,
            administrator=args.administrator,
            stream_origin=args.stream_origin,
        )
        if source_id is None:
            print(f"error: source at {args.location!r} is unreachable", file=sys.stderr)
            return 1
        _emit(args, {"id": source_id}, [source_id])
        return 0

    if args.command == "ingest":
        mode = MODE_NAMES[args.mode]
        if mode == "real-time":
            if args.duration is None:
                print("error: --duration is required for real-time mode", file=sys.stderr)
                return 1
            runs = lake.run_realtime(args.source_id, args.duration, args.windows, user=args.user)
        else:
            runs = [lake.ingest(args.source_id, args.comment, mode, args.user, args.duration)]
        payload = [{"ingest_id": i, "dataset_id": d} for i, d in runs]
        lines = [f"ingest {i} -> {d if d else '(no dataset)'}" for i, d in runs]
        _emit(args, payload, lines)
        return 0 if all(d is not None for _, d in runs) else 1

    if args.command == "search":
        results = lake.search(args.keyword, user=args.user)
        _emit(args, results, [_summary_line(r) for r in results] or ["(no matches)"])
        return 0

    if args.command == "show":
        if args.lineage:
            view = lake.lineage(args.dataset_id, user=args.user)
            lines = [json.dumps(view, indent=2, sort_keys=True)]
        elif args.relationships:
            view = lake.relationships(args.dataset_id, user=args.user)
            lines = [
                f"{e['kind']}={e['value']:.4f}  {e['dataset_name']} ({e['dataset_id']})" for e in view
            ] or ["(no relationships)"]
        elif args.schema:
            detail = lake.dataset_detail(args.dataset_id, user=args.user)
            view = detail["entities"]
            lines = []
            for entity in view:
                lines.append(f"entity {entity['name']}  rows={entity.get('row_count')}")
                for att in entity["attributes"]:
                    marker = " [redacted]" if att["redacted"] else ""
                    lines.append(f"  {att['name']} ({att['kind']}){marker}")
        else:
            view = lake.dataset_detail(args.dataset_id, user=args.user)
            lines = [
                f"name: {view['name']}",
                f"type: {view['type']}",
                f"version: {view['version']}",
                f"description: {view['description']}",
                f"tags: {','.join(view['tags'])}",
                f"sensitivity: {view['sensitivity_level']}",
                f"entities: {len(view['entities'])}",
                f"veracity: {view['veracity']['composite'] if view['veracity'] else 'n/a'}",
            ]
        _emit(args, view, lines)
        return 0

    if args.command == "relate":
        rel_id = lake.input_relationship(
            args.dataset1, args.dataset2, args.kind, args.value, args.name, args.description
        )
        _emit(args, {"id": rel_id}, [rel_id])
        return 0

    if args.command == "link":
        created = lake.calculate_relationships(args.dataset_id)
        _emit(args, {"created": created}, [f"created {len(created)} relationship nodes"])
        return 0

    if args.command == "stats":
        stats = lake.stats()
        lines = [f"{label}={count}" for label, count in stats["nodes"].items() if count]
        lines += [f"edge {label}={count}" for label, count in stats["edges"].items() if count]
        _emit(args, stats, lines or ["(empty store)"])
        return 0

    if args.command == "serve":
        import uvicorn

        from .service import create_app

        port = args.port if args.port is not None else lake.config.port
        uvicorn.run(create_app(lake), host=args.host, port=port)
        return 0

    raise AssertionError(f"unhandled command {args.command}")


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        config = Config.load(args.config)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    lake = Lake(config)
    try:
        return _run(args, lake)
    except USER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"internal error: {exc}", file=sys.stderr)
        return 2
    finally:
        lake.close()


if __name__ == "__main__":
    sys.exit(main())
