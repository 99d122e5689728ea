"""Source connection, raw-zone copy and ingestion provenance.

Supports batch, one-time (batch with re-ingestion disabled) and real-time
ingestion; real-time is micro-batch polling every definedDuration seconds
with content-hash change capture. Failed runs still produce an Ingest node
with a populated errorLog so operators can inspect broken pipelines.
"""

from __future__ import annotations

import hashlib
import json
import re
import time
import urllib.error
import urllib.parse
import urllib.request
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Optional

from . import profiler
from .config import Config
from .graph import Store, utc_now_iso

HTTP_TIMEOUT = 5.0
STREAM_SIM_PREFIX = "stream-sim:"

MODES = ("batch", "real-time", "one-time")


class IngestionError(Exception):
    pass


class InvalidConnectionError(IngestionError):
    """Malformed connection descriptor."""


class PreconditionError(IngestionError):
    """Operation arguments violate the mode contract."""


class SourceUnreachableError(IngestionError):
    pass


@dataclass(frozen=True)
class SourceConnection:
    scheme: str  # local-file | local-directory | http | stream-sim
    location: str

    @property
    def path(self) -> Path:
        return Path(self.location)


def parse_connection(location: str) -> SourceConnection:
    """Derive the connection scheme from the location text."""
    if not location or not location.strip():
        raise InvalidConnectionError("location must be nonempty")
    location = location.strip()
    if location.startswith(("http://", "https://")):
        return SourceConnection("http", location)
    if location.startswith(STREAM_SIM_PREFIX):
        target = location[len(STREAM_SIM_PREFIX):]
        if not target:
            raise InvalidConnectionError("stream-sim location must name a directory")
        return SourceConnection("stream-sim", target)
    if re.match(r"^[a-z][a-z0-9+.-]*://", location):
        raise InvalidConnectionError(f"unsupported scheme in {location!r}")
    path = Path(location)
    if path.is_dir():
        return SourceConnection("local-directory", location)
    return SourceConnection("local-file", location)


def is_reachable(conn: SourceConnection) -> bool:
    if conn.scheme == "http":
        request = urllib.request.Request(conn.location, method="HEAD")
        try:
            with urllib.request.urlopen(request, timeout=HTTP_TIMEOUT) as response:
                return 200 <= response.status < 400
        except (urllib.error.URLError, OSError, ValueError):
            return False
    if conn.scheme in ("local-directory", "stream-sim"):
        return conn.path.is_dir()
    return conn.path.is_file()


def read_source(conn: SourceConnection) -> dict[str, bytes]:
    """Current source content as relative-path -> bytes (sorted keys)."""
    try:
        if conn.scheme == "http":
            with urllib.request.urlopen(conn.location, timeout=HTTP_TIMEOUT) as response:
                name = Path(urllib.parse.urlparse(conn.location).path).name or "data"
                return {name: response.read()}
        if conn.scheme in ("local-directory", "stream-sim"):
            root = conn.path
            if not root.is_dir():
                raise SourceUnreachableError(f"{conn.location} is not a directory")
            files = sorted(p for p in root.rglob("*") if p.is_file())
            if not files and not root.exists():
                raise SourceUnreachableError(f"{conn.location} vanished")
            return {str(p.relative_to(root)): p.read_bytes() for p in files}
        return {conn.path.name: conn.path.read_bytes()}
    except (OSError, urllib.error.URLError) as exc:
        raise SourceUnreachableError(f"cannot read {conn.location}: {exc}") from None


def content_digest(content: dict[str, bytes]) -> str:
    """Canonical sha256 over (relpath, bytes) pairs in sorted order."""
    digest = hashlib.sha256()
    for name in sorted(content):
        digest.update(name.encode("utf-8"))
        digest.update(b"\x00")
        digest.update(content[name])
        digest.update(b"\x00")
    return digest.hexdigest()


def detect_change(conn: SourceConnection, last_content_hash: Optional[str]) -> bool:
    """True iff the source's current digest differs from the last one seen."""
    return content_digest(read_source(conn)) != last_content_hash


def connect_data_source(
    store: Store,
    location: str,
    source_type: str,
    name: str,
    owner: str,
    administrator: Optional[str] = None,
    stream_origin: Optional[str] = None,
) -> Optional[str]:
    """Probe the source; create and return a DatasetSource node when it is
    reachable, otherwise return None and create nothing."""
    if not name:
        raise InvalidConnectionError("source name must be nonempty")
    conn = parse_connection(location)
    if not is_reachable(conn):
        return None
    props = {"name": name, "type": source_type, "location": location, "owner": owner}
    if administrator:
        props["administrator"] = administrator
    with store.exclusive():
        source_id = store.put_node("DatasetSource", props)
        if stream_origin is not None:
            store.put_edge("DatasetSource-SourceOfStream", source_id, stream_origin)
    return source_id


def get_or_create_user(store: Store, config: Config, name: str) -> str:
    with store.exclusive():
        found = store.find("User", lambda n: n.props.get("name") == name)
        if found:
            return found[0].id
        return store.put_node("User", {"name": name, "clearance": config.clearance(name)})


def _slug(text: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", text.lower()).strip("-") or "dataset"


def dataset_versions(store: Store, source_id: str, name: str) -> list:
    """Existing DatalakeDataset nodes for (source, name), version order."""
    datasets = []
    for ingest in store.neighbors(source_id, "DatasetSource-Ingest", "out"):
        for dataset in store.neighbors(ingest.id, "Ingest-DatalakeDataset", "out"):
            if dataset.props.get("name") == name:
                datasets.append(dataset)
    return sorted(datasets, key=lambda n: n.props["version"])


def _create_ingest(
    store: Store,
    config: Config,
    source_id: str,
    user_id: str,
    mode: str,
    start: str,
    comment: str,
    defined_duration: Optional[float],
) -> str:
    props = {
        "mode": mode,
        "ingestionStartTime": start,
        "ingestionEndTime": start,
        "sourceCodeURL": config.source_code_url,
        "toolVersion": _tool_version(),
        "configHash": config.config_hash(),
        "outputLog": "",
        "errorLog": "",
        "comment": comment,
    }
    if defined_duration is not None:
        props["definedDuration"] = float(defined_duration)
    ingest_id = store.put_node("Ingest", props)
    store.put_edge("DatasetSource-Ingest", source_id, ingest_id)
    store.put_edge("Ingest-User", ingest_id, user_id)
    return ingest_id


def _tool_version() -> str:
    from . import __version__

    return __version__


def _write_raw(raw_root: Path, family: str, version: int, content: dict[str, bytes], source_location: str) -> Path:
    version_dir = raw_root / family / f"v{version}"
    if version_dir.exists():
        raise IngestionError(f"raw zone path {version_dir} already exists (immutability)")
    version_dir.mkdir(parents=True)
    if len(content) == 1:
        name = next(iter(content))
        suffix = Path(name).suffix
        data_path = version_dir / f"data{suffix}"
        data_path.write_bytes(content[name])
    else:
        data_path = version_dir / "data"
        for rel, payload in content.items():
            target = data_path / rel
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(payload)
    return data_path


def ingest_dataset(
    store: Store,
    config: Config,
    raw_root: str | Path,
    source_id: str,
    comment: str = "",
    mode: str = "batch",
    user: str = "admin",
    defined_duration: Optional[float] = None,
) -> tuple[str, Optional[str]]:
    """Run one ingestion: copy raw bytes, record provenance, then profile.

    Returns (ingest node id, dataset node id). On a read failure the Ingest
    node still exists with a populated errorLog and the dataset id is None.
    """
    if mode not in MODES:
        raise PreconditionError(f"unknown mode {mode!r}")
    if mode == "real-time" and defined_duration is None:
        raise PreconditionError("definedDuration is required for real-time ingestion")
    if mode != "real-time" and defined_duration is not None:
        raise PreconditionError(f"definedDuration is only valid for real-time, not {mode}")
    source = store.node(source_id)
    if source.label != "DatasetSource":
        raise IngestionError(f"{source_id} is not a DatasetSource")
    name = source.props["name"]
    if mode == "one-time" and dataset_versions(store, source_id, name):
        raise PreconditionError(f"one-time source {name!r} was already ingested")
    return _run_ingestion(store, config, Path(raw_root), source, comment, mode, user, defined_duration)


def _run_ingestion(
    store: Store,
    config: Config,
    raw_root: Path,
    source,
    comment: str,
    mode: str,
    user: str,
    defined_duration: Optional[float],
) -> tuple[str, Optional[str]]:
    conn = parse_connection(source.props["location"])
    user_id = get_or_create_user(store, config, user)
    name = source.props["name"]
    start = utc_now_iso()
    ingest_id = _create_ingest(
        store, config, source.id, user_id, mode, start, comment, defined_duration
    )
    try:
        content = read_source(conn)
    except SourceUnreachableError as exc:
        store.set_props(
            ingest_id, {"errorLog": str(exc), "ingestionEndTime": utc_now_iso()}
        )
        return ingest_id, None

    digest = content_digest(content)
    size = sum(len(payload) for payload in content.values())
    previous = dataset_versions(store, source.id, name)
    version = previous[-1].props["version"] + 1 if previous else 1
    family = f"{source.id}-{_slug(name)}"
    data_path = _write_raw(raw_root, family, version, content, source.props["location"])

    dataset_type = profiler.detect_dataset_type(data_path)
    dataset_id = store.put_node(
        "DatalakeDataset",
        {
            "name": name,
            "description": "",
            "type": dataset_type,
            "lakePath": str(data_path),
            "contentHash": digest,
            "sizeBytes": size,
            "version": version,
            "ingestedAt": start,
        },
    )
    store.put_edge("Ingest-DatalakeDataset", ingest_id, dataset_id)

    manifest = {
        "contentHash": digest,
        "sizeBytes": size,
        "sourceLocation": source.props["location"],
        "ingestId": ingest_id,
    }
    (data_path.parent / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2), encoding="utf-8"
    )

    store.set_props(
        ingest_id,
        {"ingestionEndTime": utc_now_iso(), "outputLog": f"ingested version {version} ({size} bytes)"},
    )
    profiler.profile_dataset(store, config, dataset_id)
    return ingest_id, dataset_id


def run_realtime(
    store: Store,
    config: Config,
    raw_root: str | Path,
    source_id: str,
    defined_duration: float,
    window_count: int,
    user: str = "admin",
    advance: Optional[Callable[[int], None]] = None,
) -> list[tuple[str, Optional[str]]]:
    """Micro-batch loop: per window, poll the source and ingest a new version
    when its content hash changed. Unchanged windows still record an Ingest
    run flagged as a no-op; a vanished source records a failed run and ends
    the loop. ``advance`` is the stream-side hook a simulator uses to emit
    the next window's payload."""
    if defined_duration is None or defined_duration <= 0:
        raise PreconditionError("definedDuration must be > 0")
    if window_count < 1:
        raise PreconditionError("windowCount must be >= 1")
    source = store.node(source_id)
    conn = parse_connection(source.props["location"])
    name = source.props["name"]
    previous = dataset_versions(store, source_id, name)
    last_hash = previous[-1].props["contentHash"] if previous else None
    user_id = get_or_create_user(store, config, user)

    runs: list[tuple[str, Optional[str]]] = []
    for window in range(window_count):
        if advance is not None:
            advance(window)
        start = utc_now_iso()
        try:
            changed = detect_change(conn, last_hash)
        except SourceUnreachableError as exc:
            ingest_id = _create_ingest(
                store, config, source_id, user_id, "real-time", start, "", defined_duration
            )
            store.set_props(ingest_id, {"errorLog": str(exc), "ingestionEndTime": utc_now_iso()})
            runs.append((ingest_id, None))
            break
        if changed:
            ingest_id, dataset_id = _run_ingestion(
                store, config, Path(raw_root), source, "", "real-time", user, defined_duration
            )
            if dataset_id is not None:
                last_hash = store.node(dataset_id).props["contentHash"]
            runs.append((ingest_id, dataset_id))
        else:
            ingest_id = _create_ingest(
                store, config, source_id, user_id, "real-time", start, "", defined_duration
            )
            store.set_props(
                ingest_id,
                {
                    "outputLog": "no change detected; window skipped",
                    "ingestionEndTime": utc_now_iso(),
                },
            )
            runs.append((ingest_id, None))
        if window + 1 < window_count:
            time.sleep(defined_duration)
    return runs
