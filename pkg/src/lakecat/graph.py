"""Embedded typed property-graph store with append-only event-log persistence.

Every metadata class is a node label and every association is an edge label
drawn from a closed registry. Mutations are recorded as events in a
newline-delimited JSON log; replaying the log from an empty store reproduces
the exact same state, which makes persistence trivially auditable and
testable. An optional snapshot file shortcuts replay.
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Iterable, Optional

logger = logging.getLogger(__name__)

Scalar = bool | int | float | str

NODE_LABELS = frozenset(
    {
        "DatasetSource",
        "Ingest",
        "DatalakeDataset",
        "EntityClass",
        "NumericAttribute",
        "NominalAttribute",
        "Tag",
        "VeracityIndex",
        "SensitivityMark",
        "SensitivityLevel",
        "RelationshipDS",
        "RelationshipAtt",
        "AnalysisDSRelationship",
        "AnalysisAttribute",
        "GlobalDictEntry",
        "User",
    }
)

ATTRIBUTE_LABELS = frozenset({"NumericAttribute", "NominalAttribute"})

# Closed association registry: edge label -> (allowed from-labels, allowed to-labels).
EDGE_REGISTRY: dict[str, tuple[frozenset[str], frozenset[str]]] = {
    "DatasetSource-Ingest": (frozenset({"DatasetSource"}), frozenset({"Ingest"})),
    "Ingest-DatalakeDataset": (frozenset({"Ingest"}), frozenset({"DatalakeDataset"})),
    "Ingest-User": (frozenset({"Ingest"}), frozenset({"User"})),
    "DatasetSource-SourceOfStream": (frozenset({"DatasetSource"}), frozenset({"DatasetSource"})),
    "DatalakeDataset-Tag": (frozenset({"DatalakeDataset"}), frozenset({"Tag"})),
    "DatalakeDataset-EntityClass": (frozenset({"DatalakeDataset"}), frozenset({"EntityClass"})),
    "DatalakeDataset-VeracityIndex": (frozenset({"DatalakeDataset"}), frozenset({"VeracityIndex"})),
    "EntityClass-Attribute": (frozenset({"EntityClass"}), ATTRIBUTE_LABELS),
    "AnalysisAttribute-Attribute": (frozenset({"AnalysisAttribute"}), ATTRIBUTE_LABELS),
    "AnalysisAttribute-RelationshipAtt": (frozenset({"AnalysisAttribute"}), frozenset({"RelationshipAtt"})),
    "AnalysisDSRelationship-DatalakeDataset": (frozenset({"AnalysisDSRelationship"}), frozenset({"DatalakeDataset"})),
    "AnalysisDSRelationship-RelationshipDS": (frozenset({"AnalysisDSRelationship"}), frozenset({"RelationshipDS"})),
    "SensitivityMark-Target": (
        frozenset({"SensitivityMark"}),
        frozenset({"DatalakeDataset", "EntityClass"}) | ATTRIBUTE_LABELS,
    ),
    "SensitivityMark-SensitivityLevel": (frozenset({"SensitivityMark"}), frozenset({"SensitivityLevel"})),
    "SensitivityMark-User": (frozenset({"SensitivityMark"}), frozenset({"User"})),
}

EVENT_LOG_NAME = "events.log"
SNAPSHOT_NAME = "snapshot.json"


class GraphError(Exception):
    """Base error for store operations."""


class UnknownLabelError(GraphError):
    """Label is not in the node or edge registry."""


class MissingNodeError(GraphError):
    """Referenced node id does not exist."""


class EndpointMismatchError(GraphError):
    """Edge endpoints do not satisfy the registry signature."""


class InvalidPropertyError(GraphError):
    """Property value is not a supported scalar."""


class EventLogCorruptionError(GraphError):
    """A non-trailing event-log line failed to parse or is out of sequence."""

    def __init__(self, seq: int, reason: str):
        self.seq = seq
        super().__init__(f"event log corrupt at seq {seq}: {reason}")


def canonical_json(obj: Any) -> str:
    """Canonical encoding used for the event log, snapshots and hashes."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def _check_props(props: dict[str, Scalar]) -> None:
    for key, value in props.items():
        if not isinstance(key, str) or not key:
            raise InvalidPropertyError(f"property name must be nonempty text, got {key!r}")
        if not isinstance(value, (bool, int, float, str)):
            raise InvalidPropertyError(f"property {key!r} has non-scalar value {type(value).__name__}")


@dataclass
class Node:
    id: str
    label: str
    props: dict[str, Scalar] = field(default_factory=dict)

    def to_record(self) -> dict[str, Any]:
        return {"id": self.id, "label": self.label, "props": self.props}


@dataclass
class Edge:
    id: str
    label: str
    src: str
    dst: str

    def to_record(self) -> dict[str, Any]:
        return {"id": self.id, "label": self.label, "from": self.src, "to": self.dst}


class Store:
    """Single-writer, shared-reader graph store over a directory.

    Layout: ``<path>/events.log`` (append-only NDJSON) and an optional
    ``<path>/snapshot.json``. Mutations serialize through one lock; the
    :meth:`exclusive` context manager lets callers make compound
    check-and-create sequences atomic (tag dedup, idempotent linking).
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.mkdir(parents=True, exist_ok=True)
        self._lock = threading.RLock()
        self._nodes: dict[str, Node] = {}
        self._edges: dict[str, Edge] = {}
        self._out: dict[str, list[str]] = {}
        self._in: dict[str, list[str]] = {}
        self._by_label: dict[str, list[str]] = {}
        self._seq = 0
        self._node_seq = 0
        self._edge_seq = 0
        self._log_file = None
        self._replay()
        self._log_file = open(self.path / EVENT_LOG_NAME, "a", encoding="utf-8")

    @classmethod
    def open(cls, path: str | Path) -> "Store":
        return cls(path)

    def close(self) -> None:
        with self._lock:
            if self._log_file is not None:
                self._log_file.close()
                self._log_file = None

    def exclusive(self):
        """Hold the writer lock across a compound read-then-write sequence."""
        return self._lock

    # ------------------------------------------------------------------ ids

    def _next_node_id(self) -> str:
        self._node_seq += 1
        return f"n{self._node_seq:010d}"

    def _next_edge_id(self) -> str:
        self._edge_seq += 1
        return f"e{self._edge_seq:010d}"

    @staticmethod
    def _restore_counter(ident: str) -> int:
        return int(ident[1:])

    # ------------------------------------------------------------- mutations

    def put_node(self, label: str, props: dict[str, Scalar] | None = None) -> str:
        props = dict(props or {})
        if label not in NODE_LABELS:
            raise UnknownLabelError(f"unknown node label {label!r}")
        _check_props(props)
        with self._lock:
            node_id = self._next_node_id()
            self._append_event("create-node", {"id": node_id, "label": label, "props": props})
            self._apply_create_node(node_id, label, props)
            return node_id

    def put_edge(self, edge_label: str, src: str, dst: str) -> str:
        if edge_label not in EDGE_REGISTRY:
            raise UnknownLabelError(f"unknown edge label {edge_label!r}")
        with self._lock:
            for endpoint in (src, dst):
                if endpoint not in self._nodes:
                    raise MissingNodeError(f"edge endpoint {endpoint!r} does not exist")
            from_labels, to_labels = EDGE_REGISTRY[edge_label]
            src_label = self._nodes[src].label
            dst_label = self._nodes[dst].label
            if src_label not in from_labels or dst_label not in to_labels:
                raise EndpointMismatchError(
                    f"edge {edge_label!r} cannot link {src_label} -> {dst_label}"
                )
            edge_id = self._next_edge_id()
            self._append_event("create-edge", {"id": edge_id, "label": edge_label, "from": src, "to": dst})
            self._apply_create_edge(edge_id, edge_label, src, dst)
            return edge_id

    def set_props(self, node_id: str, props: dict[str, Scalar]) -> None:
        props = dict(props)
        _check_props(props)
        with self._lock:
            if node_id not in self._nodes:
                raise MissingNodeError(f"node {node_id!r} does not exist")
            self._append_event("set-props", {"id": node_id, "props": props})
            self._apply_set_props(node_id, props)

    # ----------------------------------------------------------------- reads

    def node(self, node_id: str) -> Node:
        with self._lock:
            try:
                return self._nodes[node_id]
            except KeyError:
                raise MissingNodeError(f"node {node_id!r} does not exist") from None

    def has_node(self, node_id: str) -> bool:
        with self._lock:
            return node_id in self._nodes

    def find(self, label: str, predicate: Optional[Callable[[Node], bool]] = None) -> list[Node]:
        """All nodes with the label passing the predicate, ordered by id."""
        if label not in NODE_LABELS:
            raise UnknownLabelError(f"unknown node label {label!r}")
        with self._lock:
            nodes = [self._nodes[i] for i in sorted(self._by_label.get(label, []))]
            if predicate is not None:
                nodes = [n for n in nodes if predicate(n)]
            return nodes

    def neighbors(self, node_id: str, edge_label: str, direction: str = "out") -> list[Node]:
        """Adjacent nodes along edges with the label, ordered by node id."""
        if edge_label not in EDGE_REGISTRY:
            raise UnknownLabelError(f"unknown edge label {edge_label!r}")
        if direction not in ("out", "in"):
            raise ValueError(f"direction must be 'out' or 'in', got {direction!r}")
        with self._lock:
            if node_id not in self._nodes:
                raise MissingNodeError(f"node {node_id!r} does not exist")
            index = self._out if direction == "out" else self._in
            found = []
            for edge_id in index.get(node_id, []):
                edge = self._edges[edge_id]
                if edge.label != edge_label:
                    continue
                found.append(edge.dst if direction == "out" else edge.src)
            return [self._nodes[i] for i in sorted(set(found))]

    def edges_between(self, src: str, dst: str, edge_label: str) -> list[Edge]:
        with self._lock:
            return [
                self._edges[e]
                for e in self._out.get(src, [])
                if self._edges[e].label == edge_label and self._edges[e].dst == dst
            ]

    def all_edges(self) -> list[Edge]:
        with self._lock:
            return [self._edges[i] for i in sorted(self._edges)]

    def stats(self) -> dict[str, dict[str, int]]:
        """Exact node and edge counts per label."""
        with self._lock:
            nodes = {label: 0 for label in sorted(NODE_LABELS)}
            for node in self._nodes.values():
                nodes[node.label] += 1
            edges = {label: 0 for label in sorted(EDGE_REGISTRY)}
            for edge in self._edges.values():
                edges[edge.label] += 1
            return {"nodes": nodes, "edges": edges}

    # ----------------------------------------------------------- persistence

    def snapshot(self, path: str | Path | None = None) -> Path:
        """Write a full canonical dump; returns the file written."""
        target = Path(path) if path is not None else self.path / SNAPSHOT_NAME
        with self._lock:
            payload = self.serialize()
            target.write_text(payload, encoding="utf-8")
        return target

    def serialize(self) -> str:
        """Canonical serialization of the full store state."""
        with self._lock:
            record = {
                "kind": "snapshot",
                "seq": self._seq,
                "nodes": [self._nodes[i].to_record() for i in sorted(self._nodes)],
                "edges": [self._edges[i].to_record() for i in sorted(self._edges)],
            }
            return canonical_json(record) + "\n"

    def _append_event(self, kind: str, payload: dict[str, Any]) -> None:
        self._seq += 1
        event = {"seq": self._seq, "at": utc_now_iso(), "kind": kind, "payload": payload}
        line = canonical_json(event)
        if self._log_file is None:
            raise GraphError("store is closed")
        self._log_file.write(line + "\n")
        self._log_file.flush()

    def _apply_create_node(self, node_id: str, label: str, props: dict[str, Scalar]) -> None:
        self._nodes[node_id] = Node(node_id, label, props)
        self._by_label.setdefault(label, []).append(node_id)
        self._node_seq = max(self._node_seq, self._restore_counter(node_id))

    def _apply_create_edge(self, edge_id: str, label: str, src: str, dst: str) -> None:
        self._edges[edge_id] = Edge(edge_id, label, src, dst)
        self._out.setdefault(src, []).append(edge_id)
        self._in.setdefault(dst, []).append(edge_id)
        self._edge_seq = max(self._edge_seq, self._restore_counter(edge_id))

    def _apply_set_props(self, node_id: str, props: dict[str, Scalar]) -> None:
        self._nodes[node_id].props.update(props)

    def _apply_event(self, kind: str, payload: dict[str, Any]) -> None:
        if kind == "create-node":
            self._apply_create_node(payload["id"], payload["label"], payload["props"])
        elif kind == "create-edge":
            self._apply_create_edge(payload["id"], payload["label"], payload["from"], payload["to"])
        elif kind == "set-props":
            self._apply_set_props(payload["id"], payload["props"])
        else:
            raise EventLogCorruptionError(self._seq + 1, f"unknown event kind {kind!r}")

    def _load_snapshot(self) -> None:
        snap_path = self.path / SNAPSHOT_NAME
        if not snap_path.exists():
            return
        record = json.loads(snap_path.read_text(encoding="utf-8"))
        for node in record["nodes"]:
            self._apply_create_node(node["id"], node["label"], node["props"])
        for edge in record["edges"]:
            self._apply_create_edge(edge["id"], edge["label"], edge["from"], edge["to"])
        self._seq = record["seq"]

    def _replay(self) -> None:
        self._load_snapshot()
        log_path = self.path / EVENT_LOG_NAME
        if not log_path.exists():
            log_path.touch()
            return
        raw = log_path.read_bytes()
        lines = raw.split(b"\n")
        trailing = lines.pop() if lines else b""
        keep_bytes = 0
        # Snapshots never truncate the log, so line i (1-based) carries seq i.
        for idx, line in enumerate(lines):
            expected = idx + 1
            try:
                event = json.loads(line.decode("utf-8"))
                seq, kind, payload = event["seq"], event["kind"], event["payload"]
            except (ValueError, KeyError, UnicodeDecodeError) as exc:
                raise EventLogCorruptionError(expected, str(exc)) from None
            if seq != expected:
                raise EventLogCorruptionError(expected, f"found seq {seq}")
            keep_bytes += len(line) + 1
            if seq <= self._seq:
                # Event predates the snapshot; already folded into state.
                continue
            try:
                self._apply_event(kind, payload)
            except KeyError as exc:
                raise EventLogCorruptionError(expected, f"malformed payload: {exc}") from None
            self._seq = seq
        if trailing:
            # Torn final write: drop it and truncate the file to the last
            # complete record.
            logger.warning(
                "truncating partial trailing event-log line (%d bytes) in %s",
                len(trailing),
                log_path,
            )
            with open(log_path, "r+b") as handle:
                handle.truncate(keep_bytes)
