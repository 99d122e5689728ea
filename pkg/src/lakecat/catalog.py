"""Read-side catalog views: keyword search, dataset detail, lineage and
relationship exploration, all filtered by the caller's clearance.

Hidden datasets are reported as not-found rather than forbidden so their
existence never leaks.
"""

from __future__ import annotations

import json
from typing import Optional

from . import enrichment
from .graph import MissingNodeError, Node, Store

SNIPPET_LENGTH = 160


class NotFoundError(Exception):
    """Unknown id, or a dataset the caller is not cleared to see."""


def _tags_of(store: Store, dataset_id: str) -> list[str]:
    return sorted(t.props["name"] for t in store.neighbors(dataset_id, "DatalakeDataset-Tag", "out"))


def _summary(store: Store, node: Node) -> dict:
    description = str(node.props.get("description", ""))
    return {
        "id": node.id,
        "name": node.props.get("name", ""),
        "type": node.props.get("type", ""),
        "description": description[:SNIPPET_LENGTH],
        "tags": _tags_of(store, node.id),
        "sensitivity_level": enrichment.own_mark_level(store, node.id),
        "version": node.props.get("version", 1),
        "ingested_at": node.props.get("ingestedAt", ""),
    }


def visible_datasets(store: Store, clearance: int) -> list[Node]:
    return [
        node
        for node in store.find("DatalakeDataset")
        if enrichment.own_mark_level(store, node.id) <= clearance
    ]


def search(store: Store, keyword: str, clearance: int) -> list[dict]:
    """Datasets whose name, description or tags contain the keyword
    (case-insensitive substring); empty keyword lists everything accessible.
    Ordered by name then id."""
    needle = keyword.strip().lower()
    results = []
    for node in visible_datasets(store, clearance):
        if needle:
            haystacks = [
                str(node.props.get("name", "")).lower(),
                str(node.props.get("description", "")).lower(),
                *[tag.lower() for tag in _tags_of(store, node.id)],
            ]
            if not any(needle in haystack for haystack in haystacks):
                continue
        results.append(_summary(store, node))
    return sorted(results, key=lambda s: (s["name"], s["id"]))


def _require_visible(store: Store, dataset_id: str, clearance: int) -> Node:
    try:
        node = store.node(dataset_id)
    except MissingNodeError:
        raise NotFoundError(f"dataset {dataset_id!r} not found") from None
    if node.label != "DatalakeDataset":
        raise NotFoundError(f"dataset {dataset_id!r} not found")
    if enrichment.own_mark_level(store, dataset_id) > clearance:
        raise NotFoundError(f"dataset {dataset_id!r} not found")
    return node


def _attribute_view(store: Store, attribute: Node, clearance: int) -> dict:
    redacted = enrichment.effective_level(store, attribute.id) > clearance
    view = {
        "id": attribute.id,
        "name": attribute.props.get("name", ""),
        "kind": "numeric" if attribute.label == "NumericAttribute" else "nominal",
        "redacted": redacted,
    }
    if not redacted:
        stats = {k: v for k, v in attribute.props.items() if k != "name"}
        if "topValues" in stats:
            stats["topValues"] = json.loads(stats["topValues"])
        view["stats"] = stats
    return view


def dataset_detail(store: Store, dataset_id: str, clearance: int) -> dict:
    """Properties, schema (entities with attribute stats) and veracity."""
    node = _require_visible(store, dataset_id, clearance)
    entities = []
    for entity in store.neighbors(dataset_id, "DatalakeDataset-EntityClass", "out"):
        entity_hidden = enrichment.effective_level(store, entity.id) > clearance
        view = {"id": entity.id, "name": entity.props.get("name", ""), "redacted": entity_hidden}
        if not entity_hidden:
            view["row_count"] = entity.props.get("rowCount", 0)
            view["attribute_count"] = entity.props.get("attributeCount", 0)
        view["attributes"] = [
            _attribute_view(store, attribute, clearance)
            for attribute in store.neighbors(entity.id, "EntityClass-Attribute", "out")
        ]
        entities.append(view)
    veracity_node = enrichment.latest_veracity(store, dataset_id)
    veracity = dict(veracity_node.props) if veracity_node else None
    detail = _summary(store, node)
    detail["description"] = node.props.get("description", "")
    detail.update(
        {
            "format": node.props.get("format"),
            "lake_path": node.props.get("lakePath", ""),
            "content_hash": node.props.get("contentHash", ""),
            "size_bytes": node.props.get("sizeBytes", 0),
            "entities": entities,
            "veracity": veracity,
        }
    )
    return detail


def lineage(store: Store, dataset_id: str, clearance: int) -> dict:
    """The provenance chain: dataset <- ingest <- source (+ stream origin)."""
    node = _require_visible(store, dataset_id, clearance)
    ingests = store.neighbors(dataset_id, "Ingest-DatalakeDataset", "in")
    ingest = ingests[0] if ingests else None
    source = None
    origin = None
    users = []
    if ingest is not None:
        sources = store.neighbors(ingest.id, "DatasetSource-Ingest", "in")
        source = sources[0] if sources else None
        users = store.neighbors(ingest.id, "Ingest-User", "out")
        if source is not None:
            origins = store.neighbors(source.id, "DatasetSource-SourceOfStream", "out")
            origin = origins[0] if origins else None
    return {
        "dataset": {
            "id": node.id,
            "name": node.props.get("name", ""),
            "version": node.props.get("version", 1),
        },
        "ingest": None
        if ingest is None
        else {
            "id": ingest.id,
            "mode": ingest.props.get("mode", ""),
            "ingestion_start_time": ingest.props.get("ingestionStartTime", ""),
            "ingestion_end_time": ingest.props.get("ingestionEndTime", ""),
            "defined_duration": ingest.props.get("definedDuration"),
            "output_log": ingest.props.get("outputLog", ""),
            "error_log": ingest.props.get("errorLog", ""),
            "comment": ingest.props.get("comment", ""),
            "source_code_url": ingest.props.get("sourceCodeURL", ""),
            "tool_version": ingest.props.get("toolVersion", ""),
            "config_hash": ingest.props.get("configHash", ""),
            "user": users[0].props.get("name") if users else None,
        },
        "source": None
        if source is None
        else {
            "id": source.id,
            "name": source.props.get("name", ""),
            "type": source.props.get("type", ""),
            "location": source.props.get("location", ""),
            "owner": source.props.get("owner", ""),
            "administrator": source.props.get("administrator"),
        },
        "stream_origin": None
        if origin is None
        else {"id": origin.id, "name": origin.props.get("name", ""), "location": origin.props.get("location", "")},
    }


def relationships(store: Store, dataset_id: str, clearance: int) -> list[dict]:
    """Related datasets with relationship kind and value, newest first by
    relationship id; counterparts above the caller's clearance are omitted."""
    _require_visible(store, dataset_id, clearance)
    entries = []
    for rel in store.neighbors(dataset_id, "AnalysisDSRelationship-DatalakeDataset", "in"):
        endpoints = store.neighbors(rel.id, "AnalysisDSRelationship-DatalakeDataset", "out")
        others = [n for n in endpoints if n.id != dataset_id]
        if not others:
            continue
        other = others[0]
        if enrichment.own_mark_level(store, other.id) > clearance:
            continue
        kinds = store.neighbors(rel.id, "AnalysisDSRelationship-RelationshipDS", "out")
        entries.append(
            {
                "id": rel.id,
                "dataset_id": other.id,
                "dataset_name": other.props.get("name", ""),
                "kind": kinds[0].props.get("name", "") if kinds else "",
                "value": rel.props.get("value"),
                "name": rel.props.get("name"),
                "description": rel.props.get("description"),
            }
        )
    return sorted(entries, key=lambda e: e["id"])
