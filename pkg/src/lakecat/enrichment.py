"""Semantic annotation, sensitivity marking, veracity scoring and manual
dataset relationships.

Tag names are case-folded and deduplicated globally; sensitivity is an
integer level attached to datasets, entities or attributes (0 = everyone may
access); the veracity index is a weighted composite of documented proxy
measures.
"""

from __future__ import annotations

from typing import Optional

from .config import DEFAULT_SENSITIVITY_LEVELS, Config
from .graph import Store, utc_now_iso

DS_KIND_DESCRIPTIONS = {
    "similarity": "row-content overlap estimated from MinHash sketches",
    "containment": "fraction of one dataset's rows present in the other",
    "correlation": "strongest linear relation between numeric attributes",
    "logical-cluster": "tag-affinity grouping",
}


class EnrichmentError(Exception):
    pass


class UnknownLevelError(EnrichmentError):
    pass


class InvalidTargetError(EnrichmentError):
    pass


def seed_registries(store: Store, config: Config) -> None:
    """Create sensitivity levels and dataset-relationship kinds once."""
    with store.exclusive():
        existing_levels = {n.props["level"] for n in store.find("SensitivityLevel")}
        for level, label in DEFAULT_SENSITIVITY_LEVELS.items():
            if level not in existing_levels:
                store.put_node("SensitivityLevel", {"level": level, "label": label})
        existing_kinds = {n.props["name"] for n in store.find("RelationshipDS")}
        for kind, threshold in config.ds_thresholds.items():
            if kind not in existing_kinds:
                store.put_node(
                    "RelationshipDS",
                    {
                        "name": kind,
                        "description": DS_KIND_DESCRIPTIONS.get(kind, ""),
                        "threshold": threshold,
                    },
                )


def normalize_tag(tag: str) -> str:
    return tag.strip().casefold()


def annotate_semantics(
    store: Store, dataset_id: str, description: Optional[str] = None, tags: tuple[str, ...] | list[str] = ()
) -> None:
    """Set the description and attach tags, reusing existing Tag nodes.

    Idempotent: re-annotating with the same tags adds no nodes or edges.
    """
    dataset = store.node(dataset_id)
    if dataset.label != "DatalakeDataset":
        raise EnrichmentError(f"{dataset_id} is not a DatalakeDataset")
    if description is not None:
        store.set_props(dataset_id, {"description": description})
    for tag in tags:
        name = normalize_tag(tag)
        if not name:
            continue
        with store.exclusive():
            found = store.find("Tag", lambda n: n.props.get("name") == name)
            tag_id = found[0].id if found else store.put_node("Tag", {"name": name})
            if not store.edges_between(dataset_id, tag_id, "DatalakeDataset-Tag"):
                store.put_edge("DatalakeDataset-Tag", dataset_id, tag_id)


MARKABLE_LABELS = frozenset({"DatalakeDataset", "EntityClass", "NumericAttribute", "NominalAttribute"})


def mark_sensitivity(store: Store, target_id: str, level: int, user_id: str) -> str:
    """Attach (or supersede) the sensitivity mark on a dataset, entity or
    attribute; the newest mark per target wins."""
    target = store.node(target_id)
    if target.label not in MARKABLE_LABELS:
        raise InvalidTargetError(f"cannot mark a {target.label} node")
    levels = store.find("SensitivityLevel", lambda n: n.props.get("level") == level)
    if not levels:
        raise UnknownLevelError(f"sensitivity level {level} does not exist")
    with store.exclusive():
        mark_id = store.put_node("SensitivityMark", {"at": utc_now_iso()})
        store.put_edge("SensitivityMark-Target", mark_id, target_id)
        store.put_edge("SensitivityMark-SensitivityLevel", mark_id, levels[0].id)
        store.put_edge("SensitivityMark-User", mark_id, user_id)
    return mark_id


def own_mark_level(store: Store, target_id: str) -> int:
    """Level of the newest mark directly on the node; 0 when unmarked."""
    marks = store.neighbors(target_id, "SensitivityMark-Target", "in")
    if not marks:
        return 0
    latest = max(marks, key=lambda n: n.id)
    levels = store.neighbors(latest.id, "SensitivityMark-SensitivityLevel", "out")
    return int(levels[0].props["level"]) if levels else 0


def effective_level(store: Store, node_id: str) -> int:
    """max(own mark, enclosing entity's mark, enclosing dataset's mark)."""
    node = store.node(node_id)
    level = own_mark_level(store, node_id)
    if node.label in ("NumericAttribute", "NominalAttribute"):
        for entity in store.neighbors(node_id, "EntityClass-Attribute", "in"):
            level = max(level, effective_level(store, entity.id))
    elif node.label == "EntityClass":
        for dataset in store.neighbors(node_id, "DatalakeDataset-EntityClass", "in"):
            level = max(level, own_mark_level(store, dataset.id))
    return level


def _dataset_attributes(store: Store, dataset_id: str) -> list:
    attributes = []
    for entity in store.neighbors(dataset_id, "DatalakeDataset-EntityClass", "out"):
        attributes.extend(store.neighbors(entity.id, "EntityClass-Attribute", "out"))
    return attributes


def _dataset_source(store: Store, dataset_id: str):
    for ingest in store.neighbors(dataset_id, "Ingest-DatalakeDataset", "in"):
        for source in store.neighbors(ingest.id, "DatasetSource-Ingest", "in"):
            return source
    return None


def compute_veracity(store: Store, config: Config, dataset_id: str) -> str:
    """Veracity composite from documented proxies.

    objectivity = fraction of attributes classified numeric;
    truthfulness = 1 - overall null ratio;
    credibility = configured per-source score.
    Recomputation appends a fresh node; the newest one is authoritative.
    """
    dataset = store.node(dataset_id)
    if dataset.label != "DatalakeDataset":
        raise EnrichmentError(f"{dataset_id} is not a DatalakeDataset")
    attributes = _dataset_attributes(store, dataset_id)
    if dataset.props.get("type") != "unstructured" and not attributes:
        raise EnrichmentError(f"dataset {dataset_id} is not profiled yet")
    numeric = sum(1 for a in attributes if a.label == "NumericAttribute")
    objectivity = numeric / len(attributes) if attributes else 0.0
    total_cells = sum(int(a.props["count"]) for a in attributes)
    total_nulls = sum(int(a.props["nullCount"]) for a in attributes)
    truthfulness = 1.0 - (total_nulls / total_cells) if total_cells else 1.0
    source = _dataset_source(store, dataset_id)
    credibility = config.source_credibility(source.props["name"]) if source else config.default_credibility
    w_obj, w_truth, w_cred = config.veracity_weights
    composite = w_obj * objectivity + w_truth * truthfulness + w_cred * credibility
    node_id = store.put_node(
        "VeracityIndex",
        {
            "objectivity": objectivity,
            "truthfulness": truthfulness,
            "credibility": credibility,
            "composite": composite,
            "weightObjectivity": w_obj,
            "weightTruthfulness": w_truth,
            "weightCredibility": w_cred,
        },
    )
    store.put_edge("DatalakeDataset-VeracityIndex", dataset_id, node_id)
    return node_id


def latest_veracity(store: Store, dataset_id: str):
    nodes = store.neighbors(dataset_id, "DatalakeDataset-VeracityIndex", "out")
    return max(nodes, key=lambda n: n.id) if nodes else None


def input_relationship(
    store: Store,
    ds_a: str,
    ds_b: str,
    kind_name: str,
    value: float,
    name: Optional[str] = None,
    description: Optional[str] = None,
) -> str:
    """Persist a user-declared relationship between two datasets.

    Manual input overrides thresholds; unknown kinds are created as
    user-defined RelationshipDS nodes.
    """
    if ds_a == ds_b:
        raise EnrichmentError("cannot relate a dataset to itself")
    for ds in (ds_a, ds_b):
        node = store.node(ds)
        if node.label != "DatalakeDataset":
            raise EnrichmentError(f"{ds} is not a DatalakeDataset")
    with store.exclusive():
        kinds = store.find("RelationshipDS", lambda n: n.props.get("name") == kind_name)
        if kinds:
            kind_id = kinds[0].id
        else:
            kind_id = store.put_node(
                "RelationshipDS",
                {"name": kind_name, "description": description or "user-defined", "threshold": 0.0},
            )
        props: dict = {"value": float(value)}
        if name is not None:
            props["name"] = name
        if description is not None:
            props["description"] = description
        rel_id = store.put_node("AnalysisDSRelationship", props)
        store.put_edge("AnalysisDSRelationship-DatalakeDataset", rel_id, ds_a)
        store.put_edge("AnalysisDSRelationship-DatalakeDataset", rel_id, ds_b)
        store.put_edge("AnalysisDSRelationship-RelationshipDS", rel_id, kind_id)
    return rel_id
