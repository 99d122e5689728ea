"""Schematic profiling of ingested datasets.

Structured and semi-structured datasets get one EntityClass node per table
plus a typed attribute node per column with population statistics; pairs of
attributes within an entity are analyzed against the predefined
attribute-relationship kinds. Unstructured datasets get a media-type format
detected from magic bytes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import linker, tabular
from .config import Config
from .graph import Store

TOP_K = 5

MAGIC_FORMATS = [
    (b"\xff\xd8\xff", "image/jpeg"),
    (b"\x89PNG\r\n\x1a\n", "image/png"),
    (b"GIF87a", "image/gif"),
    (b"GIF89a", "image/gif"),
    (b"%PDF", "application/pdf"),
    (b"PK\x03\x04", "application/zip"),
]

EXTENSION_FORMATS = {
    ".csv": "text/csv",
    ".tsv": "text/tab-separated-values",
    ".json": "application/json",
    ".xml": "application/xml",
    ".txt": "text/plain",
    ".jpg": "image/jpeg",
    ".jpeg": "image/jpeg",
    ".png": "image/png",
    ".gif": "image/gif",
    ".pdf": "application/pdf",
}

ATT_KINDS = ("correlation", "name-similarity", "value-similarity", "containment")


class ProfilerError(Exception):
    pass


@dataclass
class NumericStats:
    count: int
    null_count: int
    distinct_count: int
    minimum: Optional[float]
    maximum: Optional[float]
    mean: Optional[float]
    std_dev: Optional[float]

    def to_props(self, name: str) -> dict:
        props = {
            "name": name,
            "count": self.count,
            "nullCount": self.null_count,
            "distinctCount": self.distinct_count,
        }
        if self.minimum is not None:
            props.update(
                {"min": self.minimum, "max": self.maximum, "mean": self.mean, "stdDev": self.std_dev}
            )
        return props


@dataclass
class NominalStats:
    count: int
    null_count: int
    distinct_count: int
    min_length: int
    max_length: int
    top_values: list[tuple[str, int]]

    def to_props(self, name: str) -> dict:
        return {
            "name": name,
            "count": self.count,
            "nullCount": self.null_count,
            "distinctCount": self.distinct_count,
            "minLength": self.min_length,
            "maxLength": self.max_length,
            "topValues": json.dumps(self.top_values, ensure_ascii=False),
        }


def compute_numeric_stats(values: list[Optional[float]]) -> NumericStats:
    """Population statistics over the non-null values."""
    non_null = [v for v in values if v is not None]
    count = len(values)
    null_count = count - len(non_null)
    if not non_null:
        return NumericStats(count, null_count, 0, None, None, None, None)
    n = len(non_null)
    mean = math.fsum(non_null) / n
    variance = math.fsum((v - mean) ** 2 for v in non_null) / n
    return NumericStats(
        count=count,
        null_count=null_count,
        distinct_count=len(set(non_null)),
        minimum=min(non_null),
        maximum=max(non_null),
        mean=mean,
        std_dev=math.sqrt(variance),
    )


def compute_nominal_stats(values: list[Optional[str]]) -> NominalStats:
    """Counts, length bounds and top-5 by frequency (ties lexicographic)."""
    non_null = [v for v in values if v is not None]
    frequencies: dict[str, int] = {}
    for value in non_null:
        frequencies[value] = frequencies.get(value, 0) + 1
    top = sorted(frequencies.items(), key=lambda item: (-item[1], item[0]))[:TOP_K]
    return NominalStats(
        count=len(values),
        null_count=len(values) - len(non_null),
        distinct_count=len(frequencies),
        min_length=min((len(v) for v in non_null), default=0),
        max_length=max((len(v) for v in non_null), default=0),
        top_values=[(value, freq) for value, freq in top],
    )


def detect_dataset_type(raw_path: str | Path) -> str:
    return tabular.detect_dataset_type(Path(raw_path))


def get_dataset_format(raw_path: str | Path) -> str:
    """Media-type string from magic bytes, falling back to the extension.

    A directory reports its members' common format when they agree.
    """
    path = Path(raw_path)
    if path.is_dir():
        formats = {
            get_dataset_format(member)
            for member in sorted(path.rglob("*"))
            if member.is_file() and not member.name.startswith("_")
        }
        if len(formats) == 1:
            return formats.pop()
        return "application/octet-stream"
    try:
        head = path.open("rb").read(16)
    except OSError as exc:
        raise ProfilerError(f"cannot read {path}: {exc}") from None
    for magic, media_type in MAGIC_FORMATS:
        if head.startswith(magic):
            return media_type
    return EXTENSION_FORMATS.get(path.suffix.lower(), "application/octet-stream")


def seed_attribute_kinds(store: Store, config: Config) -> None:
    """Create the predefined RelationshipAtt nodes once per store."""
    with store.exclusive():
        existing = {n.props["name"] for n in store.find("RelationshipAtt")}
        for kind in ATT_KINDS:
            if kind not in existing:
                store.put_node(
                    "RelationshipAtt",
                    {"name": kind, "threshold": config.att_thresholds[kind]},
                )


def attribute_kind_id(store: Store, name: str) -> str:
    found = store.find("RelationshipAtt", lambda n: n.props.get("name") == name)
    if not found:
        raise ProfilerError(f"attribute relationship kind {name!r} is not seeded")
    return found[0].id


def _ingest_of(store: Store, dataset_id: str) -> Optional[str]:
    ingests = store.neighbors(dataset_id, "Ingest-DatalakeDataset", "in")
    return ingests[0].id if ingests else None


def profile_dataset(store: Store, config: Config, dataset_id: str) -> bool:
    """Complete schematic metadata for one ingested dataset.

    Returns False when tabular content is malformed; the failure is recorded
    on the dataset's Ingest errorLog and no schema nodes are created.
    """
    dataset = store.node(dataset_id)
    raw_path = Path(dataset.props["lakePath"])
    dataset_type = dataset.props.get("type") or detect_dataset_type(raw_path)

    if dataset_type == "unstructured":
        store.set_props(dataset_id, {"format": get_dataset_format(raw_path)})
        return True

    try:
        entities = tabular.load_entities(raw_path, dataset.props["name"])
    except (tabular.TabularError, ValueError, OSError) as exc:
        ingest_id = _ingest_of(store, dataset_id)
        if ingest_id is not None:
            ingest = store.node(ingest_id)
            previous = ingest.props.get("errorLog", "")
            message = f"profiling failed: {exc}"
            store.set_props(
                ingest_id, {"errorLog": f"{previous}\n{message}".strip()}
            )
        return False

    for entity in entities:
        entity_id = store.put_node(
            "EntityClass",
            {
                "name": entity.name,
                "rowCount": entity.row_count,
                "attributeCount": len(entity.columns),
            },
        )
        store.put_edge("DatalakeDataset-EntityClass", dataset_id, entity_id)
        attribute_ids: list[str] = []
        for index, column in enumerate(entity.columns):
            values = entity.column_values(index)
            if tabular.classify_column(values) == "numeric":
                stats = compute_numeric_stats(tabular.numeric_values(values))
                att_id = store.put_node("NumericAttribute", stats.to_props(column))
            else:
                stats = compute_nominal_stats(values)
                att_id = store.put_node("NominalAttribute", stats.to_props(column))
            store.put_edge("EntityClass-Attribute", entity_id, att_id)
            attribute_ids.append(att_id)
        analyze_attribute_pairs(store, config, entity, attribute_ids)
    return True


def analyze_attribute_pairs(
    store: Store, config: Config, entity: tabular.Entity, attribute_ids: list[str]
) -> list[str]:
    """Evaluate every unordered attribute pair of one entity against each
    applicable relationship kind, persisting values that reach the kind's
    threshold."""
    created: list[str] = []
    kinds = {name: attribute_kind_id(store, name) for name in ATT_KINDS}
    columns = entity.columns
    classified = [tabular.classify_column(entity.column_values(i)) for i in range(len(columns))]

    for i in range(len(columns)):
        values_i = entity.column_values(i)
        for j in range(i + 1, len(columns)):
            values_j = entity.column_values(j)
            results: list[tuple[str, float]] = []

            sim = linker.name_similarity(columns[i], columns[j])
            if sim >= config.att_thresholds["name-similarity"]:
                results.append(("name-similarity", sim))

            if classified[i] == "numeric" and classified[j] == "numeric":
                paired = [
                    (a, b)
                    for a, b in zip(tabular.numeric_values(values_i), tabular.numeric_values(values_j))
                    if a is not None and b is not None
                ]
                if len(paired) >= 2:
                    try:
                        r = linker.pearson([p[0] for p in paired], [p[1] for p in paired])
                        if abs(r) >= config.att_thresholds["correlation"]:
                            results.append(("correlation", r))
                    except linker.UndefinedInputError:
                        pass

            if classified[i] == "nominal" and classified[j] == "nominal":
                set_i = {v for v in values_i if v is not None}
                set_j = {v for v in values_j if v is not None}
                if set_i and set_j:
                    containment = max(
                        linker.exact_containment(set_i, set_j),
                        linker.exact_containment(set_j, set_i),
                    )
                    if containment >= config.att_thresholds["containment"]:
                        results.append(("containment", containment))
                value_sim = linker.exact_jaccard(set_i, set_j)
                if value_sim >= config.att_thresholds["value-similarity"]:
                    results.append(("value-similarity", value_sim))

            for kind, value in results:
                ana_id = store.put_node("AnalysisAttribute", {"value": value})
                store.put_edge("AnalysisAttribute-Attribute", ana_id, attribute_ids[i])
                store.put_edge("AnalysisAttribute-Attribute", ana_id, attribute_ids[j])
                store.put_edge("AnalysisAttribute-RelationshipAtt", ana_id, kinds[kind])
                created.append(ana_id)
    return created
