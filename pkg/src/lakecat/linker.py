"""Automatic dataset-relationship detection.

Similarity between datasets is Jaccard over canonicalized row hashes,
estimated with MinHash sketches; containment, correlation and tag affinity
use exact set and moment arithmetic. All measures are deterministic for a
fixed seed, and persisted relationship instances are idempotent per
(sorted dataset pair, kind).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from . import tabular
from .config import Config
from .graph import Store

MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3

ROW_HASH_SEED = 0
CELL_SEPARATOR = "\x1f"

DS_KINDS = ("similarity", "containment", "correlation", "logical-cluster")


class LinkerError(Exception):
    pass


class UndefinedInputError(LinkerError):
    """Input outside the measure's domain (empty set, constant series...)."""


class NotApplicableError(LinkerError):
    """Measure does not apply to this dataset (e.g. row hashes of images)."""


class SignatureMismatchError(LinkerError):
    """Signatures built with different k or seed cannot be compared."""


# ----------------------------------------------------------------- hashing


def splitmix64(x: int) -> int:
    """One round of the splitmix64 sequence/finalizer (wrapping 64-bit)."""
    z = (x + _GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def hash64(data: bytes, seed: int = 0) -> int:
    """Seeded FNV-1a over the bytes, finished with a splitmix64 avalanche."""
    h = _FNV_OFFSET ^ splitmix64(seed)
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & MASK64
    return splitmix64(h)


def _splitmix64_np(x: np.ndarray) -> np.ndarray:
    z = x + np.uint64(_GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


# ----------------------------------------------------------------- sketches


@dataclass(frozen=True)
class MinHashSignature:
    k: int
    seed: int
    values: tuple[int, ...]

    def __post_init__(self):
        if len(self.values) != self.k:
            raise LinkerError(f"signature has {len(self.values)} values, expected k={self.k}")


def minhash(hashes: Iterable[int], k: int = 128, seed: int = 2024) -> MinHashSignature:
    """MinHash sketch: position i holds the minimum of permutation i.

    Permutation i of element x is splitmix64(x ^ key_i) with
    key_i = splitmix64(splitmix64(seed) + i). The empty set sketches to all
    2^64-1 values.
    """
    elements = np.fromiter((h & MASK64 for h in hashes), dtype=np.uint64)
    if elements.size == 0:
        return MinHashSignature(k=k, seed=seed, values=tuple([MASK64] * k))
    base = splitmix64(seed)
    keys = np.array([splitmix64((base + i) & MASK64) for i in range(k)], dtype=np.uint64)
    with np.errstate(over="ignore"):
        permuted = _splitmix64_np(elements[None, :] ^ keys[:, None])
    values = permuted.min(axis=1)
    return MinHashSignature(k=k, seed=seed, values=tuple(int(v) for v in values))


def estimate_jaccard(sig_a: MinHashSignature, sig_b: MinHashSignature) -> float:
    """Fraction of matching positions; unbiased estimator of Jaccard."""
    if sig_a.k != sig_b.k or sig_a.seed != sig_b.seed:
        raise SignatureMismatchError(
            f"cannot compare signatures (k={sig_a.k},seed={sig_a.seed}) vs (k={sig_b.k},seed={sig_b.seed})"
        )
    matches = sum(1 for a, b in zip(sig_a.values, sig_b.values) if a == b)
    return matches / sig_a.k


# ------------------------------------------------------------ set measures


def exact_jaccard(set_a: set, set_b: set) -> float:
    union = set_a | set_b
    if not union:
        return 0.0
    return len(set_a & set_b) / len(union)


def exact_containment(set_a: set, set_b: set) -> float:
    """|A∩B| / |A|: the fraction of A's elements present in B."""
    if not set_a:
        raise UndefinedInputError("containment of an empty set is undefined")
    return len(set_a & set_b) / len(set_a)


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation coefficient, exact ±1.0 on perfectly linear input."""
    if len(x) != len(y):
        raise LinkerError(f"length mismatch: {len(x)} vs {len(y)}")
    n = len(x)
    if n < 2:
        raise UndefinedInputError("need at least two points")
    mean_x = math.fsum(x) / n
    mean_y = math.fsum(y) / n
    dx = [value - mean_x for value in x]
    dy = [value - mean_y for value in y]
    sxx = math.fsum(d * d for d in dx)
    syy = math.fsum(d * d for d in dy)
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedInputError("constant series has undefined correlation")
    sxy = math.fsum(a * b for a, b in zip(dx, dy))
    if sxy * sxy == sxx * syy:
        return math.copysign(1.0, sxy)
    r = sxy / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def name_similarity(name_a: str, name_b: str) -> float:
    """Normalized Levenshtein similarity over case-folded names."""
    a = name_a.strip().casefold()
    b = name_b.strip().casefold()
    if not a and not b:
        return 1.0
    longest = max(len(a), len(b))
    return 1.0 - _levenshtein(a, b) / longest


def _levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, char_a in enumerate(a, start=1):
        current = [i]
        for j, char_b in enumerate(b, start=1):
            cost = 0 if char_a == char_b else 1
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + cost))
        previous = current
    return previous[-1]


# ------------------------------------------------------------- row hashing


def canonical_row(cells: Sequence[Optional[str]]) -> str:
    return CELL_SEPARATOR.join("" if cell is None else cell.strip() for cell in cells)


def row_hash_set(entities: Iterable[tabular.Entity]) -> set[int]:
    """One 64-bit hash per canonicalized data row across all entities."""
    hashes = set()
    for entity in entities:
        for row in entity.rows:
            hashes.add(hash64(canonical_row(row).encode("utf-8"), seed=ROW_HASH_SEED))
    return hashes


def dataset_row_hashes(store: Store, dataset_id: str) -> set[int]:
    node = store.node(dataset_id)
    if node.props.get("type") == "unstructured":
        raise NotApplicableError(f"dataset {dataset_id} is unstructured")
    entities = tabular.load_entities(Path(node.props["lakePath"]), node.props["name"])
    return row_hash_set(entities)


# ----------------------------------------------------- graph-level linking


def tag_jaccard(store: Store, ds_a: str, ds_b: str) -> float:
    """Jaccard over the case-folded tag-name sets; 0 when both are untagged."""
    tags_a = {t.props["name"] for t in store.neighbors(ds_a, "DatalakeDataset-Tag", "out")}
    tags_b = {t.props["name"] for t in store.neighbors(ds_b, "DatalakeDataset-Tag", "out")}
    if not tags_a and not tags_b:
        return 0.0
    return exact_jaccard(tags_a, tags_b)


def relationship_kind(store: Store, name: str) -> Optional[str]:
    found = store.find("RelationshipDS", lambda n: n.props.get("name") == name)
    return found[0].id if found else None


def existing_ds_relationship(store: Store, ds_a: str, ds_b: str, kind_id: str) -> Optional[str]:
    """Relationship node already linking the pair under this kind, if any."""
    rels_a = {n.id for n in store.neighbors(ds_a, "AnalysisDSRelationship-DatalakeDataset", "in")}
    rels_b = {n.id for n in store.neighbors(ds_b, "AnalysisDSRelationship-DatalakeDataset", "in")}
    for rel_id in sorted(rels_a & rels_b):
        kinds = store.neighbors(rel_id, "AnalysisDSRelationship-RelationshipDS", "out")
        if kinds and kinds[0].id == kind_id:
            return rel_id
    return None


def existing_att_analysis(store: Store, att_a: str, att_b: str, kind_id: str) -> Optional[str]:
    ana_a = {n.id for n in store.neighbors(att_a, "AnalysisAttribute-Attribute", "in")}
    ana_b = {n.id for n in store.neighbors(att_b, "AnalysisAttribute-Attribute", "in")}
    for ana_id in sorted(ana_a & ana_b):
        kinds = store.neighbors(ana_id, "AnalysisAttribute-RelationshipAtt", "out")
        if kinds and kinds[0].id == kind_id:
            return ana_id
    return None


def persist_ds_relationship(
    store: Store,
    ds_a: str,
    ds_b: str,
    kind_id: str,
    value: float,
    name: Optional[str] = None,
    description: Optional[str] = None,
) -> str:
    props: dict = {"value": value}
    if name is not None:
        props["name"] = name
    if description is not None:
        props["description"] = description
    rel_id = store.put_node("AnalysisDSRelationship", props)
    store.put_edge("AnalysisDSRelationship-DatalakeDataset", rel_id, ds_a)
    store.put_edge("AnalysisDSRelationship-DatalakeDataset", rel_id, ds_b)
    store.put_edge("AnalysisDSRelationship-RelationshipDS", rel_id, kind_id)
    return rel_id


def _dataset_numeric_columns(entities: list[tabular.Entity]) -> list[tuple[str, int, list[Optional[float]]]]:
    """(column name, entity row count, parsed values) per numeric column."""
    columns = []
    for entity in entities:
        for index, column in enumerate(entity.columns):
            values = entity.column_values(index)
            if tabular.classify_column(values) == "numeric":
                columns.append((column, entity.row_count, tabular.numeric_values(values)))
    return columns


def _max_abs_correlation(
    cols_a: list[tuple[str, int, list[Optional[float]]]],
    cols_b: list[tuple[str, int, list[Optional[float]]]],
) -> Optional[float]:
    """Max |pearson| over numeric column pairs with matching row counts.

    Positional alignment: rows where either side is null are dropped.
    Returns None when no pair is comparable.
    """
    best: Optional[float] = None
    for _, rows_a, values_a in cols_a:
        for _, rows_b, values_b in cols_b:
            if rows_a != rows_b:
                continue
            paired = [(a, b) for a, b in zip(values_a, values_b) if a is not None and b is not None]
            if len(paired) < 2:
                continue
            try:
                r = abs(pearson([p[0] for p in paired], [p[1] for p in paired]))
            except UndefinedInputError:
                continue
            best = r if best is None else max(best, r)
    return best


def calculate_relationships(store: Store, config: Config, dataset_id: str) -> list[str]:
    """Compute every predefined dataset-relationship kind against all other
    datasets, persisting instances that reach their kind's threshold.

    Pairs that pass the similarity threshold additionally get cross-dataset
    attribute analysis (name-similarity and containment). Already-persisted
    (pair, kind) instances are never duplicated.
    """
    dataset = store.node(dataset_id)
    if dataset.label != "DatalakeDataset":
        raise LinkerError(f"{dataset_id} is not a DatalakeDataset")
    created: list[str] = []
    kind_ids = {name: relationship_kind(store, name) for name in DS_KINDS}

    try:
        own_hashes = dataset_row_hashes(store, dataset_id)
        own_entities = tabular.load_entities(Path(dataset.props["lakePath"]), dataset.props["name"])
    except (tabular.NotTabularError, NotApplicableError):
        own_hashes = None
        own_entities = None
    own_numeric = _dataset_numeric_columns(own_entities) if own_entities else []
    own_sig = (
        minhash(own_hashes, k=config.minhash_k, seed=config.seed) if own_hashes is not None else None
    )

    others = [n for n in store.find("DatalakeDataset") if n.id != dataset_id]
    for other in others:
        try:
            other_hashes = dataset_row_hashes(store, other.id)
            other_entities = tabular.load_entities(Path(other.props["lakePath"]), other.props["name"])
        except (tabular.NotTabularError, NotApplicableError):
            other_hashes = None
            other_entities = None

        values: dict[str, float] = {}
        if own_hashes is not None and other_hashes is not None:
            if own_hashes or other_hashes:
                other_sig = minhash(other_hashes, k=config.minhash_k, seed=config.seed)
                values["similarity"] = estimate_jaccard(own_sig, other_sig)
                if own_hashes and other_hashes:
                    values["containment"] = max(
                        exact_containment(own_hashes, other_hashes),
                        exact_containment(other_hashes, own_hashes),
                    )
            other_numeric = _dataset_numeric_columns(other_entities or [])
            correlation = _max_abs_correlation(own_numeric, other_numeric)
            if correlation is not None:
                values["correlation"] = correlation
        values["logical-cluster"] = tag_jaccard(store, dataset_id, other.id)

        with store.exclusive():
            for kind in DS_KINDS:
                if kind not in values or kind_ids[kind] is None:
                    continue
                if values[kind] < config.ds_thresholds[kind]:
                    continue
                if existing_ds_relationship(store, dataset_id, other.id, kind_ids[kind]):
                    continue
                created.append(
                    persist_ds_relationship(store, dataset_id, other.id, kind_ids[kind], values[kind])
                )

        if "similarity" in values and values["similarity"] >= config.ds_thresholds["similarity"]:
            created.extend(
                _cross_dataset_attribute_analysis(
                    store, config, dataset_id, other.id, own_entities or [], other_entities or []
                )
            )
    return created


def _attribute_nodes_by_entity(store: Store, dataset_id: str) -> dict[str, dict[str, str]]:
    """entity name -> attribute name -> attribute node id."""
    result: dict[str, dict[str, str]] = {}
    for entity in store.neighbors(dataset_id, "DatalakeDataset-EntityClass", "out"):
        atts = store.neighbors(entity.id, "EntityClass-Attribute", "out")
        result[entity.props["name"]] = {a.props["name"]: a.id for a in atts}
    return result


def _cross_dataset_attribute_analysis(
    store: Store,
    config: Config,
    ds_a: str,
    ds_b: str,
    entities_a: list[tabular.Entity],
    entities_b: list[tabular.Entity],
) -> list[str]:
    """Name-similarity and containment between attributes of two datasets."""
    from .profiler import attribute_kind_id  # local import: profiler seeds the registry

    name_kind = attribute_kind_id(store, "name-similarity")
    containment_kind = attribute_kind_id(store, "containment")
    atts_a = _attribute_nodes_by_entity(store, ds_a)
    atts_b = _attribute_nodes_by_entity(store, ds_b)
    created: list[str] = []

    for entity_a in entities_a:
        for entity_b in entities_b:
            for index_a, column_a in enumerate(entity_a.columns):
                values_a = entity_a.column_values(index_a)
                nominal_a = tabular.classify_column(values_a) == "nominal"
                set_a = {v for v in values_a if v is not None}
                node_a = atts_a.get(entity_a.name, {}).get(column_a)
                for index_b, column_b in enumerate(entity_b.columns):
                    node_b = atts_b.get(entity_b.name, {}).get(column_b)
                    if node_a is None or node_b is None:
                        continue
                    pairs: list[tuple[str, float]] = []
                    sim = name_similarity(column_a, column_b)
                    if sim >= config.att_thresholds["name-similarity"]:
                        pairs.append((name_kind, sim))
                    values_b = entity_b.column_values(index_b)
                    if nominal_a and tabular.classify_column(values_b) == "nominal":
                        set_b = {v for v in values_b if v is not None}
                        if set_a and set_b:
                            containment = max(
                                exact_containment(set_a, set_b),
                                exact_containment(set_b, set_a),
                            )
                            if containment >= config.att_thresholds["containment"]:
                                pairs.append((containment_kind, containment))
                    with store.exclusive():
                        for kind_id, value in pairs:
                            if existing_att_analysis(store, node_a, node_b, kind_id):
                                continue
                            ana_id = store.put_node("AnalysisAttribute", {"value": value})
                            store.put_edge("AnalysisAttribute-Attribute", ana_id, node_a)
                            store.put_edge("AnalysisAttribute-Attribute", ana_id, node_b)
                            store.put_edge("AnalysisAttribute-RelationshipAtt", ana_id, kind_id)
                            created.append(ana_id)
    return created
