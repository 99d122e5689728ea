"""Parsing of raw-zone files into entities, rows and typed columns.

Shared by the profiler (statistics) and the linker (row sets, correlation),
so both always see identical cell values for the same raw bytes.
"""

from __future__ import annotations

import csv
import io
import json
import xml.etree.ElementTree as ElementTree
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

TABLES_MANIFEST = "_tables.json"
NULL_TOKENS = frozenset({"", "na", "nan", "null"})
MAX_FLATTEN_DEPTH = 3


class TabularError(Exception):
    pass


class NotTabularError(TabularError):
    """Raised when a file cannot be parsed as a table."""


@dataclass
class Entity:
    """One table: a name, column names and row-major cells (None = null)."""

    name: str
    columns: list[str]
    rows: list[list[Optional[str]]]

    @property
    def row_count(self) -> int:
        return len(self.rows)

    def column_values(self, index: int) -> list[Optional[str]]:
        return [row[index] for row in self.rows]


def is_null_token(cell: str) -> bool:
    return cell.strip().lower() in NULL_TOKENS


def parse_numeric(cell: str) -> Optional[float]:
    try:
        return float(cell)
    except ValueError:
        return None


def classify_column(values: list[Optional[str]]) -> str:
    """'numeric' iff every non-null cell parses as a decimal number."""
    non_null = [v for v in values if v is not None]
    if not non_null:
        return "nominal"
    if all(parse_numeric(v) is not None for v in non_null):
        return "numeric"
    return "nominal"


def numeric_values(values: list[Optional[str]]) -> list[Optional[float]]:
    return [None if v is None else parse_numeric(v) for v in values]


def _normalize_cell(cell: str) -> Optional[str]:
    stripped = cell.strip()
    return None if is_null_token(stripped) else stripped


def parse_delimited(text: str) -> tuple[list[str], list[list[Optional[str]]]]:
    """Parse comma- or tab-separated text with quoted fields.

    Requires a header of at least two columns and a consistent column count
    on every row; anything else raises :class:`NotTabularError`.
    """
    first_line = text.splitlines()[0] if text.splitlines() else ""
    delimiter = "\t" if first_line.count("\t") > first_line.count(",") else ","
    reader = csv.reader(io.StringIO(text), delimiter=delimiter)
    try:
        records = [row for row in reader if row]
    except csv.Error as exc:
        raise NotTabularError(str(exc)) from None
    if not records:
        raise NotTabularError("no rows")
    header = [cell.strip() for cell in records[0]]
    if len(header) < 2 or any(not name for name in header):
        raise NotTabularError("header must have at least two named columns")
    width = len(header)
    rows: list[list[Optional[str]]] = []
    for record in records[1:]:
        if len(record) != width:
            raise NotTabularError(f"row width {len(record)} != header width {width}")
        rows.append([_normalize_cell(cell) for cell in record])
    return header, rows


def _flatten(obj: dict, prefix: str = "", depth: int = 1) -> dict[str, Optional[str]]:
    flat: dict[str, Optional[str]] = {}
    for key, value in obj.items():
        path = f"{prefix}{key}"
        if isinstance(value, dict) and depth < MAX_FLATTEN_DEPTH:
            flat.update(_flatten(value, prefix=f"{path}.", depth=depth + 1))
        elif value is None:
            flat[path] = None
        elif isinstance(value, (str, int, float, bool)):
            flat[path] = _normalize_cell(str(value))
        # lists and too-deep subtrees carry no scalar cell
    return flat


def _entity_from_records(name: str, records: list[dict]) -> Entity:
    flattened = [_flatten(record) for record in records if isinstance(record, dict)]
    columns: list[str] = []
    for flat in flattened:
        for key in flat:
            if key not in columns:
                columns.append(key)
    rows = [[flat.get(column) for column in columns] for flat in flattened]
    return Entity(name=name, columns=columns, rows=rows)


def entities_from_json(text: str, default_name: str) -> list[Entity]:
    """Entities are the top-level arrays of objects; keys flatten with '.'."""
    tree = json.loads(text)
    if isinstance(tree, list):
        return [_entity_from_records(default_name, tree)]
    if isinstance(tree, dict):
        entities = []
        for key, value in tree.items():
            if isinstance(value, list) and value and all(isinstance(item, dict) for item in value):
                entities.append(_entity_from_records(key, value))
        return entities
    return []


def looks_like_markup(text: str) -> bool:
    stripped = text.lstrip()
    if not stripped.startswith("<"):
        return False
    try:
        ElementTree.fromstring(text)
        return True
    except ElementTree.ParseError:
        return False


def _read_text(path: Path) -> str:
    return path.read_bytes().decode("utf-8")


def _is_json_tree(text: str) -> bool:
    try:
        return isinstance(json.loads(text), (dict, list))
    except ValueError:
        return False


def detect_file_type(path: Path) -> str:
    """Classify one file as structured | semi-structured | unstructured.

    Object-tree and markup texts are recognized by their leading character
    before the delimited-table attempt, since a JSON array is otherwise
    indistinguishable from a one-line comma-separated header.
    """
    try:
        text = _read_text(path)
    except (UnicodeDecodeError, OSError):
        return "unstructured"
    head = text.lstrip()[:1]
    if head in ("{", "[") and _is_json_tree(text):
        return "semi-structured"
    if head == "<" and looks_like_markup(text):
        return "semi-structured"
    try:
        parse_delimited(text)
        return "structured"
    except NotTabularError:
        pass
    if _is_json_tree(text):
        return "semi-structured"
    return "unstructured"


def detect_dataset_type(path: Path) -> str:
    """Classify a raw dataset path (file or directory).

    A directory is one structured dataset when it ships a table manifest
    (one entity per listed file); any other directory is unstructured.
    """
    path = Path(path)
    if not path.exists():
        raise TabularError(f"raw path {path} does not exist")
    if path.is_dir():
        if (path / TABLES_MANIFEST).exists():
            return "structured"
        return "unstructured"
    return detect_file_type(path)


def load_entities(path: Path, dataset_name: str) -> list[Entity]:
    """Parse the raw path into entities according to its detected type."""
    path = Path(path)
    kind = detect_dataset_type(path)
    if kind == "unstructured":
        raise NotTabularError(f"{path} is unstructured")
    if path.is_dir():
        manifest = json.loads((path / TABLES_MANIFEST).read_text(encoding="utf-8"))
        entities = []
        for table_file in manifest["tables"]:
            member = path / table_file
            header, rows = parse_delimited(_read_text(member))
            entities.append(Entity(name=Path(table_file).stem, columns=header, rows=rows))
        return entities
    text = _read_text(path)
    if kind == "structured":
        header, rows = parse_delimited(text)
        return [Entity(name=dataset_name, columns=header, rows=rows)]
    try:
        return entities_from_json(text, dataset_name)
    except ValueError:
        # well-formed markup: no tabular entities to extract
        return []
