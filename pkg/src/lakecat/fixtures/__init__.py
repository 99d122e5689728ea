"""Bundled seven-source fixture corpus for demos and verification.

The corpus mirrors a realistic mix of shapes at toy size: one multi-table
health-indicator set, one image set and five single-table CSVs. The manifest
records each source's expected entity and column counts.
"""

from __future__ import annotations

import json
from pathlib import Path

from ..lake import Lake

_ROOT = Path(__file__).parent


def corpus_path() -> Path:
    return _ROOT / "data"


def load_manifest() -> dict:
    return json.loads((_ROOT / "manifest.json").read_text(encoding="utf-8"))


def ingest_corpus(lake: Lake, user: str = "admin") -> dict[str, str]:
    """Register, ingest, annotate and score every corpus source.

    Returns a mapping of source name -> DatalakeDataset node id.
    """
    manifest = load_manifest()
    datasets: dict[str, str] = {}
    for entry in manifest["sources"]:
        location = str(corpus_path() / entry["path"])
        source_id = lake.connect_source(
            location=location,
            source_type=entry["type"],
            name=entry["name"],
            owner=entry["owner"],
        )
        if source_id is None:
            raise RuntimeError(f"fixture source {entry['name']} unreachable at {location}")
        _, dataset_id = lake.ingest(source_id, comment=f"fixture load of {entry['name']}", user=user)
        if dataset_id is None:
            raise RuntimeError(f"fixture ingest of {entry['name']} failed")
        lake.annotate(dataset_id, description=entry["description"], tags=entry["tags"])
        lake.compute_veracity(dataset_id)
        datasets[entry["name"]] = dataset_id
    return datasets
