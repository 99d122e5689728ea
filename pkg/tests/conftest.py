from __future__ import annotations

from pathlib import Path

import pytest

from lakecat import Config, Lake

TEST_USERS = {"admin": 3, "alice": 2, "bob": 0}


def make_config(tmp_path: Path, **overrides) -> Config:
    settings = dict(
        store_path=str(tmp_path / "store"),
        raw_path=str(tmp_path / "raw"),
        users=dict(TEST_USERS),
    )
    settings.update(overrides)
    return Config(**settings)


@pytest.fixture
def config(tmp_path) -> Config:
    return make_config(tmp_path)


@pytest.fixture
def lake(config):
    lk = Lake(config)
    yield lk
    lk.close()


def write_csv(path: Path, header: list[str], rows: list[list]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)] + [",".join(str(c) for c in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def ingest_file(lake: Lake, path: Path, name: str, source_type: str = "csv file", user: str = "admin"):
    source_id = lake.connect_source(str(path), source_type, name, owner="tester")
    assert source_id is not None, f"source {path} should be reachable"
    ingest_id, dataset_id = lake.ingest(source_id, user=user)
    return source_id, ingest_id, dataset_id
