"""The Lake facade: one handle tying the graph store, raw zone and
configuration together. The HTTP service and the CLI both drive this same
object, so both surfaces always answer identically for the same store.
"""

from __future__ import annotations

from pathlib import Path
from typing import Callable, Optional

from . import catalog, enrichment, ingestion, linker, profiler
from .config import Config
from .graph import Store


class Lake:
    def __init__(self, config: Optional[Config] = None):
        self.config = config or Config()
        self.store = Store.open(self.config.store_path)
        self.raw_root = Path(self.config.raw_path)
        self.raw_root.mkdir(parents=True, exist_ok=True)
        enrichment.seed_registries(self.store, self.config)
        profiler.seed_attribute_kinds(self.store, self.config)

    def close(self) -> None:
        self.store.close()

    def __enter__(self) -> "Lake":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # ------------------------------------------------------------ ingestion

    def connect_source(
        self,
        location: str,
        source_type: str,
        name: str,
        owner: str,
        administrator: Optional[str] = None,
        stream_origin: Optional[str] = None,
    ) -> Optional[str]:
        return ingestion.connect_data_source(
            self.store, location, source_type, name, owner, administrator, stream_origin
        )

    def ingest(
        self,
        source_id: str,
        comment: str = "",
        mode: str = "batch",
        user: str = "admin",
        defined_duration: Optional[float] = None,
    ) -> tuple[str, Optional[str]]:
        return ingestion.ingest_dataset(
            self.store, self.config, self.raw_root, source_id, comment, mode, user, defined_duration
        )

    def run_realtime(
        self,
        source_id: str,
        defined_duration: float,
        window_count: int,
        user: str = "admin",
        advance: Optional[Callable[[int], None]] = None,
    ) -> list[tuple[str, Optional[str]]]:
        return ingestion.run_realtime(
            self.store,
            self.config,
            self.raw_root,
            source_id,
            defined_duration,
            window_count,
            user,
            advance,
        )

    # ----------------------------------------------------------- enrichment

    def annotate(self, dataset_id: str, description: Optional[str] = None, tags=()) -> None:
        enrichment.annotate_semantics(self.store, dataset_id, description, tags)

    def mark_sensitivity(self, target_id: str, level: int, user: str = "admin") -> str:
        user_id = ingestion.get_or_create_user(self.store, self.config, user)
        return enrichment.mark_sensitivity(self.store, target_id, level, user_id)

    def compute_veracity(self, dataset_id: str) -> str:
        return enrichment.compute_veracity(self.store, self.config, dataset_id)

    def input_relationship(
        self,
        ds_a: str,
        ds_b: str,
        kind: str,
        value: float,
        name: Optional[str] = None,
        description: Optional[str] = None,
    ) -> str:
        return enrichment.input_relationship(self.store, ds_a, ds_b, kind, value, name, description)

    # --------------------------------------------------------------- linker

    def calculate_relationships(self, dataset_id: str) -> list[str]:
        return linker.calculate_relationships(self.store, self.config, dataset_id)

    # -------------------------------------------------------------- catalog

    def clearance(self, user: str) -> int:
        return self.config.clearance(user)

    def search(self, keyword: str, user: str = "admin") -> list[dict]:
        return catalog.search(self.store, keyword, self.clearance(user))

    def dataset_detail(self, dataset_id: str, user: str = "admin") -> dict:
        return catalog.dataset_detail(self.store, dataset_id, self.clearance(user))

    def lineage(self, dataset_id: str, user: str = "admin") -> dict:
        return catalog.lineage(self.store, dataset_id, self.clearance(user))

    def relationships(self, dataset_id: str, user: str = "admin") -> list[dict]:
        return catalog.relationships(self.store, dataset_id, self.clearance(user))

    def stats(self) -> dict:
        return self.store.stats()

    # ---------------------------------------------------------- global dict

    def global_dict_set(self, key: str, value: str) -> str:
        with self.store.exclusive():
            found = self.store.find("GlobalDictEntry", lambda n: n.props.get("key") == key)
            if found:
                self.store.set_props(found[0].id, {"value": value})
                return found[0].id
            return self.store.put_node("GlobalDictEntry", {"key": key, "value": value})

    def global_dict_entries(self) -> list[dict]:
        return [
            {"key": node.props["key"], "value": node.props["value"]}
            for node in self.store.find("GlobalDictEntry")
        ]
