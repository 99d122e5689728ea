"""Runtime configuration for the lake, service and CLI.

A single JSON config file covers store/raw-zone paths, relationship
thresholds, the MinHash seed, the users table (name -> clearance), the
per-source credibility table and the veracity weights. Paths and the service
port can be overridden with environment variables (``LAKECAT_STORE_PATH``,
``LAKECAT_RAW_PATH``, ``LAKECAT_PORT``).
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field, asdict
from pathlib import Path

# Thresholds for dataset-level relationship kinds.
DEFAULT_DS_THRESHOLDS = {
    "similarity": 0.3,
    "containment": 0.5,
    "correlation": 0.7,
    "logical-cluster": 0.5,
}

# Thresholds for attribute-level relationship kinds.
DEFAULT_ATT_THRESHOLDS = {
    "correlation": 0.7,
    "containment": 0.5,
    "value-similarity": 0.5,
    "name-similarity": 0.8,
}

DEFAULT_SENSITIVITY_LEVELS = {
    0: "public",
    1: "internal",
    2: "confidential",
    3: "restricted",
}


class ConfigError(Exception):
    pass


@dataclass
class Config:
    store_path: str = "lake/store"
    raw_path: str = "lake/raw"
    port: int = 8000
    minhash_k: int = 128
    seed: int = 2024
    ds_thresholds: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_DS_THRESHOLDS))
    att_thresholds: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_ATT_THRESHOLDS))
    users: dict[str, int] = field(default_factory=lambda: {"admin": 3})
    credibility: dict[str, float] = field(default_factory=dict)
    default_credibility: float = 0.5
    veracity_weights: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)
    source_code_url: str = "https://example.invalid/lakecat"
    ui_dist: str | None = None

    def __post_init__(self):
        total = sum(self.veracity_weights)
        if abs(total - 1.0) > 1e-9:
            raise ConfigError(f"veracity weights must sum to 1, got {total}")
        for name, clearance in self.users.items():
            if clearance < 0:
                raise ConfigError(f"clearance for {name!r} must be >= 0")

    @classmethod
    def load(cls, path: str | Path | None = None) -> "Config":
        data: dict = {}
        if path is not None:
            raw = Path(path).read_text(encoding="utf-8")
            try:
                data = json.loads(raw)
            except ValueError as exc:
                raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
        if "veracity_weights" in data:
            data["veracity_weights"] = tuple(data["veracity_weights"])
        if "users" in data:
            data["users"] = {name: int(level) for name, level in data["users"].items()}
        cfg = cls(**data)
        cfg.store_path = os.environ.get("LAKECAT_STORE_PATH", cfg.store_path)
        cfg.raw_path = os.environ.get("LAKECAT_RAW_PATH", cfg.raw_path)
        cfg.port = int(os.environ.get("LAKECAT_PORT", cfg.port))
        return cfg

    def clearance(self, user: str) -> int:
        return self.users.get(user, 0)

    def source_credibility(self, source_name: str) -> float:
        return self.credibility.get(source_name, self.default_credibility)

    def config_hash(self) -> str:
        """Reproducibility fingerprint recorded on every ingestion run."""
        record = asdict(self)
        record["veracity_weights"] = list(record["veracity_weights"])
        encoded = json.dumps(record, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(encoded.encode("utf-8")).hexdigest()
