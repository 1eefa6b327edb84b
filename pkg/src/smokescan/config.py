"""Runtime settings shared by the CLI and service."""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path


def default_dictionary_path() -> Path:
    with resources.as_file(
        resources.files("smokescan").joinpath("data/smoking_terms.txt")
    ) as p:
        return Path(p)


@dataclass
class Settings:
    correction: float = 0.0
    query: str = "smoking"
    dictionary: str | None = None
    decision_threshold: float = 0.5
    seed: int = 7
    embed_endpoint: str | None = None
    classify_endpoint: str | None = None
    ner_endpoint: str | None = None
    auth_token: str | None = None
    store_root: str = "store"

    @classmethod
    def load(cls, path: str | Path | None = None) -> "Settings":
        """Settings from a JSON file; unknown keys are rejected early."""
        if path is None:
            return cls()
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**data)

    def dictionary_path(self) -> Path:
        return Path(self.dictionary) if self.dictionary else default_dictionary_path()
