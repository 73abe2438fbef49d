"""Reproducible run manifests.

Every CLI command writes a manifest next to its outputs: the full
configuration, the seed, the tool version and the active kernel backend.
Replaying a manifest with the same backend reproduces the data files
byte-for-byte (the manifest timestamp is excluded from that guarantee).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

MANIFEST_SCHEMA = "hebmix.manifest.v1"


@dataclass(frozen=True)
class RunManifest:
    command: str
    config: dict
    seed: int | None
    tool_version: str
    backend: str
    timestamp: str
    output_paths: list[str] = field(default_factory=list)

    @staticmethod
    def create(command: str, config: dict, seed: int | None, tool_version: str,
               backend: str, output_paths: list[str]) -> "RunManifest":
        return RunManifest(command=command, config=config, seed=seed,
                           tool_version=tool_version, backend=backend,
                           timestamp=datetime.now(timezone.utc).isoformat(),
                           output_paths=list(output_paths))

    def to_json(self) -> str:
        payload = {"schema": MANIFEST_SCHEMA, "command": self.command,
                   "config": self.config, "seed": self.seed,
                   "tool_version": self.tool_version, "backend": self.backend,
                   "timestamp": self.timestamp, "output_paths": self.output_paths}
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @staticmethod
    def read(path: str | Path) -> "RunManifest":
        raw = json.loads(Path(path).read_text())
        if raw.get("schema") != MANIFEST_SCHEMA:
            raise ValueError(f"not a manifest (schema={raw.get('schema')!r}): {path}")
        return RunManifest(command=raw["command"], config=raw["config"],
                           seed=raw["seed"], tool_version=raw["tool_version"],
                           backend=raw["backend"], timestamp=raw["timestamp"],
                           output_paths=list(raw["output_paths"]))
