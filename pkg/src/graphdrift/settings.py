"""Runtime settings for graphdrift."""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

from graphdrift import __version__


@dataclass(frozen=True)
class RuntimeSettings:
    home_dir: Path
    cache_dir: Path
    log_dir: Path
    runs_dir: Path
    cli_version: str = __version__

    @property
    def telemetry_file(self) -> Path:
        return self.log_dir / "telemetry.jsonl"

    def reference_cache_path(self, key: str) -> Path:
        return self.cache_dir / "reference" / f"{key}.npz"


def _default_home_dir() -> Path:
    override = os.environ.get("GRAPHDRIFT_HOME")
    if override:
        return Path(override).expanduser().resolve()
    return Path.home() / ".graphdrift"


def load_settings() -> RuntimeSettings:
    base = _default_home_dir()
    return RuntimeSettings(
        home_dir=base,
        cache_dir=base / "cache",
        log_dir=base / "logs",
        runs_dir=base / "runs",
    )


SETTINGS = load_settings()
