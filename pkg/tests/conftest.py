from __future__ import annotations

import os
import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
SRC = ROOT / "src"
SANDBOX_HOME = ROOT / ".test_place" / "global-home"
os.environ.setdefault("GRAPHDRIFT_HOME", str(SANDBOX_HOME))
SANDBOX_HOME.mkdir(parents=True, exist_ok=True)
PYTEST_TEMP = Path(os.environ.get("PYTEST_DEBUG_TEMPROOT", "/tmp/graphdrift-pytest")).resolve()
os.environ.setdefault("PYTEST_DEBUG_TEMPROOT", str(PYTEST_TEMP))
PYTEST_TEMP.mkdir(parents=True, exist_ok=True)
if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))

from graphdrift.settings import RuntimeSettings  # noqa: E402


@pytest.fixture()
def runtime_settings(tmp_path: Path) -> RuntimeSettings:
    base = tmp_path / "runtime"
    settings = RuntimeSettings(
        home_dir=base / "home",
        cache_dir=base / "cache",
        log_dir=base / "logs",
        runs_dir=base / "runs",
    )
    for directory in (settings.home_dir, settings.cache_dir, settings.log_dir, settings.runs_dir):
        directory.mkdir(parents=True, exist_ok=True)
    return settings


@pytest.fixture()
def model_problem():
    from graphdrift.adapters.config import load_problem

    return load_problem("model")
