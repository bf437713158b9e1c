"""Packaged schemas and problem definitions."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources
from typing import Any

__all__ = ["load_schema", "problem_resource_text", "list_problem_resources"]


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict[str, Any]:
    resource = resources.files(__name__) / name
    with resource.open("r", encoding="utf-8") as handle:
        return json.load(handle)


def list_problem_resources() -> tuple[str, ...]:
    folder = resources.files(__name__ + ".problems")
    names = [entry.name[: -len(".yaml")] for entry in folder.iterdir() if entry.name.endswith(".yaml")]
    return tuple(sorted(names))


def problem_resource_text(name: str) -> str:
    resource = resources.files(__name__ + ".problems") / f"{name}.yaml"
    return resource.read_text("utf-8")
