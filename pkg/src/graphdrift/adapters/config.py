"""Problem and experiment files: YAML/JSON parsing plus schema validation."""

from __future__ import annotations

import json
from functools import lru_cache
from pathlib import Path
from typing import Any, Iterator, Mapping

import yaml
from jsonschema import Draft202012Validator

from graphdrift.domain.graph import GraphError
from graphdrift.domain.problem import ProblemError, ProblemSpec
from graphdrift.resources import list_problem_resources, load_schema, problem_resource_text

PROBLEM_SCHEMA = "problem.schema.json"
EXPERIMENT_SCHEMA = "experiment.schema.json"
MODEL_PROBLEM = "model_graph"
_ALIASES = {"model": MODEL_PROBLEM}


class ConfigError(ValueError):
    """Raised for unreadable, unknown or schema-violating configuration."""

    def __init__(self, message: str, *, code: str = "config.invalid") -> None:
        super().__init__(f"{code}: {message}")
        self.code = code


@lru_cache(maxsize=None)
def _validator(schema_name: str) -> Draft202012Validator:
    return Draft202012Validator(load_schema(schema_name))


def iter_schema_errors(payload: Any, schema_name: str) -> Iterator[tuple[str, str, str]]:
    """Yield ``(path, validator keyword, message)`` for every schema violation."""

    for error in sorted(_validator(schema_name).iter_errors(payload), key=lambda e: list(map(str, e.absolute_path))):
        path = ".".join(str(item) for item in error.absolute_path) or "<root>"
        yield path, str(error.validator), error.message


def validate(payload: Any, schema_name: str, source: str) -> dict[str, Any]:
    errors = list(iter_schema_errors(payload, schema_name))
    if errors:
        unknown = [e for e in errors if e[1] == "additionalProperties"]
        path, _, message = (unknown or errors)[0]
        code = "config.unknown_key" if unknown else "config.invalid"
        extra = f" (+{len(errors) - 1} more)" if len(errors) > 1 else ""
        raise ConfigError(f"{source}: {path}: {message}{extra}", code=code)
    return dict(payload)


def parse_text(text: str, source: str, *, as_json: bool = False) -> Any:
    try:
        return json.loads(text) if as_json else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"{source}: cannot parse: {exc}") from exc


def read_mapping(path: Path) -> dict[str, Any]:
    """Load a YAML or JSON file whose top level must be a mapping."""

    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"{path} does not exist", code="config.missing_file")
    payload = parse_text(path.read_text(encoding="utf-8"), str(path), as_json=path.suffix.lower() == ".json")
    if payload is None:
        payload = {}
    if not isinstance(payload, Mapping):
        raise ConfigError(f"{path}: top level must be a mapping")
    return dict(payload)


def problem_payload(reference: str | Path) -> tuple[dict[str, Any], str]:
    """Raw problem payload and a display source for a packaged name or a file path."""

    name = _ALIASES.get(str(reference), str(reference))
    if name in list_problem_resources():
        return dict(parse_text(problem_resource_text(name), f"packaged:{name}") or {}), f"packaged:{name}"
    return read_mapping(Path(reference)), str(reference)


def load_problem(reference: str | Path) -> ProblemSpec:
    payload, source = problem_payload(reference)
    validate(payload, PROBLEM_SCHEMA, source)
    try:
        return ProblemSpec.from_dict(payload)
    except (GraphError, ProblemError) as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def load_experiment(path: Path | None, flags: Mapping[str, Any] | None = None) -> dict[str, Any]:
    """Experiment payload: ``flags`` overlaid by the file, validated as a whole.

    Keys present in the file take precedence over command-line values.
    """

    merged = {key: value for key, value in (flags or {}).items() if value is not None}
    if path is not None:
        merged.update(read_mapping(Path(path)))
    return validate(merged, EXPERIMENT_SCHEMA, str(path) if path is not None else "<flags>")


__all__ = [
    "ConfigError",
    "EXPERIMENT_SCHEMA",
    "MODEL_PROBLEM",
    "PROBLEM_SCHEMA",
    "iter_schema_errors",
    "load_experiment",
    "load_problem",
    "parse_text",
    "problem_payload",
    "read_mapping",
    "validate",
]
