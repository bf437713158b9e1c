"""Structured run telemetry (JSON lines, opt-out)."""

from __future__ import annotations

import json
import os
import time
from collections import Counter
from functools import lru_cache
from importlib import resources
from typing import Any, Iterable, Iterator

from jsonschema import Draft202012Validator

from graphdrift.settings import RuntimeSettings

LEVELS = {"info", "warn", "error"}

_DISABLE_VALUES = {"0", "false", "no", "off"}


def telemetry_enabled() -> bool:
    value = os.getenv("GRAPHDRIFT_TELEMETRY", "1").lower()
    return value not in _DISABLE_VALUES


def record_structured_event(
    settings: RuntimeSettings,
    event: str,
    *,
    payload: dict[str, Any] | None = None,
    level: str = "info",
    status: str | None = None,
    component: str | None = None,
    run_id: str | None = None,
    duration_ms: float | None = None,
) -> None:
    if not telemetry_enabled():
        return
    record: dict[str, Any] = {
        "ts": time.time(),
        "event": event,
        "payload": _jsonable(payload or {}),
        "level": level,
    }
    if status:
        record["status"] = status
    if component:
        record["component"] = component
    if run_id:
        record["runId"] = run_id
    if duration_ms is not None:
        record["durationMs"] = duration_ms
    _validate_record(record)
    _validator().validate(record)
    log_path = settings.telemetry_file
    log_path.parent.mkdir(parents=True, exist_ok=True)
    with log_path.open("a", encoding="utf-8") as fh:
        fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def iter_events(settings: RuntimeSettings) -> Iterator[dict[str, Any]]:
    log_path = settings.telemetry_file
    if not log_path.exists():
        return iter(())
    return _read_lines(log_path.read_text(encoding="utf-8").splitlines())


def _read_lines(lines: Iterable[str]) -> Iterator[dict[str, Any]]:
    for line in lines:
        line = line.strip()
        if not line:
            continue
        try:
            yield json.loads(line)
        except json.JSONDecodeError:
            continue


def summarize(events: Iterable[dict[str, Any]]) -> dict[str, Any]:
    """Counts per event, level and component plus the run ids seen and the last error."""

    by_event: Counter[str] = Counter()
    by_level: Counter[str] = Counter()
    by_component: Counter[str] = Counter()
    runs: list[str] = []
    last_error: dict[str, Any] | None = None
    for evt in events:
        by_event[evt.get("event", "unknown")] += 1
        by_level[evt.get("level", "info")] += 1
        by_component[evt.get("component", "unknown")] += 1
        run_id = evt.get("runId")
        if run_id and run_id not in runs:
            runs.append(run_id)
        if evt.get("level") == "error":
            last_error = {"event": evt.get("event"), "error": evt.get("payload", {}).get("error")}
    return {
        "total": sum(by_event.values()),
        "by_event": dict(by_event),
        "by_level": dict(by_level),
        "by_component": dict(by_component),
        "runs": runs,
        "last_error": last_error,
    }


def clear(settings: RuntimeSettings) -> None:
    log_path = settings.telemetry_file
    if log_path.exists():
        log_path.unlink()


def _jsonable(value: Any) -> Any:
    # numpy scalars and arrays end up in payloads from the numerical layers
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "tolist"):
        return value.tolist()
    return value


def _validate_record(record: dict[str, Any]) -> None:
    if not isinstance(record.get("event"), str) or not record["event"].strip():
        raise ValueError("Telemetry event must have non-empty string 'event'")
    level = record.get("level", "info")
    if level not in LEVELS:
        raise ValueError(f"Telemetry level '{level}' is not supported")
    if "durationMs" in record and record["durationMs"] is not None:
        if not isinstance(record["durationMs"], (int, float)) or record["durationMs"] < 0:
            raise ValueError("Telemetry durationMs must be a non-negative number")
    record["ts"] = float(record.get("ts", time.time()))


@lru_cache(maxsize=1)
def _validator() -> Draft202012Validator:
    schema_resource = resources.files("graphdrift.resources") / "telemetry.schema.json"
    schema = json.loads(schema_resource.read_text(encoding="utf-8"))
    return Draft202012Validator(schema)
