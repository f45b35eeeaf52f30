# levelset_lab/events.py
from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional

import requests


# -------------------- time --------------------

def utc_now_iso() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


# -------------------- sink base --------------------

class EventSink:
    name: str = "base"
    def emit(self, payload: Dict[str, Any]) -> None:  # pragma: no cover
        raise NotImplementedError


# -------------------- sinks --------------------

class StdoutSink(EventSink):
    name = "stdout"
    def emit(self, payload: Dict[str, Any]) -> None:
        print(json.dumps(payload, ensure_ascii=False, sort_keys=True))


class HttpSink(EventSink):
    name = "http"
    def __init__(self, url: str, timeout: float = 5.0):
        self.url = url
        self.timeout = timeout
    def emit(self, payload: Dict[str, Any]) -> None:
        try:
            requests.post(self.url, json=payload, timeout=self.timeout)
        except Exception:
            # best-effort; never raise to caller
            pass


class MemorySink(EventSink):
    name = "memory"
    def __init__(self) -> None:
        self.payloads: List[Dict[str, Any]] = []
        self._lock = threading.Lock()
    def emit(self, payload: Dict[str, Any]) -> None:
        with self._lock:
            self.payloads.append(dict(payload))


# -------------------- factory/manager --------------------

def get_sinks_from_env() -> List[EventSink]:
    """
    LAB_EMIT_SINK: comma-separated list: stdout | http | memory
      - LAB_EMIT_HTTP_URL, LAB_EMIT_HTTP_TIMEOUT
    Empty/none/off/false -> no sinks.
    """
    raw = os.getenv("LAB_EMIT_SINK", "none").strip()
    if not raw or raw.lower() in {"none", "off", "false"}:
        return []
    parts = [p.strip().lower() for p in raw.split(",") if p.strip()]
    sinks: List[EventSink] = []
    for name in parts:
        if name == "stdout":
            sinks.append(StdoutSink())
        elif name == "http":
            url = os.getenv("LAB_EMIT_HTTP_URL", "").strip()
            if url:
                sinks.append(HttpSink(url, float(os.getenv("LAB_EMIT_HTTP_TIMEOUT", "5.0"))))
        elif name == "memory":
            sinks.append(MemorySink())
        # unknown names are ignored
    return sinks


@dataclass
class EventConfig:
    sinks: List[EventSink] = field(default_factory=list)

    def memory(self) -> Optional[MemorySink]:
        for s in self.sinks:
            if isinstance(s, MemorySink):
                return s
        return None


_manager: Optional[EventConfig] = None


def event_manager() -> EventConfig:
    global _manager
    if _manager is None:
        _manager = EventConfig(sinks=get_sinks_from_env())
    return _manager


def reload_sinks() -> None:
    """Re-read env and rebuild sinks (useful for tests)."""
    global _manager
    _manager = EventConfig(sinks=get_sinks_from_env())


def emit(payload: Dict[str, Any]) -> None:
    """Deliver to every sink in the calling thread."""
    for s in event_manager().sinks:
        try:
            s.emit(payload)
        except Exception:
            pass


def emit_async(payload: Dict[str, Any]) -> Optional[threading.Thread]:
    """Fan-out to all sinks without blocking the caller."""
    cfg = event_manager()
    if not cfg.sinks:
        return None
    def _run():
        for s in cfg.sinks:
            try:
                s.emit(payload)
            except Exception:
                pass
    th = threading.Thread(target=_run, daemon=True)
    th.start()
    return th


# -------------------- payload builders --------------------

def _event(type_: str, extra: Optional[Dict[str, Any]], **fields: Any) -> Dict[str, Any]:
    # extra keys win over the standard fields
    return {"type": type_, **fields, "created_at": utc_now_iso(), **(extra or {})}


def build_probe_event(
    *,
    probe: str,
    config_digest: str,
    passed: bool,
    worst_ratio: Optional[float],
    assertions: int,
    failures: int,
    extra: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    """probe.completed payload."""
    return _event("probe.completed", extra, probe=probe, config_digest=config_digest, passed=passed,
                  worst_ratio=worst_ratio, assertions=assertions, failures=failures)


def build_failed_event(
    *,
    kind: str,
    reason: str,
    config_digest: Optional[str] = None,
    extra: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    """
    probe.failed payload for guard hits, invalid configs and infeasible
    construction parameters.
    """
    return _event("probe.failed", extra, kind=kind, reason=reason, config_digest=config_digest)


def build_construction_event(
    *,
    kind: str,
    R: int,
    params: Dict[str, Any],
    config_digest: Optional[str] = None,
    extra: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    return _event("construction.built", extra, kind=kind, R=R, params=params, config_digest=config_digest)


# -------------------- tiny debug helper --------------------

def sinks_summary() -> Dict[str, Any]:
    """Return a quick snapshot of configured sinks (for debugging)."""
    cfg = event_manager()
    return {
        "count": len(cfg.sinks),
        "sinks": [s.name for s in cfg.sinks],
        "env": {
            "LAB_EMIT_SINK": os.getenv("LAB_EMIT_SINK", ""),
            "LAB_EMIT_HTTP_URL": os.getenv("LAB_EMIT_HTTP_URL", ""),
        },
    }


__all__ = [
    "utc_now_iso",
    "EventSink",
    "StdoutSink",
    "HttpSink",
    "MemorySink",
    "get_sinks_from_env",
    "EventConfig",
    "event_manager",
    "reload_sinks",
    "emit",
    "emit_async",
    "build_probe_event",
    "build_failed_event",
    "build_construction_event",
    "sinks_summary",
]
