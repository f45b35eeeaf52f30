# levelset_lab/pushgw.py
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Dict, Optional

from prometheus_client import CollectorRegistry, Counter, Gauge, push_to_gateway, pushadd_to_gateway


@dataclass
class PushSettings:
    url: str
    job: str
    instance: str
    mode: str
    timeout: float


def load_push_settings() -> PushSettings:
    return PushSettings(
        url=os.getenv("PUSHGATEWAY_URL", "").strip(),
        job=os.getenv("PUSHGATEWAY_JOB", "levelset_lab"),
        instance=os.getenv("PUSHGATEWAY_INSTANCE", ""),
        mode=os.getenv("PUSHGATEWAY_MODE", "pushadd").lower(),
        timeout=float(os.getenv("PUSHGATEWAY_TIMEOUT", "2.0")),
    )


def _grouping(s: PushSettings, extra: Optional[Dict[str, str]] = None) -> Dict[str, str]:
    g: Dict[str, str] = {}
    if s.instance:
        g["instance"] = s.instance
    if extra:
        g.update({k: str(v) for k, v in extra.items()})
    return g


def _safe_push(s: PushSettings, reg: CollectorRegistry, grouping: Dict[str, str]) -> None:
    """Best-effort push; swallow all errors."""
    try:
        if s.mode == "push":
            push_to_gateway(s.url, job=s.job, registry=reg, grouping_key=grouping, timeout=s.timeout)
        else:
            pushadd_to_gateway(s.url, job=s.job, registry=reg, grouping_key=grouping, timeout=s.timeout)
    except Exception:
        pass


def probe_registry(probe: str, outcome: str, duration_s: Optional[float] = None,
                   worst_ratio: Optional[float] = None) -> CollectorRegistry:
    reg = CollectorRegistry()
    c = Counter("levelset_lab_probes_total", "Probe runs by outcome", ["probe", "outcome"], registry=reg)
    c.labels(probe, outcome).inc()
    if duration_s is not None:
        g = Gauge("levelset_lab_probe_last_duration_seconds", "Last probe duration (seconds)", ["probe"], registry=reg)
        g.labels(probe).set(duration_s)
    if worst_ratio is not None:
        w = Gauge("levelset_lab_probe_worst_ratio", "Worst observed/bound ratio of the last run", ["probe"], registry=reg)
        w.labels(probe).set(worst_ratio)
    return reg


def push_probe(probe: str, outcome: str, duration_s: Optional[float] = None,
               worst_ratio: Optional[float] = None, extra_labels: Optional[Dict[str, str]] = None) -> bool:
    """Returns False when no gateway is configured."""
    s = load_push_settings()
    if not s.url:
        return False
    _safe_push(s, probe_registry(probe, outcome, duration_s, worst_ratio), _grouping(s, extra_labels))
    return True


__all__ = ["PushSettings", "load_push_settings", "probe_registry", "push_probe"]
