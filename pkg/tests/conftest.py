# tests/conftest.py
import sys
from pathlib import Path

import pytest

# Add repo root to sys.path so `import levelset_lab` works
ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from levelset_lab.arcs import DyadicLevel  # noqa: E402
from levelset_lab.events import event_manager, reload_sinks  # noqa: E402


@pytest.fixture
def memory_sink(monkeypatch):
    """Route events to an in-process MemorySink for the duration of a test."""
    monkeypatch.setenv("LAB_EMIT_SINK", "memory")
    reload_sinks()
    sink = event_manager().memory()
    yield sink
    monkeypatch.delenv("LAB_EMIT_SINK", raising=False)
    reload_sinks()


@pytest.fixture(autouse=True)
def _quiet_env(monkeypatch):
    # no pushes and no stray sinks from the developer's shell
    for name in ("PUSHGATEWAY_URL", "LAB_SEED", "LAB_WORKERS", "LAB_OUT_DIR", "LAB_LOG_BUDGET"):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.setenv("LAB_EMIT_SINK", "none")
    reload_sinks()


@pytest.fixture
def small_level():
    return DyadicLevel(4, 1)
