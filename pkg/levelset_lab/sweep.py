# levelset_lab/sweep.py
from __future__ import annotations

import logging
import queue
import threading
from dataclasses import dataclass
from typing import Any, Callable, List, Optional, Sequence, Tuple, TypeVar

T = TypeVar("T")
R = TypeVar("R")

log = logging.getLogger(__name__)


@dataclass
class WorkItem:
    index: int
    payload: Any


def chunked(n: int, size: int) -> List[Tuple[int, int]]:
    """Half-open ranges covering [0, n) in pieces of at most `size`."""
    size = max(1, size)
    return [(i, min(n, i + size)) for i in range(0, n, size)]


def parallel_map(fn: Callable[[T], R], items: Sequence[T], workers: int = 1) -> List[R]:
    """
    Apply fn to every item and return results in input order.

    workers <= 1 (or a single item) runs inline. Otherwise a bounded queue
    feeds daemon worker threads; the first worker exception is re-raised
    after all workers stop.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]

    q: "queue.Queue[Optional[WorkItem]]" = queue.Queue(maxsize=max(1, 2 * workers))
    results: List[Any] = [None] * len(items)
    errors: List[BaseException] = []
    stop = threading.Event()

    def worker_loop(wid: int) -> None:
        while True:
            item = q.get()
            try:
                if item is None:
                    return
                if stop.is_set():
                    continue
                results[item.index] = fn(item.payload)
            except BaseException as e:  # noqa: BLE001 - surfaced to caller below
                log.debug("worker %d failed on item %d: %s", wid, item.index if item else -1, e)
                errors.append(e)
                stop.set()
            finally:
                q.task_done()

    n_workers = min(workers, len(items))
    threads = [threading.Thread(target=worker_loop, args=(i,), daemon=True) for i in range(n_workers)]
    for t in threads:
        t.start()
    for i, it in enumerate(items):
        if stop.is_set():
            break
        q.put(WorkItem(i, it))
    for _ in threads:
        q.put(None)
    for t in threads:
        t.join()
    if errors:
        raise errors[0]
    return results


__all__ = ["WorkItem", "chunked", "parallel_map"]
