"""Thread-pool helper honoring the GAPEDGE_THREADS cap.

All parallel work in the package is over pure functions, so results are
independent of scheduling; `thread_map` preserves input order.
"""

import os
from concurrent.futures import ThreadPoolExecutor


def thread_count():
    raw = os.environ.get("GAPEDGE_THREADS", "")
    if raw:
        try:
            n = int(raw)
        except ValueError:
            n = 1
        return max(1, n)
    return min(4, os.cpu_count() or 1)


def thread_map(fn, items):
    items = list(items)
    n = min(thread_count(), len(items))
    if n <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
