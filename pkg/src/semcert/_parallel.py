import os
from concurrent.futures import ThreadPoolExecutor


def thread_count() -> int:
    try:
        n = int(os.environ.get("SEMCERT_THREADS", "0") or 0)
    except ValueError:
        n = 0
    return max(n, 0)


def pmap(func, items):
    """Order-preserving map, threaded when ``SEMCERT_THREADS`` > 1."""
    items = list(items)
    n = thread_count()
    if n <= 1 or len(items) < 2:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(func, items))
