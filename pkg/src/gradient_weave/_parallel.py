import os
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "GRADIENT_WEAVE_THREADS"


def worker_count() -> int:
    """Worker cap from ``GRADIENT_WEAVE_THREADS`` (0 or unset = one per CPU)."""
    raw = os.environ.get(ENV_THREADS, "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{ENV_THREADS} must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValueError(f"{ENV_THREADS} must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)


def map_chunks(fn, chunks):
    """Apply ``fn`` to each chunk, possibly on threads; results keep chunk order."""
    chunks = list(chunks)
    workers = min(worker_count(), len(chunks))
    if workers <= 1:
        return [fn(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, chunks))
