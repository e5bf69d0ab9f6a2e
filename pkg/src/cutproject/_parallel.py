"""Ordered parallel map.  Chunking never depends on the worker count."""
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(fn: Callable[[T], R], items: Iterable[T], workers: int = 1) -> List[R]:
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def chunk_slices(n: int, size: int) -> List[slice]:
    size = max(1, int(size))
    return [slice(i, min(i + size, n)) for i in range(0, n, size)]


def split_rows(n_rows: int, row_cost: int, budget: int) -> List[slice]:
    """Slices over ``n_rows`` so each slice costs about ``budget`` entries."""
    per = max(1, budget // max(1, row_cost))
    return chunk_slices(n_rows, per)


