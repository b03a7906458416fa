"""Row-band partitioning for pixel-parallel kernels.

Kernels passed to :class:`RowPool` must only touch the rows they are given, so
the result is independent of how many workers run them.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable

# Rows per band: small enough that a band's working set stays in cache.
BAND_ROWS = 32


def row_bands(height: int, parts: int) -> list[slice]:
    parts = max(1, min(parts, height))
    step, extra = divmod(height, parts)
    bands, start = [], 0
    for i in range(parts):
        stop = start + step + (1 if i < extra else 0)
        bands.append(slice(start, stop))
        start = stop
    return bands


class RowPool:
    """Runs ``kernel(rows)`` over horizontal bands, serially or on a thread pool."""

    def __init__(self, threads: int = 1):
        if threads < 1:
            raise ValueError("threads must be >= 1")
        self.threads = threads
        self._executor = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None

    def map_rows(self, height: int, kernel: Callable[[slice], None]) -> None:
        bands = row_bands(height, max(self.threads, -(-height // BAND_ROWS)))
        if self._executor is None or len(bands) == 1:
            for rows in bands:
                kernel(rows)
            return
        # list() re-raises the first worker exception here
        list(self._executor.map(kernel, bands))

    def close(self) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


SERIAL = RowPool(1)
