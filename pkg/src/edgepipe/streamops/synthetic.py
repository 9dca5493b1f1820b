"""Synthetic connection-speed measurements standing in for a real probe dataset."""

from __future__ import annotations

import math
import random
from typing import Iterator

from .model import StreamTuple
from .store import HistoricStore


def speed_tuples(start: float, end: float, step: float, seed: int = 0) -> Iterator[StreamTuple]:
    """Tuples every ``step`` seconds in ``[start, end)`` with download/upload speeds (Mbit/s).

    Speeds follow a daily cycle plus Gaussian noise; values are rounded to
    three decimals so the text store round-trips them exactly.
    """
    rng = random.Random(seed)
    n = int(math.ceil((end - start) / step))
    for i in range(n):
        ts = start + i * step
        phase = math.sin(2 * math.pi * (ts % 86400) / 86400)
        down = max(0.1, 40.0 + 12.0 * phase + rng.gauss(0, 4))
        up = max(0.05, 8.0 + 2.5 * phase + rng.gauss(0, 1))
        yield StreamTuple(ts, {"download_speed": round(down, 3), "upload_speed": round(up, 3)})


def write_store(path, start: float, end: float, step: float, seed: int = 0) -> HistoricStore:
    store = HistoricStore(path)
    store.extend(speed_tuples(start, end, step, seed))
    return store
