"""Append-only tuple log on disk, and the bounded in-memory buffer that spills into it."""

from __future__ import annotations

import os
from collections import deque
from typing import Iterable, Iterator

from .model import Interval, StreamError, StreamTuple


class OutOfOrderError(StreamError):
    pass


class HistoricStore:
    """Time-ordered tuple log, one ``timestamp,attr=value;...`` line per tuple.

    Range queries binary-search the file by byte offset, so only the lines
    inside the requested interval (plus O(log n) probes) are parsed. One
    appender and any number of readers may share a file; readers ignore a
    trailing line that is still being written.
    """

    def __init__(self, path, name: str | None = None):
        self.path = os.fspath(path)
        self.name = name or os.path.splitext(os.path.basename(self.path))[0]
        if not os.path.exists(self.path):
            open(self.path, "a", encoding="utf-8").close()
        self.last_timestamp = self._read_last_timestamp()
        self.lines_parsed = 0  # by the most recent range query

    def _read_last_timestamp(self) -> float | None:
        with open(self.path, "rb") as fh:
            fh.seek(0, os.SEEK_END)
            pos = fh.tell()
            if pos == 0:
                return None
            back = min(pos, 4096)
            while True:
                fh.seek(pos - back)
                chunk = fh.read(back)
                lines = chunk.rstrip(b"\n").split(b"\n")
                if len(lines) > 1 or back == pos:
                    return float(lines[-1].split(b",", 1)[0])
                back = min(pos, back * 2)

    def append(self, tup: StreamTuple):
        if self.last_timestamp is not None and tup.timestamp < self.last_timestamp:
            raise OutOfOrderError(
                f"store {self.name}: {tup.timestamp} is older than {self.last_timestamp}"
            )
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(tup.to_line() + "\n")
        self.last_timestamp = tup.timestamp

    def extend(self, tuples: Iterable[StreamTuple]):
        batch = []
        last = self.last_timestamp
        for t in tuples:
            if last is not None and t.timestamp < last:
                raise OutOfOrderError(f"store {self.name}: {t.timestamp} is older than {last}")
            last = t.timestamp
            batch.append(t.to_line() + "\n")
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write("".join(batch))
        self.last_timestamp = last

    def __iter__(self) -> Iterator[StreamTuple]:
        with open(self.path, "rb") as fh:
            for raw in fh:
                if raw.endswith(b"\n"):
                    yield StreamTuple.from_line(raw.decode("utf-8"))

    def __len__(self) -> int:
        with open(self.path, "rb") as fh:
            return sum(1 for raw in fh if raw.endswith(b"\n"))

    @staticmethod
    def _line_at(fh, pos: int) -> tuple[int, bytes]:
        """Start offset and content of the first complete line starting at or after pos."""
        if pos > 0:
            fh.seek(pos - 1)
            fh.readline()
        else:
            fh.seek(0)
        start = fh.tell()
        line = fh.readline()
        if not line.endswith(b"\n"):
            line = b""
        return start, line

    def _first_offset(self, fh, size: int, ts: float) -> int:
        lo, hi = 0, size
        while lo < hi:
            mid = (lo + hi) // 2
            _, line = self._line_at(fh, mid)
            self.lines_parsed += 1
            if not line or float(line.split(b",", 1)[0]) >= ts:
                hi = mid
            else:
                lo = mid + 1
        return self._line_at(fh, lo)[0]

    def range_query(self, interval: Interval) -> list[StreamTuple]:
        """One-shot fetch of every stored tuple inside ``interval``."""
        self.lines_parsed = 0
        out = []
        with open(self.path, "rb") as fh:
            size = os.fstat(fh.fileno()).st_size
            fh.seek(self._first_offset(fh, size, interval.start))
            for raw in fh:
                if not raw.endswith(b"\n"):
                    break
                self.lines_parsed += 1
                tup = StreamTuple.from_line(raw.decode("utf-8"))
                # every line from here on has timestamp >= interval.start
                if tup.timestamp not in interval:
                    break
                out.append(tup)
        return out


class BoundedBuffer:
    """FIFO of recent tuples; overflow spills the oldest into a store.

    Single writer (``push``) and single reader; nothing is ever dropped.
    """

    def __init__(self, capacity: int, store: HistoricStore):
        if capacity < 1:
            raise StreamError(f"buffer capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self.store = store
        self._items: deque[StreamTuple] = deque()
        self._last: float | None = None

    def push(self, tup: StreamTuple) -> "BoundedBuffer":
        if self._last is not None and tup.timestamp < self._last:
            raise OutOfOrderError(f"tuple at {tup.timestamp} arrived after {self._last}")
        self._items.append(tup)
        self._last = tup.timestamp
        while len(self._items) > self.capacity:
            self.store.append(self._items[0])
            self._items.popleft()
        return self

    def __len__(self) -> int:
        return len(self._items)

    def __iter__(self) -> Iterator[StreamTuple]:
        return iter(list(self._items))

    def in_range(self, interval: Interval) -> list[StreamTuple]:
        return [t for t in self._items if t.timestamp in interval]


def buffer_push(buffer: BoundedBuffer, tup: StreamTuple) -> BoundedBuffer:
    return buffer.push(tup)
