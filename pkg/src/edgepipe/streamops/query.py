"""Continuous queries: ``EVERY <n> <unit> compute the <agg> ...`` parsing and evaluation.

Grammar (keywords are case-sensitive)::

    EVERY <n> <unit> compute the <agg> [value] of [the] <attr>
        ( of the last <n> <unit> | starting <n> <unit> ago )
        FROM <store-ref> and streaming <stream-ref>

Units are seconds, minutes, hours or days (singular or plural).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace

from .model import (
    AggregateKind,
    StreamError,
    StreamTuple,
    WindowKind,
    WindowSpec,
    aggregate,
    window_bounds,
)
from .store import BoundedBuffer, HistoricStore

UNITS = {
    "second": 1,
    "seconds": 1,
    "minute": 60,
    "minutes": 60,
    "hour": 3600,
    "hours": 3600,
    "day": 86400,
    "days": 86400,
}
_RENDER_UNITS = (("day", 86400), ("hour", 3600), ("minute", 60), ("second", 1))


class QueryError(StreamError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class QuerySyntaxError(QueryError):
    pass


class UnknownAggregateError(QueryError):
    pass


class DurationError(QueryError):
    pass


@dataclass(frozen=True)
class ContinuousQuery:
    period: float
    aggregate: AggregateKind
    attribute: str
    window: WindowSpec
    historic_source: str
    live_source: str

    def __post_init__(self):
        if not self.period > 0:
            raise StreamError(f"period must be > 0, got {self.period}")
        if not self.attribute:
            raise StreamError("attribute must be nonempty")

    def register(self, at: float) -> "ContinuousQuery":
        """Pin a landmark origin at registration time; other windows are unchanged."""
        return replace(self, window=self.window.anchored(at))


class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.toks = [(m.group(), m.start()) for m in re.finditer(r"\S+", text)]
        self.i = 0

    @property
    def pos(self) -> int:
        return self.toks[self.i][1] if self.i < len(self.toks) else len(self.text)

    def peek(self, k: int = 0) -> str | None:
        j = self.i + k
        return self.toks[j][0] if j < len(self.toks) else None

    def take(self, what: str) -> tuple[str, int]:
        if self.i >= len(self.toks):
            raise QuerySyntaxError(f"expected {what}, found end of query", len(self.text))
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, *words: str):
        for w in words:
            tok, pos = self.take(repr(w))
            if tok != w:
                raise QuerySyntaxError(f"expected {w!r}, found {tok!r}", pos)

    def duration(self) -> float:
        tok, pos = self.take("a number")
        try:
            n = float(tok)
        except ValueError:
            raise QuerySyntaxError(f"expected a number, found {tok!r}", pos) from None
        unit, upos = self.take("a time unit")
        if unit not in UNITS:
            raise QuerySyntaxError(f"unknown time unit {unit!r}", upos)
        if not (n > 0 and math.isfinite(n)):
            raise DurationError(f"duration must be positive, got {tok} {unit}", pos)
        return n * UNITS[unit]


def parse_query(text: str) -> ContinuousQuery:
    tk = _Tokens(text)
    tk.expect("EVERY")
    period = tk.duration()
    tk.expect("compute", "the")
    agg_tok, agg_pos = tk.take("an aggregate")
    try:
        agg = AggregateKind(agg_tok)
    except ValueError:
        raise UnknownAggregateError(f"unknown aggregate {agg_tok!r}", agg_pos) from None
    if tk.peek() == "value":
        tk.take("value")
    tk.expect("of")
    if tk.peek() == "the" and tk.peek(1) not in (None, "of", "starting", "FROM"):
        tk.take("the")
    attr, _ = tk.take("an attribute name")
    if tk.peek() == "starting":
        tk.take("starting")
        window = WindowSpec(WindowKind.LANDMARK, tk.duration())
        tk.expect("ago")
    else:
        tk.expect("of", "the", "last")
        window = WindowSpec(WindowKind.SLIDING, tk.duration(), slide=period)
    tk.expect("FROM")
    store_start = tk.i
    while tk.peek() is not None and not (tk.peek() == "and" and tk.peek(1) == "streaming"):
        tk.i += 1
    store_ref = " ".join(t for t, _ in tk.toks[store_start:tk.i])
    if not store_ref:
        raise QuerySyntaxError("expected a store reference after FROM", tk.pos)
    tk.expect("and", "streaming")
    stream_ref = " ".join(t for t, _ in tk.toks[tk.i:])
    if not stream_ref:
        raise QuerySyntaxError("expected a stream reference after 'and streaming'", tk.pos)
    return ContinuousQuery(period, agg, attr, window, store_ref, stream_ref)


def _render_duration(seconds: float) -> str:
    for unit, mult in _RENDER_UNITS:
        n = seconds / mult
        if n >= 1 and n == int(n):
            n = int(n)
            return f"{n} {unit}" if n == 1 else f"{n} {unit}s"
    return f"{seconds!r} seconds"


def render_query(q: ContinuousQuery) -> str:
    """Canonical text; ``parse_query(render_query(q)) == q`` for parsed queries."""
    if q.window.kind is WindowKind.LANDMARK:
        win = f"starting {_render_duration(q.window.width)} ago"
    elif q.window.kind is WindowKind.SLIDING and q.window.slide == q.period:
        win = f"of the last {_render_duration(q.window.width)}"
    else:
        raise StreamError(f"{q.window} has no textual form")
    return (
        f"EVERY {_render_duration(q.period)} compute the {q.aggregate.value} value of "
        f"{q.attribute} {win} FROM {q.historic_source} and streaming {q.live_source}"
    )


def merge_sources(*sources) -> list[StreamTuple]:
    """Union of tuple lists in time order, keeping one copy of exact duplicates."""
    seen = {}
    for src in sources:
        for t in src:
            seen.setdefault(t.key(), t)
    return sorted(seen.values(), key=lambda t: t.timestamp)


def evaluate(
    query: ContinuousQuery, store: HistoricStore, live: BoundedBuffer, now: float
) -> StreamTuple:
    """Aggregate stored history and buffered live tuples over the query window.

    A landmark window that was never registered is anchored at ``now``.
    """
    bounds = window_bounds(query.window.anchored(now), now)
    tuples = merge_sources(store.range_query(bounds), live.in_range(bounds))
    value = aggregate(tuples, query.attribute, query.aggregate)
    return StreamTuple(now, {"value": value})
