"""Windowed stream operators over a file-backed history plus a live buffer."""

from .model import (
    AggregateKind,
    EmptyWindowError,
    Interval,
    StreamError,
    StreamTuple,
    WindowKind,
    WindowSpec,
    aggregate,
    window_bounds,
)
from .query import (
    ContinuousQuery,
    DurationError,
    QueryError,
    QuerySyntaxError,
    UnknownAggregateError,
    evaluate,
    merge_sources,
    parse_query,
    render_query,
)
from .store import BoundedBuffer, HistoricStore, OutOfOrderError, buffer_push

__all__ = [
    "AggregateKind",
    "BoundedBuffer",
    "ContinuousQuery",
    "DurationError",
    "EmptyWindowError",
    "HistoricStore",
    "Interval",
    "OutOfOrderError",
    "QueryError",
    "QuerySyntaxError",
    "StreamError",
    "StreamTuple",
    "UnknownAggregateError",
    "WindowKind",
    "WindowSpec",
    "aggregate",
    "buffer_push",
    "evaluate",
    "merge_sources",
    "parse_query",
    "render_query",
    "window_bounds",
]
