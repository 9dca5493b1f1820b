"""Timestamped tuples, window specifications and aggregates."""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass
from numbers import Real
from typing import Iterable, Mapping, Optional, Union

Atomic = Union[int, float, str]


class StreamError(ValueError):
    pass


class EmptyWindowError(StreamError):
    """No tuples fell inside the window."""


@dataclass(frozen=True)
class StreamTuple:
    timestamp: float
    attributes: Mapping[str, Atomic]

    def __post_init__(self):
        if self.timestamp is None:
            raise StreamError("tuple needs a timestamp")
        object.__setattr__(self, "timestamp", float(self.timestamp))
        for name, value in self.attributes.items():
            if not name:
                raise StreamError("attribute names must be nonempty")
            if isinstance(value, bool) or not isinstance(value, (int, float, str)):
                raise StreamError(f"attribute {name!r} is not atomic: {value!r}")

    def __getitem__(self, name: str) -> Atomic:
        return self.attributes[name]

    def key(self) -> tuple:
        """Full-tuple identity used to drop duplicates when merging sources."""
        return (self.timestamp, tuple(sorted(self.attributes.items())))

    def to_line(self) -> str:
        parts = []
        for name, value in self.attributes.items():
            text = repr(value) if isinstance(value, float) else str(value)
            if any(c in name for c in ",;=\n") or any(c in text for c in ";=\n"):
                raise StreamError(f"attribute {name}={text!r} cannot be stored in a line")
            parts.append(f"{name}={text}")
        return f"{self.timestamp!r}," + ";".join(parts)

    @classmethod
    def from_line(cls, line: str) -> "StreamTuple":
        ts, _, rest = line.rstrip("\n").partition(",")
        attrs: dict[str, Atomic] = {}
        if rest:
            for part in rest.split(";"):
                name, sep, text = part.partition("=")
                if not sep:
                    raise StreamError(f"malformed attribute {part!r}")
                attrs[name] = _parse_atomic(text)
        try:
            return cls(float(ts), attrs)
        except ValueError:
            raise StreamError(f"malformed timestamp {ts!r}") from None


_INT = re.compile(r"[-+]?\d+\Z")


def _parse_atomic(text: str) -> Atomic:
    if _INT.match(text):
        return int(text)
    try:
        return float(text)
    except ValueError:
        return text


class WindowKind(str, enum.Enum):
    TUMBLING = "tumbling"
    SLIDING = "sliding"
    LANDMARK = "landmark"


@dataclass(frozen=True)
class WindowSpec:
    """Window shape.

    For landmark windows ``width`` holds the look-back used to anchor the
    origin when a query is registered; ``origin`` stays ``None`` until then.
    """

    kind: WindowKind
    width: float = 0.0
    slide: Optional[float] = None
    origin: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", WindowKind(self.kind))
        if self.kind is not WindowKind.LANDMARK and not self.width > 0:
            raise StreamError(f"window width must be > 0, got {self.width}")
        if self.kind is WindowKind.SLIDING:
            if self.slide is None:
                object.__setattr__(self, "slide", self.width)
            elif not self.slide > 0:
                raise StreamError(f"slide must be > 0, got {self.slide}")
        if self.kind is WindowKind.TUMBLING and self.origin is None:
            object.__setattr__(self, "origin", 0.0)

    def anchored(self, at: float) -> "WindowSpec":
        """Fix a landmark origin ``width`` seconds before ``at``."""
        if self.kind is not WindowKind.LANDMARK or self.origin is not None:
            return self
        return WindowSpec(self.kind, self.width, self.slide, at - self.width)


@dataclass(frozen=True)
class Interval:
    start: float
    end: float
    end_closed: bool = True

    def __contains__(self, ts: float) -> bool:
        if ts < self.start:
            return False
        return ts <= self.end if self.end_closed else ts < self.end


def window_bounds(spec: WindowSpec, now: float) -> Interval:
    if spec.kind is WindowKind.SLIDING:
        return Interval(now - spec.width, now)
    if spec.kind is WindowKind.LANDMARK:
        if spec.origin is None:
            raise StreamError("landmark window has no origin; anchor it first")
        if now < spec.origin:
            raise StreamError(f"now={now} precedes landmark origin {spec.origin}")
        return Interval(spec.origin, now)
    k = math.floor((now - spec.origin) / spec.width) - 1
    start = spec.origin + k * spec.width
    if k < 0:
        raise EmptyWindowError(f"no tumbling window has completed by {now}")
    return Interval(start, start + spec.width, end_closed=False)


class AggregateKind(str, enum.Enum):
    MIN = "min"
    MAX = "max"
    MEAN = "mean"
    COUNT = "count"


def aggregate(tuples: Iterable[StreamTuple], attribute: str, kind: AggregateKind) -> Atomic:
    kind = AggregateKind(kind)
    tuples = list(tuples)
    if kind is AggregateKind.COUNT:
        return len(tuples)
    if not tuples:
        raise EmptyWindowError(f"no data in window for {kind.value}({attribute})")
    values = []
    for t in tuples:
        v = t.attributes.get(attribute)
        if isinstance(v, bool) or not isinstance(v, Real):
            raise StreamError(f"attribute {attribute!r} at {t.timestamp} is not numeric: {v!r}")
        values.append(v)
    if kind is AggregateKind.MIN:
        return min(values)
    if kind is AggregateKind.MAX:
        return max(values)
    return _exact_mean(values)


def _exact_mean(values: list) -> float:
    """Correctly rounded mean: exact integer sum, one rounding in the division."""
    ratios = [v.as_integer_ratio() for v in values]
    shift = max(d for _, d in ratios).bit_length() - 1  # denominators are powers of two
    total = sum(n << (shift - (d.bit_length() - 1)) for n, d in ratios)
    return total / (len(values) << shift)
