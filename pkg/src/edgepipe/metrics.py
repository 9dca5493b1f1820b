"""Makespan and utilization summaries of a finished timeline."""

from __future__ import annotations

from dataclasses import dataclass

from .engine import Timeline, makespan
from .platform import ResourcePool


class MetricsError(ValueError):
    pass


@dataclass(frozen=True)
class UtilizationReport:
    busy: dict[int, float]  # PE id -> seconds spent executing
    fraction: dict[int, float]  # PE id -> busy / makespan
    mean_utilization: float


@dataclass(frozen=True)
class RunSummary:
    pool: str
    scheduler: str
    instances: int
    makespan: float
    mean_utilization: float


def utilization(timeline: Timeline, pool: ResourcePool) -> UtilizationReport:
    """Per-PE busy fraction over the batch makespan.

    Only execution intervals count; transfers keep the link busy, not the PE.
    PEs that never received work contribute 0 to the mean.
    """
    span = makespan(timeline)
    if span <= 0:
        raise MetricsError("zero makespan")
    busy = {pe.id: 0.0 for pe in pool}
    for r in timeline.records:
        if r.pe not in busy:
            raise MetricsError(f"timeline uses PE {r.pe} which is not in the pool")
        busy[r.pe] += r.finish - r.exec_start
    fraction = {pid: b / span for pid, b in busy.items()}
    return UtilizationReport(busy, fraction, sum(fraction.values()) / len(fraction))


def summarize(timeline: Timeline, pool: ResourcePool) -> RunSummary:
    return RunSummary(
        pool=timeline.pool_label,
        scheduler=timeline.scheduler,
        instances=timeline.submission.instances,
        makespan=makespan(timeline),
        mean_utilization=utilization(timeline, pool).mean_utilization,
    )
