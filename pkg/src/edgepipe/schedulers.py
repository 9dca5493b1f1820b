"""EFT, ETF and round-robin placement policies.

Every policy is a pure function of a :class:`SchedulerContext`. The engine
applies the returned decision verbatim, so the predicted times of a decision
are exactly the times that end up in the timeline.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Mapping, NamedTuple

from .platform import Contention, LinkModel, ResourcePool, Tier, crossing_volume
from .workload import WorkloadDag


class CommMode(str, enum.Enum):
    # transfer only what crosses tiers, tracking where each output lives
    LOCATION = "location"
    # backend tasks pay for all their inputs and their output; frontend pays nothing
    STATIC = "static"

    @classmethod
    def parse(cls, token: str) -> "CommMode":
        if isinstance(token, cls):
            return token
        try:
            return cls(str(token).lower())
        except ValueError:
            raise ValueError(f"unknown comm mode {token!r} (expected location|static)") from None


class ReadyTask(NamedTuple):
    ready_time: float
    job: int
    task: int


@dataclass(frozen=True)
class PeState:
    pe: int
    available_at: float


@dataclass(frozen=True)
class SchedulerContext:
    clock: float
    ready: tuple[ReadyTask, ...]  # sorted by (ready_time, job, task)
    pe_states: tuple[PeState, ...]  # same order as pool.instances
    pool: ResourcePool
    dag: WorkloadDag
    data_locations: Mapping[tuple[int, int], Tier]
    link: LinkModel
    comm_mode: CommMode = CommMode.LOCATION
    link_free_at: float = 0.0
    rr_cursor: int = 0


@dataclass(frozen=True)
class SchedulingDecision:
    job: int
    task: int
    pe: int
    predicted_start: float
    predicted_finish: float
    transfer_start: float
    volume: float  # megabits moved over the link before execution


def input_volume(ctx: SchedulerContext, job: int, task: int, pe_index: int) -> float:
    """Megabits that must cross the link before ``task`` can run on that PE."""
    dag = ctx.dag
    tier = ctx.pool.instances[pe_index].tier
    spec = dag.by_id[task]
    in_edges = dag.in_edges.get(task, ())
    if ctx.comm_mode is CommMode.STATIC:
        if tier is Tier.FRONTEND:
            return 0.0
        vol = sum(e.volume for e in in_edges) + spec.output_volume
        if not in_edges:
            vol += dag.raw_input_volume
        return vol
    if not in_edges:
        # raw sensor data sits at the edge
        return crossing_volume(Tier.FRONTEND, tier, dag.raw_input_volume)
    return sum(
        crossing_volume(ctx.data_locations[(job, e.src)], tier, e.volume) for e in in_edges
    )


def predict(ctx: SchedulerContext, job: int, task: int, pe_index: int) -> SchedulingDecision:
    pe = ctx.pool.instances[pe_index]
    volume = input_volume(ctx, job, task, pe_index)
    start = max(ctx.clock, ctx.pe_states[pe_index].available_at)
    if volume > 0 and ctx.link.contention is Contention.SERIALIZED:
        start = max(start, ctx.link_free_at)
    exec_start = start + volume / ctx.link.rate
    finish = exec_start + ctx.dag.by_id[task].exec_time(pe.kind.name)
    return SchedulingDecision(job, task, pe.id, exec_start, finish, start, volume)


def select_eft(ctx: SchedulerContext) -> SchedulingDecision:
    """Head ready task onto the PE with the earliest predicted finish."""
    head = ctx.ready[0]
    best = None
    for i in range(len(ctx.pool.instances)):
        d = predict(ctx, head.job, head.task, i)
        if best is None or (d.predicted_finish, d.pe) < (best.predicted_finish, best.pe):
            best = d
    return best


def select_etf(ctx: SchedulerContext) -> SchedulingDecision:
    """The (ready task, PE) pair that can start earliest.

    Ties go to the smaller predicted finish, then job id, task id, PE id.
    """
    best = None
    best_key = None
    for r in ctx.ready:
        for i in range(len(ctx.pool.instances)):
            d = predict(ctx, r.job, r.task, i)
            key = (d.predicted_start, d.predicted_finish, d.job, d.task, d.pe)
            if best_key is None or key < best_key:
                best, best_key = d, key
    return best


def select_rr(ctx: SchedulerContext) -> SchedulingDecision:
    head = ctx.ready[0]
    return predict(ctx, head.job, head.task, ctx.rr_cursor % len(ctx.pool.instances))


class SchedulerKind(str, enum.Enum):
    EFT = "EFT"
    ETF = "ETF"
    RR = "RR"

    @classmethod
    def parse(cls, token: str) -> "SchedulerKind":
        if isinstance(token, cls):
            return token
        try:
            return cls(str(token).upper())
        except ValueError:
            raise ValueError(f"unknown scheduler {token!r} (expected eft|etf|rr)") from None

    @property
    def select(self) -> Callable[[SchedulerContext], SchedulingDecision]:
        return _POLICIES[self]


_POLICIES = {
    SchedulerKind.EFT: select_eft,
    SchedulerKind.ETF: select_etf,
    SchedulerKind.RR: select_rr,
}
