"""Discrete-event simulation of DAG jobs on a two-tier pool.

Events are totally ordered by ``(time, kind, job, task, pe)`` with
arrivals before transfer completions before task completions. Ready tasks
are dispatched once every event at the current instant has been applied,
so a scheduler always sees the complete ready set for that instant.
"""

from __future__ import annotations

import bisect
import enum
import heapq
import io
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

from .platform import Contention, LinkModel, ResourcePool, Tier, transfer_time
from .schedulers import (
    CommMode,
    PeState,
    ReadyTask,
    SchedulerContext,
    SchedulerKind,
    SchedulingDecision,
)
from .workload import JobSubmission, WorkloadDag, validate_dag


class SimulationError(ValueError):
    pass


class EventKind(enum.IntEnum):
    JOB_ARRIVAL = 0
    TRANSFER_FINISH = 1
    TASK_FINISH = 2


@dataclass(frozen=True, order=True)
class SimEvent:
    time: float
    kind: EventKind
    job: int
    task: int = -1
    pe: int = -1


@dataclass(frozen=True)
class ScheduleRecord:
    job: int
    task: int
    pe: int
    kind: str
    ready_at: float
    transfer_start: float
    exec_start: float
    finish: float
    transferred_volume: float
    returned_volume: float = 0.0
    delivered_at: float = 0.0  # finish, or the end of the result-return transfer

    @property
    def exec_time(self) -> float:
        return self.finish - self.exec_start


@dataclass(frozen=True)
class Timeline:
    records: tuple[ScheduleRecord, ...]
    pool_label: str
    scheduler: str
    submission: JobSubmission
    first_arrival: float = 0.0

    def __len__(self):
        return len(self.records)

    def to_text(self) -> str:
        """One CSV line per record, sorted by (finish, job, task)."""
        out = io.StringIO()
        out.write(
            "job,task,pe,kind,transfer_start,exec_start,finish,transferred_mb,"
            "returned_mb,delivered\n"
        )
        for r in sorted(self.records, key=lambda r: (r.finish, r.job, r.task)):
            out.write(
                f"{r.job},{r.task},{r.pe},{r.kind},{r.transfer_start!r},{r.exec_start!r},"
                f"{r.finish!r},{r.transferred_volume!r},{r.returned_volume!r},"
                f"{r.delivered_at!r}\n"
            )
        return out.getvalue()


def makespan(timeline: Timeline) -> float:
    if not timeline.records:
        raise SimulationError("empty timeline has no makespan")
    return max(r.delivered_at for r in timeline.records) - timeline.first_arrival


@dataclass
class Simulation:
    """Mutable run state; build one per run and call :meth:`run`."""

    dag: WorkloadDag
    submission: JobSubmission
    pool: ResourcePool
    scheduler: SchedulerKind
    link: LinkModel = field(default_factory=LinkModel)
    comm_mode: CommMode = CommMode.LOCATION
    result_return: bool = True
    on_decision: Optional[Callable[[SchedulerContext, SchedulingDecision], None]] = None

    def __post_init__(self):
        self.scheduler = SchedulerKind.parse(self.scheduler)
        self.comm_mode = CommMode.parse(self.comm_mode)
        report = validate_dag(self.dag)
        if report:
            raise SimulationError("invalid DAG: " + "; ".join(map(str, report)))
        if not self.pool.instances:
            raise SimulationError("empty pool")
        for kind in self.pool.kinds:
            missing = [t.id for t in self.dag.tasks if kind.name not in t.exec_profile]
            if missing:
                raise SimulationError(
                    f"tasks {missing} have no execution time for pool kind {kind.name!r}"
                )
        self.clock = 0.0
        self.pending: list[SimEvent] = []
        self.ready: list[ReadyTask] = []
        self.pe_available = [0.0] * len(self.pool.instances)
        self.locations: dict[tuple[int, int], Tier] = {}
        self.remaining_preds: dict[tuple[int, int], int] = {}
        self.link_free_at = 0.0
        self.rr_cursor = 0
        self.records: dict[tuple[int, int], ScheduleRecord] = {}
        self._pe_index = {pe.id: i for i, pe in enumerate(self.pool.instances)}
        for job, t in enumerate(self.submission.arrival_times()):
            heapq.heappush(self.pending, SimEvent(t, EventKind.JOB_ARRIVAL, job))

    def context(self) -> SchedulerContext:
        return SchedulerContext(
            clock=self.clock,
            ready=tuple(self.ready),
            pe_states=tuple(
                PeState(pe.id, a) for pe, a in zip(self.pool.instances, self.pe_available)
            ),
            pool=self.pool,
            dag=self.dag,
            data_locations=self.locations,
            link=self.link,
            comm_mode=self.comm_mode,
            link_free_at=self.link_free_at,
            rr_cursor=self.rr_cursor,
        )

    def _make_ready(self, job: int, task: int):
        bisect.insort(self.ready, ReadyTask(self.clock, job, task))

    def _reserve_link(self, start: float, volume: float) -> tuple[float, float]:
        if self.link.contention is Contention.SERIALIZED:
            start = max(start, self.link_free_at)
        end = start + transfer_time(volume, self.link)
        if self.link.contention is Contention.SERIALIZED:
            self.link_free_at = end
        return start, end

    def advance(self, event: SimEvent):
        """Apply one event; dispatch if it is the last one at this instant."""
        if event.time < self.clock:
            raise SimulationError(f"event {event} is in the past (clock={self.clock})")
        self.clock = event.time
        if event.kind is EventKind.JOB_ARRIVAL:
            for tid in self.dag.task_ids:
                n = len(self.dag.predecessors.get(tid, ()))
                self.remaining_preds[(event.job, tid)] = n
                if n == 0:
                    self._make_ready(event.job, tid)
        elif event.kind is EventKind.TASK_FINISH:
            self._finish_task(event)
        if not self.pending or self.pending[0].time > self.clock:
            self.dispatch()

    def _finish_task(self, event: SimEvent):
        job, task = event.job, event.task
        tier = self.pool.instances[self._pe_index[event.pe]].tier
        self.locations[(job, task)] = tier
        for s in sorted(self.dag.successors.get(task, ())):
            self.remaining_preds[(job, s)] -= 1
            if self.remaining_preds[(job, s)] == 0:
                self._make_ready(job, s)
        out = self.dag.by_id[task].output_volume
        if (
            self.result_return
            and self.comm_mode is CommMode.LOCATION
            and tier is Tier.BACKEND
            and not self.dag.successors.get(task)
            and out > 0
        ):
            _, end = self._reserve_link(self.clock, out)
            rec = self.records[(job, task)]
            self.records[(job, task)] = replace(rec, returned_volume=out, delivered_at=end)
            heapq.heappush(
                self.pending, SimEvent(end, EventKind.TRANSFER_FINISH, job, task, event.pe)
            )

    def dispatch(self):
        while self.ready:
            ctx = self.context()
            decision = self.scheduler.select(ctx)
            if self.on_decision is not None:
                self.on_decision(ctx, decision)
            self._apply(decision)
            if self.scheduler is SchedulerKind.RR:
                self.rr_cursor = (self.rr_cursor + 1) % len(self.pool.instances)

    def _apply(self, d: SchedulingDecision):
        idx = next(i for i, r in enumerate(self.ready) if (r.job, r.task) == (d.job, d.task))
        ready = self.ready.pop(idx)
        pe_i = self._pe_index[d.pe]
        if d.volume > 0 and self.link.contention is Contention.SERIALIZED:
            self.link_free_at = d.predicted_start
        self.pe_available[pe_i] = d.predicted_finish
        self.records[(d.job, d.task)] = ScheduleRecord(
            job=d.job,
            task=d.task,
            pe=d.pe,
            kind=self.pool.instances[pe_i].kind.name,
            ready_at=ready.ready_time,
            transfer_start=d.transfer_start,
            exec_start=d.predicted_start,
            finish=d.predicted_finish,
            transferred_volume=d.volume,
            delivered_at=d.predicted_finish,
        )
        heapq.heappush(
            self.pending, SimEvent(d.predicted_finish, EventKind.TASK_FINISH, d.job, d.task, d.pe)
        )

    def run(self) -> Timeline:
        while self.pending:
            self.advance(heapq.heappop(self.pending))
        expected = self.submission.instances * len(self.dag.tasks)
        if len(self.records) != expected:
            raise SimulationError(f"run ended with {len(self.records)}/{expected} tasks placed")
        arrivals = self.submission.arrival_times()
        return Timeline(
            records=tuple(self.records.values()),
            pool_label=self.pool.label,
            scheduler=self.scheduler.value,
            submission=self.submission,
            first_arrival=min(arrivals),
        )


def run_simulation(
    dag: WorkloadDag,
    submission: JobSubmission,
    pool: ResourcePool,
    scheduler: SchedulerKind | str = SchedulerKind.EFT,
    link: LinkModel | None = None,
    *,
    comm_mode: CommMode | str = CommMode.LOCATION,
    result_return: bool = True,
    on_decision=None,
) -> Timeline:
    sim = Simulation(
        dag,
        submission,
        pool,
        scheduler,
        link or LinkModel(),
        comm_mode,
        result_return,
        on_decision,
    )
    return sim.run()
