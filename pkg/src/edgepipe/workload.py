"""Pipeline DAGs: task/edge model, workload files, validation and readiness."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from importlib import resources
from typing import Iterable, Mapping

DEFAULT_RAW_INPUT_MB = 400.0


class WorkloadError(ValueError):
    """Raised when a workload document or DAG cannot be accepted."""


@dataclass(frozen=True)
class TaskSpec:
    id: int
    name: str
    exec_profile: Mapping[str, float]  # PE kind -> seconds
    output_volume: float = 0.0  # megabits

    def exec_time(self, kind: str) -> float:
        try:
            return self.exec_profile[kind]
        except KeyError:
            raise WorkloadError(
                f"task {self.id} ({self.name}) has no execution time for PE kind {kind!r}"
            ) from None


@dataclass(frozen=True)
class DagEdge:
    src: int
    dst: int
    volume: float  # megabits


@dataclass(frozen=True)
class Violation:
    """One broken DAG invariant; ``subject`` names the offending task or edge."""

    rule: str
    subject: str

    def __str__(self) -> str:
        return f"{self.rule}: {self.subject}"


@dataclass(frozen=True)
class WorkloadDag:
    tasks: tuple[TaskSpec, ...]
    edges: tuple[DagEdge, ...]
    raw_input_volume: float = DEFAULT_RAW_INPUT_MB

    def __post_init__(self):
        object.__setattr__(self, "tasks", tuple(self.tasks))
        object.__setattr__(self, "edges", tuple(self.edges))

    @cached_property
    def by_id(self) -> dict[int, TaskSpec]:
        return {t.id: t for t in self.tasks}

    @cached_property
    def in_edges(self) -> dict[int, tuple[DagEdge, ...]]:
        acc: dict[int, list[DagEdge]] = {t.id: [] for t in self.tasks}
        for e in self.edges:
            acc.setdefault(e.dst, []).append(e)
        return {k: tuple(v) for k, v in acc.items()}

    @cached_property
    def out_edges(self) -> dict[int, tuple[DagEdge, ...]]:
        acc: dict[int, list[DagEdge]] = {t.id: [] for t in self.tasks}
        for e in self.edges:
            acc.setdefault(e.src, []).append(e)
        return {k: tuple(v) for k, v in acc.items()}

    @cached_property
    def predecessors(self) -> dict[int, frozenset[int]]:
        return {k: frozenset(e.src for e in v) for k, v in self.in_edges.items()}

    @cached_property
    def successors(self) -> dict[int, frozenset[int]]:
        return {k: frozenset(e.dst for e in v) for k, v in self.out_edges.items()}

    @property
    def task_ids(self) -> list[int]:
        return [t.id for t in self.tasks]

    @cached_property
    def entry_tasks(self) -> tuple[int, ...]:
        return tuple(t.id for t in self.tasks if not self.in_edges.get(t.id))

    @cached_property
    def exit_tasks(self) -> tuple[int, ...]:
        return tuple(t.id for t in self.tasks if not self.out_edges.get(t.id))

    def topological_order(self) -> list[int]:
        """Kahn's algorithm, lowest id first among available tasks."""
        indeg = {tid: len(self.predecessors.get(tid, ())) for tid in self.task_ids}
        frontier = sorted(tid for tid, d in indeg.items() if d == 0)
        order = []
        while frontier:
            tid = frontier.pop(0)
            order.append(tid)
            for s in sorted(self.successors.get(tid, ())):
                indeg[s] -= 1
                if indeg[s] == 0:
                    frontier.append(s)
            frontier.sort()
        if len(order) != len(indeg):
            raise WorkloadError("graph contains a cycle")
        return order


@dataclass(frozen=True)
class JobSubmission:
    instances: int = 1
    inter_arrival_delay: float = 0.0

    def __post_init__(self):
        if self.instances < 1:
            raise WorkloadError(f"instances must be >= 1, got {self.instances}")
        if self.inter_arrival_delay < 0:
            raise WorkloadError(
                f"inter-arrival delay must be >= 0, got {self.inter_arrival_delay}"
            )

    def arrival_times(self) -> list[float]:
        return [j * self.inter_arrival_delay for j in range(self.instances)]


def _find_cycle(dag: WorkloadDag) -> list[int] | None:
    ids = set(dag.task_ids)
    succ: dict[int, list[int]] = {tid: [] for tid in ids}
    for e in dag.edges:
        if e.src in ids and e.dst in ids:
            succ[e.src].append(e.dst)
    color = dict.fromkeys(ids, 0)
    for root in sorted(ids):
        if color[root]:
            continue
        stack = [(root, iter(sorted(succ[root])))]
        path = [root]
        color[root] = 1
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                path.pop()
                color[node] = 2
            elif color[nxt] == 1:
                return path[path.index(nxt):] + [nxt]
            elif color[nxt] == 0:
                color[nxt] = 1
                path.append(nxt)
                stack.append((nxt, iter(sorted(succ[nxt]))))
    return None


def validate_dag(dag: WorkloadDag) -> list[Violation]:
    """Check every DAG invariant and report the violations found.

    Never raises; an empty list means the DAG is valid. Whether each task
    covers the PE kinds of a particular pool is checked by the engine.
    """
    report: list[Violation] = []
    seen: set[int] = set()
    for t in dag.tasks:
        if t.id in seen:
            report.append(Violation("duplicate task id", f"task {t.id}"))
        seen.add(t.id)
        if not isinstance(t.id, int) or t.id < 0:
            report.append(Violation("task id must be a non-negative integer", f"task {t.id}"))
        if not t.exec_profile:
            report.append(Violation("empty execution profile", f"task {t.id}"))
        for kind, secs in t.exec_profile.items():
            if not kind:
                report.append(Violation("empty PE kind name", f"task {t.id}"))
            if not secs > 0:
                report.append(
                    Violation("execution time must be > 0", f"task {t.id} kind {kind}")
                )
        if t.output_volume < 0:
            report.append(Violation("output volume must be >= 0", f"task {t.id}"))
    for e in dag.edges:
        label = f"edge {e.src}->{e.dst}"
        if e.src == e.dst:
            report.append(Violation("self loop", label))
        for end in (e.src, e.dst):
            if end not in seen:
                report.append(Violation("dangling edge endpoint", f"{label} (task {end})"))
        if e.volume < 0:
            report.append(Violation("edge volume must be >= 0", label))
    if dag.raw_input_volume < 0:
        report.append(Violation("raw input volume must be >= 0", "workload"))
    if not dag.tasks:
        report.append(Violation("no tasks", "workload"))
    else:
        cycle = _find_cycle(dag)
        if cycle:
            report.append(Violation("cycle", " -> ".join(map(str, cycle))))
        elif not dag.entry_tasks or not dag.exit_tasks:
            report.append(Violation("missing entry or exit task", "workload"))
    return report


def ready_tasks(dag: WorkloadDag, completed: Iterable[int]) -> set[int]:
    """Tasks not yet completed whose predecessors have all completed."""
    done = set(completed)
    unknown = done - set(dag.task_ids)
    if unknown:
        raise WorkloadError(f"unknown task ids in completed set: {sorted(unknown)}")
    return {
        tid
        for tid in dag.task_ids
        if tid not in done and dag.predecessors.get(tid, frozenset()) <= done
    }


def _require(obj, key, where):
    try:
        return obj[key]
    except (KeyError, TypeError):
        raise WorkloadError(f"{where}: missing required key {key!r}") from None


def workload_from_dict(doc: Mapping) -> WorkloadDag:
    if not isinstance(doc, Mapping):
        raise WorkloadError("workload document must be an object")
    tasks = []
    for i, raw in enumerate(_require(doc, "tasks", "workload")):
        where = f"tasks[{i}]"
        profile = _require(raw, "exec_s", where)
        if not isinstance(profile, Mapping):
            raise WorkloadError(f"{where}: exec_s must be an object")
        try:
            tasks.append(
                TaskSpec(
                    id=int(_require(raw, "id", where)),
                    name=str(raw.get("name", "")),
                    exec_profile={str(k): float(v) for k, v in profile.items()},
                    output_volume=float(raw.get("out_mb", 0.0)),
                )
            )
        except (TypeError, ValueError) as exc:
            raise WorkloadError(f"{where}: {exc}") from None
    edges = []
    for i, raw in enumerate(doc.get("edges", [])):
        where = f"edges[{i}]"
        try:
            edges.append(
                DagEdge(
                    int(_require(raw, "src", where)),
                    int(_require(raw, "dst", where)),
                    float(raw.get("mb", 0.0)),
                )
            )
        except (TypeError, ValueError) as exc:
            raise WorkloadError(f"{where}: {exc}") from None
    dag = WorkloadDag(
        tuple(tasks), tuple(edges), float(doc.get("raw_input_mb", DEFAULT_RAW_INPUT_MB))
    )
    report = validate_dag(dag)
    if report:
        raise WorkloadError("invalid workload: " + "; ".join(map(str, report)))
    return dag


def parse_workload(text: str) -> WorkloadDag:
    """Parse and validate a JSON workload document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise WorkloadError(f"malformed workload document: {exc}") from None
    return workload_from_dict(doc)


def workload_to_dict(dag: WorkloadDag) -> dict:
    return {
        "tasks": [
            {"id": t.id, "name": t.name, "exec_s": dict(t.exec_profile), "out_mb": t.output_volume}
            for t in dag.tasks
        ],
        "edges": [{"src": e.src, "dst": e.dst, "mb": e.volume} for e in dag.edges],
        "raw_input_mb": dag.raw_input_volume,
    }


def serialize_workload(dag: WorkloadDag) -> str:
    return json.dumps(workload_to_dict(dag), indent=2)


def load_workload(path) -> WorkloadDag:
    with open(path, encoding="utf-8") as fh:
        return parse_workload(fh.read())


def canonical_ds_workload() -> WorkloadDag:
    """The shipped 16-task data-science pipeline used by the experiments."""
    text = resources.files("edgepipe.data").joinpath("ds_workload.json").read_text("utf-8")
    return parse_workload(text)
