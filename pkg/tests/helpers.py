"""Random case generators and independent reference implementations for the tests.

Nothing here calls the scheduler or engine internals; the oracles recompute
volumes and timings from first principles so they can disagree with the code.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

from edgepipe.platform import Contention, LinkModel, PeInstance, PeKind, ResourcePool, Tier
from edgepipe.schedulers import CommMode
from edgepipe.streamops import (
    AggregateKind,
    BoundedBuffer,
    ContinuousQuery,
    EmptyWindowError,
    HistoricStore,
    StreamTuple,
    WindowKind,
    WindowSpec,
    evaluate,
)
from edgepipe.workload import DagEdge, JobSubmission, TaskSpec, WorkloadDag

FE_A = PeKind("fe-a", Tier.FRONTEND)
FE_B = PeKind("fe-b", Tier.FRONTEND)
BE_A = PeKind("be-a", Tier.BACKEND)
BE_B = PeKind("be-b", Tier.BACKEND)
KINDS = (FE_A, FE_B, BE_A, BE_B)


def make_dag(exec_times, edges=(), out=None, raw=0.0) -> WorkloadDag:
    """``exec_times[i]`` is a number (same on every kind) or a kind-name mapping."""
    tasks = []
    for i, ex in enumerate(exec_times):
        prof = dict(ex) if isinstance(ex, dict) else {k.name: float(ex) for k in KINDS}
        o = 0.0 if out is None else float(out[i])
        tasks.append(TaskSpec(i, f"t{i}", prof, o))
    return WorkloadDag(
        tuple(tasks), tuple(DagEdge(a, b, float(v)) for a, b, v in edges), float(raw)
    )


def make_pool(kinds, label="test") -> ResourcePool:
    return ResourcePool(tuple(PeInstance(i, k) for i, k in enumerate(kinds)), label)


@dataclass
class Case:
    dag: WorkloadDag
    pool: ResourcePool
    link: LinkModel
    submission: JobSubmission
    comm_mode: CommMode
    result_return: bool

    def kwargs(self) -> dict:
        return dict(comm_mode=self.comm_mode, result_return=self.result_return)


def random_dag(rng: random.Random, max_tasks: int = 8) -> WorkloadDag:
    n = rng.randint(1, max_tasks)
    density = rng.choice((0.2, 0.4, 0.7))
    # half-second grid makes ties common, which exercises the tie rules
    exec_times = [{k.name: rng.randint(1, 16) / 2 for k in KINDS} for _ in range(n)]
    edges = [
        (a, b, rng.choice((0, 1, 3, 6, 12, 24)))
        for a in range(n)
        for b in range(a + 1, n)
        if rng.random() < density
    ]
    out = [rng.choice((0, 2, 6, 12)) for _ in range(n)]
    return make_dag(exec_times, edges, out, raw=rng.choice((0, 6, 12, 36)))


def random_case(
    rng: random.Random,
    max_tasks: int = 8,
    max_pes: int = 3,
    max_jobs: int = 1,
    contention: bool = True,
) -> Case:
    dag = random_dag(rng, max_tasks)
    pool = make_pool([rng.choice(KINDS) for _ in range(rng.randint(1, max_pes))])
    mode = Contention.SERIALIZED if contention and rng.random() < 0.4 else Contention.NONE
    link = LinkModel(rng.choice((6.0, 12.0, 24.0)), mode)
    sub = JobSubmission(rng.randint(1, max_jobs), rng.choice((0.0, 0.0, 1.5, 7.0)))
    return Case(dag, pool, link, sub, rng.choice(list(CommMode)), rng.random() < 0.7)


# ------------------------------------------------------------------ oracles


def oracle_volume(dag: WorkloadDag, task: int, tier: Tier, pred_tier: dict, mode: CommMode) -> float:
    """Megabits crossing the link before ``task`` runs on ``tier``.

    ``pred_tier`` maps predecessor task id -> tier it ran on.
    """
    incoming = [e for e in dag.edges if e.dst == task]
    if mode is CommMode.STATIC:
        if tier is Tier.FRONTEND:
            return 0.0
        vol = sum(e.volume for e in incoming) + dag.by_id[task].output_volume
        return vol + (dag.raw_input_volume if not incoming else 0.0)
    if not incoming:
        return dag.raw_input_volume if tier is Tier.BACKEND else 0.0
    return sum(e.volume for e in incoming if pred_tier[e.src] is not tier)


def returned_volume(dag: WorkloadDag, task: int, tier: Tier, mode: CommMode, result_return: bool) -> float:
    is_exit = not any(e.src == task for e in dag.edges)
    if result_return and mode is CommMode.LOCATION and tier is Tier.BACKEND and is_exit:
        return dag.by_id[task].output_volume
    return 0.0


def evaluate_sequence(case: Case, seq) -> float:
    """Makespan of a single-job dispatch sequence ``[(task, pe_index), ...]``.

    Each task starts as early as its predecessors and its PE's previous task
    allow (semi-active timing), pays its input transfer on the PE, then runs.
    Only valid without link contention.
    """
    dag, pool, rate = case.dag, case.pool, case.link.rate
    avail = [0.0] * len(pool.instances)
    finish, tier = {}, {}
    end = 0.0
    for task, p in seq:
        t = pool.instances[p].tier
        preds = [e.src for e in dag.edges if e.dst == task]
        ready = max((finish[q] for q in preds), default=0.0)
        vol = oracle_volume(dag, task, t, tier, case.comm_mode)
        start = max(ready, avail[p]) + vol / rate
        f = start + dag.by_id[task].exec_profile[pool.instances[p].kind.name]
        finish[task], tier[task], avail[p] = f, t, f
        ret = returned_volume(dag, task, t, case.comm_mode, case.result_return)
        end = max(end, f + ret / rate if ret > 0 else f)
    return end


def brute_force_optimum(case: Case) -> float:
    """Minimum makespan over every precedence-feasible dispatch sequence.

    Sequences that differ only by swapping adjacent independent decisions
    (different PE, no edge between the tasks) give the same schedule, so only
    the lexicographically smallest ordering of each such class is explored.
    A critical-path bound prunes the rest.
    """
    dag, pool, rate = case.dag, case.pool, case.link.rate
    n, m = len(dag.tasks), len(pool.instances)
    preds = {t.id: [e.src for e in dag.edges if e.dst == t.id] for t in dag.tasks}
    succs = {t.id: {e.dst for e in dag.edges if e.src == t.id} for t in dag.tasks}
    min_exec = {t.id: min(t.exec_profile[pe.kind.name] for pe in pool.instances) for t in dag.tasks}
    tail = {}
    for t in reversed(dag.topological_order()):
        tail[t] = min_exec[t] + max((tail[s] for s in succs[t]), default=0.0)

    best = [math.inf]
    finish, tier = {}, {}
    avail = [0.0] * m

    def dfs(last, end):
        if len(finish) == n:
            best[0] = min(best[0], end)
            return
        bound = end
        for t in dag.task_ids:
            if t not in finish:
                known = [finish[q] for q in preds[t] if q in finish]
                bound = max(bound, max(known, default=0.0) + tail[t])
        if bound >= best[0]:
            return
        for t in dag.task_ids:
            if t in finish or any(q not in finish for q in preds[t]):
                continue
            for p in range(m):
                if last is not None:
                    lt, lp = last
                    independent = lp != p and t not in succs[lt]
                    if independent and (t, p) < (lt, lp):
                        continue
                tr = pool.instances[p].tier
                vol = oracle_volume(dag, t, tr, tier, case.comm_mode)
                ready = max((finish[q] for q in preds[t]), default=0.0)
                f = max(ready, avail[p]) + vol / rate + dag.by_id[t].exec_profile[pool.instances[p].kind.name]
                ret = returned_volume(dag, t, tr, case.comm_mode, case.result_return)
                saved = avail[p]
                finish[t], tier[t], avail[p] = f, tr, f
                dfs((t, p), max(end, f + ret / rate if ret > 0 else f))
                del finish[t], tier[t]
                avail[p] = saved

    dfs(None, 0.0)
    return best[0]


def eft_oracle(ctx):
    """(finish, pe id) of every placement of the head ready task, recomputed by hand."""
    head = ctx.ready[0]
    dag = ctx.dag
    pred_tier = {e.src: ctx.data_locations[(head.job, e.src)] for e in dag.edges if e.dst == head.task}
    out = []
    for i, pe in enumerate(ctx.pool.instances):
        vol = oracle_volume(dag, head.task, pe.tier, pred_tier, ctx.comm_mode)
        start = max(ctx.clock, ctx.pe_states[i].available_at)
        if vol > 0 and ctx.link.contention is Contention.SERIALIZED:
            start = max(start, ctx.link_free_at)
        f = start + vol / ctx.link.rate + dag.by_id[head.task].exec_profile[pe.kind.name]
        out.append((f, pe.id))
    return out


def check_invariants(case: Case, timeline) -> list[str]:
    """Every violated engine invariant, as human-readable strings."""
    dag, pool, link = case.dag, case.pool, case.link
    bad = []
    by_pe_index = {pe.id: pe for pe in pool.instances}
    recs = {(r.job, r.task): r for r in timeline.records}
    expected = case.submission.instances * len(dag.tasks)
    if len(recs) != expected or len(timeline.records) != expected:
        bad.append(f"{len(timeline.records)} records, expected {expected}")
    arrivals = case.submission.arrival_times()
    eps = 1e-9
    per_pe: dict[int, list] = {}
    link_busy = []
    for (job, task), r in recs.items():
        pe = by_pe_index[r.pe]
        per_pe.setdefault(r.pe, []).append((r.transfer_start, r.finish, job, task))
        ex = dag.by_id[task].exec_profile[pe.kind.name]
        if not math.isclose(r.finish - r.exec_start, ex, rel_tol=1e-9, abs_tol=eps):
            bad.append(f"{job}/{task}: ran {r.finish - r.exec_start}, profile says {ex}")
        pred_ids = [e.src for e in dag.edges if e.dst == task]
        ready = max([arrivals[job]] + [recs[(job, q)].finish for q in pred_ids if (job, q) in recs])
        if r.transfer_start < ready - eps:
            bad.append(f"{job}/{task}: started {r.transfer_start} before ready {ready}")
        pred_tier = {q: by_pe_index[recs[(job, q)].pe].tier for q in pred_ids if (job, q) in recs}
        if len(pred_tier) == len(pred_ids):
            vol = oracle_volume(dag, task, pe.tier, pred_tier, case.comm_mode)
            if not math.isclose(r.transferred_volume, vol, abs_tol=eps):
                bad.append(f"{job}/{task}: moved {r.transferred_volume} Mb, expected {vol}")
        want = r.transferred_volume / link.rate
        gap = r.exec_start - r.transfer_start
        if not math.isclose(gap, want, rel_tol=1e-9, abs_tol=eps):
            bad.append(f"{job}/{task}: transfer took {gap}, expected {want}")
        if r.transferred_volume > 0:
            link_busy.append((r.transfer_start, r.exec_start, f"in {job}/{task}"))
        ret = returned_volume(dag, task, pe.tier, case.comm_mode, case.result_return)
        if not math.isclose(r.returned_volume, ret, abs_tol=eps):
            bad.append(f"{job}/{task}: returned {r.returned_volume} Mb, expected {ret}")
        if ret > 0:
            if r.delivered_at < r.finish + ret / link.rate - eps:
                bad.append(f"{job}/{task}: delivered before its result could arrive")
            link_busy.append((r.delivered_at - ret / link.rate, r.delivered_at, f"out {job}/{task}"))
        elif r.delivered_at != r.finish:
            bad.append(f"{job}/{task}: delivered_at differs from finish without a return")
    for pid, ivs in per_pe.items():
        ivs.sort()
        for a, b in zip(ivs, ivs[1:]):
            if b[0] < a[1] - eps:
                bad.append(f"PE {pid}: {a[2:]} and {b[2:]} overlap")
    if link.contention is Contention.SERIALIZED:
        link_busy.sort()
        for a, b in zip(link_busy, link_busy[1:]):
            if b[0] < a[1] - eps:
                bad.append(f"link: {a[2]} and {b[2]} overlap")
    return bad


# ------------------------------------------------------------------ stream oracles


def naive_aggregate(values, kind):
    if kind == "count":
        return len(values)
    if kind == "min":
        return min(values)
    if kind == "max":
        return max(values)
    return float(sum(Fraction(v) for v in values) / len(values))


def _random_window(rng):
    kind = rng.choice(list(WindowKind))
    if kind is WindowKind.SLIDING:
        return WindowSpec(kind, rng.choice((1, 2.5, 5, 10, 40)))
    if kind is WindowKind.TUMBLING:
        return WindowSpec(kind, rng.choice((1, 3, 7.5, 20)), origin=rng.choice((0.0, -3.0, 2.0)))
    return WindowSpec(kind, rng.choice((0.0, 4.0, 15.0, 60.0)))


def _naive_bounds(spec, now):
    if spec.kind is WindowKind.SLIDING:
        return lambda ts: now - spec.width <= ts <= now
    if spec.kind is WindowKind.LANDMARK:
        return lambda ts: spec.origin <= ts <= now
    # latest window [origin + k w, origin + (k+1) w) that has fully closed by now
    k = 0
    while spec.origin + (k + 2) * spec.width <= now:
        k += 1
    lo = spec.origin + k * spec.width
    return lambda ts: lo <= ts < lo + spec.width


def random_stream(rng, n):
    t, out = 0.0, []
    for _ in range(n):
        t += rng.choice((0.0, 0.5, 1.0, 1.0, 2.0, 3.5))
        out.append(StreamTuple(t, {"v": rng.choice((rng.randint(-9, 9), rng.uniform(-5, 5)))}))
    return out


def run_case(rng, tmp_path, capacity=None):
    """Feed a random stream through store + buffer; return (evaluate(), oracle)."""
    stream = random_stream(rng, rng.randint(1, 60))
    split = rng.randint(0, len(stream))
    store = HistoricStore(tmp_path / f"c{rng.random()}.log")
    store.extend(stream[:split])
    buf = BoundedBuffer(capacity or rng.randint(1, 70), store)
    for t in stream[split:]:
        buf.push(t)
    spec = _random_window(rng)
    now = stream[-1].timestamp + rng.choice((0.0, 0.0, 0.5, 4.0))
    q = ContinuousQuery(1.0, rng.choice(list(AggregateKind)), "v", spec, "s", "l").register(now)
    inside = _naive_bounds(q.window, now) if not (
        q.window.kind is WindowKind.TUMBLING and now < q.window.origin + q.window.width
    ) else None
    try:
        got = evaluate(q, store, buf, now)["value"]
    except EmptyWindowError:
        got = EmptyWindowError
    if inside is None:
        return got, EmptyWindowError
    # store and buffer form a set: identical tuples collapse to one
    distinct = {(t.timestamp, t["v"]): t for t in stream}
    vals = [t["v"] for t in distinct.values() if inside(t.timestamp)]
    if not vals and q.aggregate is not AggregateKind.COUNT:
        return got, EmptyWindowError
    return got, naive_aggregate(vals, q.aggregate.value)
