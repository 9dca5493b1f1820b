"""Command-line runner: single simulations, pool and scheduler sweeps, stream queries.

Every command is a pure function of its input files and flags. Tables go to
stdout and optionally to CSV and a static SVG bar chart.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import shutil
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence
from xml.sax.saxutils import escape

from .engine import Timeline, run_simulation
from .metrics import RunSummary, summarize
from .platform import (
    Contention,
    LinkModel,
    PoolSweepSpec,
    ResourcePool,
    best_pool,
    enumerate_sweep,
    load_pool,
)
from .schedulers import CommMode, SchedulerKind
from .workload import JobSubmission, WorkloadDag, canonical_ds_workload, load_workload

CSV_HEADER = ("pool", "scheduler", "instances", "makespan_s", "mean_utilization")
EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentSpec:
    dag: WorkloadDag
    pools: tuple[ResourcePool, ...]
    schedulers: tuple[SchedulerKind, ...]
    link: LinkModel = field(default_factory=LinkModel)
    instances: int = 100
    delay: float = 0.0
    comm_mode: CommMode = CommMode.LOCATION
    result_return: bool = True

    def __post_init__(self):
        if self.instances < 1:
            raise UsageError(f"instances must be >= 1, got {self.instances}")
        if not self.pools or not self.schedulers:
            raise UsageError("experiment needs at least one pool and one scheduler")

    @property
    def submission(self) -> JobSubmission:
        return JobSubmission(self.instances, self.delay)


@dataclass
class ResultTable:
    rows: list[RunSummary] = field(default_factory=list)

    def add(self, row: RunSummary):
        if any((r.pool, r.scheduler) == (row.pool, row.scheduler) for r in self.rows):
            raise ValueError(f"duplicate row for {row.pool}/{row.scheduler}")
        self.rows.append(row)

    def __len__(self):
        return len(self.rows)

    def best(self) -> RunSummary:
        return min(self.rows, key=lambda r: r.makespan)

    def row(self, pool: str, scheduler: str) -> RunSummary:
        for r in self.rows:
            if r.pool == pool and r.scheduler == scheduler:
                return r
        raise KeyError((pool, scheduler))


def _run_one(spec: ExperimentSpec, pool: ResourcePool, kind: SchedulerKind):
    tl = run_simulation(
        spec.dag,
        spec.submission,
        pool,
        kind,
        spec.link,
        comm_mode=spec.comm_mode,
        result_return=spec.result_return,
    )
    return summarize(tl, pool), tl


def _run_all(spec: ExperimentSpec, jobs: int = 1) -> ResultTable:
    cases = [(p, s) for p in spec.pools for s in spec.schedulers]
    if jobs > 1 and len(cases) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            futures = [ex.submit(_run_one, spec, p, s) for p, s in cases]
            results = [f.result()[0] for f in futures]  # enumeration order
    else:
        results = [_run_one(spec, p, s)[0] for p, s in cases]
    table = ResultTable()
    for row in results:
        table.add(row)
    return table


def cmd_simulate(spec: ExperimentSpec) -> tuple[ResultTable, Timeline]:
    if len(spec.pools) != 1 or len(spec.schedulers) != 1:
        raise UsageError("simulate takes exactly one pool and one scheduler")
    row, tl = _run_one(spec, spec.pools[0], spec.schedulers[0])
    table = ResultTable()
    table.add(row)
    return table, tl


def cmd_sweep_pools(spec: ExperimentSpec, jobs: int = 1) -> ResultTable:
    return _run_all(spec, jobs)


def cmd_sweep_schedulers(spec: ExperimentSpec, jobs: int = 1) -> ResultTable:
    return _run_all(spec, jobs)


def scheduler_deltas(table: ResultTable, baseline: str = "RR") -> list[str]:
    """Makespan reduction and utilization change of each row against the baseline row."""
    base = next(r for r in table.rows if r.scheduler == baseline)
    lines = []
    for r in table.rows:
        if r is base:
            continue
        red = 100.0 * (base.makespan - r.makespan) / base.makespan
        pts = 100.0 * (r.mean_utilization - base.mean_utilization)
        rel = 100.0 * (r.mean_utilization - base.mean_utilization) / base.mean_utilization
        lines.append(
            f"{r.scheduler} vs {baseline}: makespan -{red:.1f}%, "
            f"utilization +{pts:.1f} points (+{rel:.1f}% relative)"
        )
    return lines


def table_csv(table: ResultTable) -> str:
    if not table.rows:
        raise ValueError("cannot emit an empty result table")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in table.rows:
        w.writerow([r.pool, r.scheduler, r.instances, repr(r.makespan), repr(r.mean_utilization)])
    return buf.getvalue()


def table_svg(table: ResultTable, title: str = "Makespan") -> str:
    """Bar chart, one bar per row; bar height is linear in makespan.

    Each bar carries its exact CSV value in ``data-makespan``.
    """
    if not table.rows:
        raise ValueError("cannot emit an empty result table")
    bar_w, gap, plot_h, top, left, bottom = 48, 16, 300.0, 40, 60, 110
    peak = max(r.makespan for r in table.rows)
    scale = plot_h / peak if peak > 0 else 0.0
    width = left + len(table.rows) * (bar_w + gap) + gap
    height = top + plot_h + bottom
    base_y = top + plot_h
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height:g}" '
        f'viewBox="0 0 {width} {height:g}">',
        f'<text x="{width / 2:g}" y="24" text-anchor="middle" font-size="16">{escape(title)}</text>',
        f'<line x1="{left}" y1="{base_y:g}" x2="{width}" y2="{base_y:g}" stroke="black"/>',
        f'<text x="14" y="{top + plot_h / 2:g}" font-size="12" '
        f'transform="rotate(-90 14 {top + plot_h / 2:g})" text-anchor="middle">makespan (s)</text>',
    ]
    for i, r in enumerate(table.rows):
        x = left + gap + i * (bar_w + gap)
        h = r.makespan * scale
        label = escape(f"{r.pool} {r.scheduler}" if len({q.scheduler for q in table.rows}) > 1 else r.pool)
        out.append(
            f'<rect class="bar" x="{x}" y="{base_y - h!r}" width="{bar_w}" height="{h!r}" '
            f'fill="#4a7ab5" data-pool="{escape(r.pool)}" data-scheduler="{escape(r.scheduler)}" '
            f'data-makespan="{r.makespan!r}"/>'
        )
        out.append(
            f'<text x="{x + bar_w / 2:g}" y="{base_y - h - 4:.1f}" font-size="10" '
            f'text-anchor="middle">{r.makespan:.0f}</text>'
        )
        out.append(
            f'<text x="{x + bar_w / 2:g}" y="{base_y + 12:g}" font-size="10" text-anchor="end" '
            f'transform="rotate(-45 {x + bar_w / 2:g} {base_y + 12:g})">{label}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_outputs(table: ResultTable, csv_path=None, svg_path=None, title: str = "Makespan"):
    text = table_csv(table)
    if csv_path:
        with open(csv_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    if svg_path:
        with open(svg_path, "w", encoding="utf-8") as fh:
            fh.write(table_svg(table, title))


# ---------------------------------------------------------------- argument handling


def _int_list(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty range")
    return vals


def _on_off(text: str) -> bool:
    t = text.lower()
    if t not in ("on", "off"):
        raise argparse.ArgumentTypeError(f"expected on or off, got {text!r}")
    return t == "on"


def _scheduler(text: str) -> SchedulerKind:
    try:
        return SchedulerKind.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _add_shared(p: argparse.ArgumentParser):
    p.add_argument("--recipe", help="JSON file of flag defaults (keys are flag names)")
    p.add_argument("--workload", help="workload JSON (default: bundled DS pipeline)")
    p.add_argument("--pool", help="pool JSON file, or a sweep label such as '3ARM-3Xeon'")
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--delay", type=float, default=0.0, help="seconds between job arrivals")
    p.add_argument("--mbps", type=float, default=None, help="link rate (default 12)")
    p.add_argument("--contention", choices=("none", "serial"), default=None)
    p.add_argument("--comm-mode", choices=("location", "static"), default="location")
    p.add_argument("--result-return", type=_on_off, default=True, metavar="{on,off}")
    p.add_argument("--csv", help="write the result table here")
    p.add_argument("--svg", help="write a bar chart of makespans here")
    p.add_argument("--timeline", help="write the full schedule here (simulate only)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="edgepipe", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one pool with one scheduler")
    _add_shared(p)
    p.add_argument("--scheduler", type=_scheduler, default=SchedulerKind.EFT)

    p = sub.add_parser("sweep-pools", help="makespan across the pool grid")
    _add_shared(p)
    p.add_argument("--scheduler", type=_scheduler, default=SchedulerKind.EFT)
    p.add_argument("--arm-range", type=_int_list, default=(1, 2, 3))
    p.add_argument("--xeon-range", type=_int_list, default=(1, 2, 3))

    p = sub.add_parser("sweep-schedulers", help="EFT, ETF and RR on one pool")
    _add_shared(p)
    p.add_argument("--scheduler", type=_scheduler, action="append", dest="schedulers")

    p = sub.add_parser("stream-eval", help="run a continuous query over a store")
    p.add_argument("--query", required=True, help="query text, or @file to read it from a file")
    p.add_argument("--store", required=True, help="historic store file")
    p.add_argument("--synthetic-days", type=float, default=0.0,
                   help="fill an empty store with this many days of synthetic history")
    p.add_argument("--step", type=float, default=60.0, help="sampling step of synthetic tuples")
    p.add_argument("--ticks", type=int, default=1, help="number of query periods to evaluate")
    p.add_argument("--buffer", type=int, default=64, help="live buffer capacity")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", help="write timestamp,value rows here")
    parser.set_defaults(_commands=dict(sub.choices))
    return parser


def _apply_recipe(parser: argparse.ArgumentParser, argv: Sequence[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if getattr(args, "recipe", None):
        with open(args.recipe, encoding="utf-8") as fh:
            recipe = json.load(fh)
        if recipe.get("command", args.command) != args.command:
            raise UsageError(f"recipe is for {recipe['command']!r}, not {args.command!r}")
        sub = args._commands[args.command]
        defaults = {k.replace("-", "_"): v for k, v in recipe.items() if k != "command"}
        for key in ("arm_range", "xeon_range"):
            if key in defaults:
                defaults[key] = tuple(defaults[key])
        if "scheduler" in defaults:
            defaults["scheduler"] = SchedulerKind.parse(defaults["scheduler"])
        if "schedulers" in defaults:
            defaults["schedulers"] = [SchedulerKind.parse(s) for s in defaults["schedulers"]]
        known = {a.dest for a in sub._actions}
        stray = set(defaults) - known
        if stray:
            raise UsageError(f"unknown recipe keys: {sorted(stray)}")
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)  # explicit flags still win
    return args


def _resolve_pool(token: str | None, sweep: list[ResourcePool]) -> tuple[ResourcePool, LinkModel | None]:
    if token is None:
        return best_pool(), None
    if os.path.exists(token):
        return load_pool(token)
    for p in sweep:
        if p.label == token:
            return p, None
    raise UsageError(f"--pool {token!r} is neither a file nor a known pool label")


def _spec(args, pools, schedulers, file_link: LinkModel | None) -> ExperimentSpec:
    base = file_link or LinkModel()
    link = LinkModel(
        args.mbps if args.mbps is not None else base.rate,
        Contention.parse(args.contention) if args.contention else base.contention,
    )
    dag = load_workload(args.workload) if args.workload else canonical_ds_workload()
    return ExperimentSpec(
        dag=dag,
        pools=tuple(pools),
        schedulers=tuple(schedulers),
        link=link,
        instances=args.instances,
        delay=args.delay,
        comm_mode=CommMode.parse(args.comm_mode),
        result_return=args.result_return,
    )


def _print_table(table: ResultTable, out):
    width = max(len(r.pool) for r in table.rows)
    out.write(f"{'pool':<{width}}  sched  makespan_s  mean_util\n")
    for r in table.rows:
        out.write(f"{r.pool:<{width}}  {r.scheduler:<5}  {r.makespan:10.2f}  {r.mean_utilization:9.4f}\n")


def _stream_eval(args, out) -> int:
    from .streamops import BoundedBuffer, HistoricStore, WindowKind, evaluate, parse_query
    from .streamops.synthetic import speed_tuples

    text = args.query
    if text.startswith("@"):
        with open(text[1:], encoding="utf-8") as fh:
            text = fh.read()
    query = parse_query(text)
    if args.ticks < 1:
        raise UsageError("--ticks must be >= 1")
    store = HistoricStore(args.store)
    if store.last_timestamp is None:
        if args.synthetic_days <= 0:
            raise UsageError(f"store {args.store} is empty; pass --synthetic-days to fill it")
        store.extend(speed_tuples(0.0, args.synthetic_days * 86400, args.step, args.seed))
    start = store.last_timestamp + args.step
    # the live stream continues where the history stops; overflow spills into a
    # scratch copy so the input store is left untouched and reruns agree
    scratch = tempfile.TemporaryDirectory()
    copy = os.path.join(scratch.name, os.path.basename(args.store))
    shutil.copyfile(args.store, copy)
    spill = HistoricStore(copy, name=store.name)
    live = BoundedBuffer(args.buffer, spill)
    now = start + query.period
    if query.window.kind is WindowKind.LANDMARK:
        query = query.register(now)
    rows = []
    feed = speed_tuples(start, now + (args.ticks - 1) * query.period + args.step, args.step, args.seed + 1)
    pending = next(feed, None)
    for _ in range(args.ticks):
        while pending is not None and pending.timestamp <= now:
            live.push(pending)
            pending = next(feed, None)
        result = evaluate(query, spill, live, now)
        rows.append((now, result["value"]))
        out.write(f"{now!r}\t{query.aggregate.value}({query.attribute}) = {result['value']!r}\n")
        now += query.period
    scratch.cleanup()
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("timestamp", "value"))
            w.writerows((repr(t), repr(v)) for t, v in rows)
    return EXIT_OK


def run(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = _apply_recipe(parser, list(argv) if argv is not None else sys.argv[1:])
    except SystemExit as exc:
        return int(exc.code or 0)
    except OSError as exc:
        print(f"edgepipe: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except ValueError as exc:  # includes malformed recipe JSON
        print(f"edgepipe: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "stream-eval":
            return _stream_eval(args, out)
        if args.jobs < 1:
            raise UsageError("--jobs must be >= 1")
        if args.command == "sweep-pools":
            sweep = enumerate_sweep(PoolSweepSpec(args.arm_range, args.xeon_range))
            spec = _spec(args, sweep, [args.scheduler], None)
            table = cmd_sweep_pools(spec, args.jobs)
            title = f"Makespan by resource pool ({table.rows[0].scheduler})"
        else:
            pool, file_link = _resolve_pool(args.pool, enumerate_sweep())
            if args.command == "simulate":
                spec = _spec(args, [pool], [args.scheduler], file_link)
                table, tl = cmd_simulate(spec)
                if args.timeline:
                    with open(args.timeline, "w", encoding="utf-8", newline="") as fh:
                        fh.write(tl.to_text())
                title = f"Makespan on {pool.label}"
            else:
                kinds = args.schedulers or list(SchedulerKind)
                spec = _spec(args, [pool], kinds, file_link)
                table = cmd_sweep_schedulers(spec, args.jobs)
                title = f"Makespan by scheduler on {pool.label}"
        _print_table(table, out)
        if args.command == "sweep-pools":
            best = table.best()
            out.write(f"best configuration: {best.pool} ({best.makespan:.2f} s)\n")
        if args.command == "sweep-schedulers" and any(r.scheduler == "RR" for r in table.rows):
            for line in scheduler_deltas(table):
                out.write(line + "\n")
        emit_outputs(table, args.csv, args.svg, title)
        return EXIT_OK
    except (OSError, RuntimeError) as exc:
        print(f"edgepipe: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"edgepipe: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
