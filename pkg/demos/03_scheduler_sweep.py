"""
Does the scheduling policy matter?
==================================

Fix the largest mixed pool and compare EFT, ETF and round robin. Round robin
ignores execution profiles, so the ARM cores get their share of the
compute-heavy clustering tasks and everything waits on them.
"""

from pathlib import Path

from edgepipe.engine import run_simulation
from edgepipe.harness import ExperimentSpec, cmd_sweep_schedulers, emit_outputs, scheduler_deltas
from edgepipe.metrics import utilization
from edgepipe.platform import best_pool
from edgepipe.schedulers import SchedulerKind
from edgepipe.workload import JobSubmission, canonical_ds_workload

dag, pool = canonical_ds_workload(), best_pool()
table = cmd_sweep_schedulers(ExperimentSpec(dag, (pool,), tuple(SchedulerKind)))
for row in table.rows:
    print(f"{row.scheduler:<4} {row.makespan:8.1f} s  util {row.mean_utilization:.3f}")
for line in scheduler_deltas(table):
    print(line)

###############################################################################
# Per-PE busy fractions show where the time goes.

for kind in SchedulerKind:
    tl = run_simulation(dag, JobSubmission(100), pool, kind)
    rep = utilization(tl, pool)
    cells = " ".join(f"{pe.kind.name.split('-')[0]}:{rep.fraction[pe.id]:.2f}" for pe in pool)
    print(f"{kind.value:<4} {cells}")

out = Path(__file__).with_name("output")
out.mkdir(exist_ok=True)
emit_outputs(table, out / "scheduler_sweep.csv", out / "scheduler_sweep.svg", "Makespan by scheduler")
