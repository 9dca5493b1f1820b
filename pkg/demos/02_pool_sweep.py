"""
How many resources does the pipeline need?
==========================================

Run 100 copies of the bundled 16-task data-science pipeline on eleven
resource pools: a 3x3 grid over edge ARM cores and server Xeon cores (with
one Volta, Tesla and Alveo each), plus edge-only and server-only pools.
The scheduler is EFT throughout.
"""

from pathlib import Path

from edgepipe.harness import ExperimentSpec, cmd_sweep_pools, emit_outputs
from edgepipe.platform import enumerate_sweep
from edgepipe.schedulers import SchedulerKind
from edgepipe.workload import canonical_ds_workload

dag = canonical_ds_workload()
print(f"{len(dag.tasks)} tasks, {len(dag.edges)} edges, raw input {dag.raw_input_volume} Mb")

spec = ExperimentSpec(dag, tuple(enumerate_sweep()), (SchedulerKind.EFT,))
table = cmd_sweep_pools(spec, jobs=4)

###############################################################################
# Makespan falls as either core count grows, and the two single-tier pools
# are the slowest of all: the edge lacks compute, the server pays for moving
# every job's raw input over the link.

for row in table.rows:
    print(f"{row.pool:<12} {row.makespan:8.1f} s  util {row.mean_utilization:.2f}")

server = next(r.makespan for r in table.rows if r.pool == "Server only")
best = table.best()
print(f"best: {best.pool}, {100 * (1 - best.makespan / server):.1f}% faster than server only")

###############################################################################
# Save the table and a bar chart next to this script.

out = Path(__file__).with_name("output")
out.mkdir(exist_ok=True)
emit_outputs(table, out / "pool_sweep.csv", out / "pool_sweep.svg", "Makespan by resource pool (EFT)")
print("wrote", out / "pool_sweep.svg")
