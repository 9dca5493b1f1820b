"""
Where should a task run?
========================

A two-step chain: a light cleaning step followed by a model that is slow on
an edge CPU and fast on a server GPU. Moving the 12 Mb intermediate result
across a 12 Mbps link costs one second, so offloading only pays when the
speedup is bigger than that.
"""

from edgepipe.engine import makespan, run_simulation
from edgepipe.platform import LinkModel, PeInstance, PeKind, ResourcePool, Tier
from edgepipe.workload import DagEdge, JobSubmission, TaskSpec, WorkloadDag

pi = PeKind("pi-cpu", Tier.FRONTEND)
gpu = PeKind("dc-gpu", Tier.BACKEND)
pool = ResourcePool((PeInstance(0, pi), PeInstance(1, gpu)), "pi+gpu")

###############################################################################
# Build the DAG by hand. ``raw_input_volume`` is the sensor data every entry
# task needs; it starts on the edge, so keep it small here.


def chain(model_on_pi: float) -> WorkloadDag:
    clean = TaskSpec(0, "clean", {"pi-cpu": 2.0, "dc-gpu": 50.0}, 12.0)
    model = TaskSpec(1, "model", {"pi-cpu": model_on_pi, "dc-gpu": 1.0}, 0.0)
    return WorkloadDag((clean, model), (DagEdge(0, 1, 12.0),), raw_input_volume=0.0)


###############################################################################
# Sweep the model's edge execution time. Up to 2 s the edge wins (the GPU
# finishes at 2 + 1 transfer + 1 run = 4 s); beyond that EFT offloads.

for secs in (1.5, 2.0, 2.5, 6.0):
    tl = run_simulation(chain(secs), JobSubmission(), pool, "EFT", LinkModel(12.0), result_return=False)
    model = next(r for r in tl.records if r.task == 1)
    print(f"model takes {secs:>3} s on the Pi -> runs on {model.kind:<6} finish {makespan(tl):.1f} s")

###############################################################################
# Results that end on the server travel back to the edge when
# ``result_return`` is on; give the model a 6 Mb output to see the 0.5 s cost.

returning = WorkloadDag(
    (TaskSpec(0, "clean", {"pi-cpu": 2.0, "dc-gpu": 50.0}, 12.0),
     TaskSpec(1, "model", {"pi-cpu": 6.0, "dc-gpu": 1.0}, 6.0)),
    (DagEdge(0, 1, 12.0),),
    raw_input_volume=0.0,
)
tl = run_simulation(returning, JobSubmission(), pool, "EFT", LinkModel(12.0))
print("with result return:", makespan(tl), "s")
