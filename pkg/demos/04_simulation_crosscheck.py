"""Discrete-event simulation as an independent check on the solver.

Runs 20 simulation replications of the default pub/sub calibration,
builds 95% confidence intervals for every throughput and mean token
count, and marks whether the analytic steady-state value falls inside.
The two routes share nothing but the net definition, so agreement is
strong evidence that both are right.
"""

from spnperf import PubSubParams, build_pubsub_net, explore, steady_state
from spnperf.simulator import estimate_metrics
from spnperf.solver import mean_token_count, transition_throughput

net = build_pubsub_net(PubSubParams())
estimate = estimate_metrics(net, horizon=2000.0, warmup=200.0, replications=20, base_seed=1)
ctmc = explore(net)
dist = steady_state(ctmc)

print(f"{'metric':<36} {'simulated':>10} {'+/-':>8} {'analytic':>10}  inside")
hits = 0
for name, (mean, hw) in sorted(estimate.metrics.items()):
    kind, _, target = name.partition(":")
    analytic = (
        transition_throughput(ctmc, dist, target)
        if kind == "throughput"
        else mean_token_count(ctmc, dist, target)
    )
    inside = abs(analytic - mean) <= hw
    hits += inside
    print(f"{name:<36} {mean:10.4f} {hw:8.4f} {analytic:10.4f}  {'yes' if inside else 'NO'}")
print(f"\n{hits}/{len(estimate.metrics)} analytic values inside their 95% intervals")
