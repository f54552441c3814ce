"""The self-optimizing monitor reacting to a degrading workload.

Feeds a short workload trace to the monitor loop with response-time
thresholds that the initial (buffer-starved) configuration violates.
The monitor evaluates the model after each snapshot, applies its
remediation actions in order -- grow network buffers, grow broker
memory, lower the QoS level if allowed -- and re-checks until the
platform is compliant or out of options.
"""

from spnperf.monitor import MonitorPolicy, WorkloadSnapshot, run_loop
from spnperf.pubsub import PubSubParams

policy = MonitorPolicy(
    max_accept_publication_response_time=2.8,
    max_notification_response_time=3.7,
    step=2,
    qos_reduction_allowed=True,
)
trace = [
    WorkloadSnapshot(timestamp=10.0, n_publishers=2, n_subscribers=2, n_events=3),
    WorkloadSnapshot(timestamp=20.0, n_publishers=2, n_subscribers=2, n_events=4),
    WorkloadSnapshot(timestamp=30.0, n_publishers=2, n_subscribers=2, n_events=4),
]

for record in run_loop(trace, PubSubParams(), policy):
    before = record.before.response_times
    after = record.after.response_times if record.after is not None else None
    print(f"t={record.timestamp:>5}: outcome={record.outcome}")
    print(
        "  before: accept={accept_publication_response_time:.4f} "
        "notify={notification_response_time:.4f}".format(**before)
    )
    for action in record.actions:
        print(f"  action: {action}")
    if after is not None and record.actions:
        print(
            "  after : accept={accept_publication_response_time:.4f} "
            "notify={notification_response_time:.4f}".format(**after)
        )
