"""Command-line surface: analyze, sweep, simulate, monitor, export-net.

Exit codes: 0 success, 2 invalid input (schema, validation, arguments),
3 analysis failure (state explosion, reducible chain, no convergence).
"""

from __future__ import annotations

import argparse
import json
import sys

from . import files
from .monitor import run_loop
from .pubsub import (
    FACTOR_NAMES,
    build_pubsub_net,
    headline_metrics,
    set_factor,
)
from .reachability import (
    DEFAULT_MAX_STATES,
    InvalidNetError,
    StateExplosionError,
    explore,
)
from .simulator import estimate_metrics
from .solver import (
    ChainStructureError,
    ConvergenceError,
    mean_token_count,
    steady_state,
    transition_throughput,
)

SWEEP_HEADER = "factor,accept_publication_rt,notification_rt,states,residual"
#: pseudo-factor adjusting the receive and send buffers together
NETWORK_BUFFER = "network_buffer"


def _analysis_options(parser):
    parser.add_argument("--max-states", type=int, default=DEFAULT_MAX_STATES)
    parser.add_argument("--tol", type=float, default=1e-12)
    parser.add_argument("--method", choices=("auto", "direct", "iterative"),
                        default="auto")


def _solve_file(kind, model, args):
    if kind == "params":
        net = build_pubsub_net(model)
    else:
        net = model
    ctmc = explore(net, max_states=args.max_states)
    dist = steady_state(ctmc, method=args.method, tol=args.tol)
    return net, ctmc, dist


def cmd_analyze(args) -> int:
    kind, model = files.load_model_file(args.model)
    net, ctmc, dist = _solve_file(kind, model, args)
    if kind == "params":
        report = headline_metrics(ctmc, dist)
    else:
        from .solver import MetricsReport

        report = MetricsReport(
            transition_throughputs={
                t.name: transition_throughput(ctmc, dist, t.name)
                for t in net.transitions
            },
            mean_tokens={
                p.name: mean_token_count(ctmc, dist, p.name) for p in net.places
            },
            response_times={},
        )
    doc = files.report_to_document(report)
    doc["states"] = ctmc.n_states
    doc["residual"] = dist.residual
    print(json.dumps(doc, indent=2, sort_keys=True))
    return 0


def _parse_values(factor: str, text: str):
    items = [v for v in text.split(",") if v.strip()]
    if factor == "r_pub_qos":
        return sorted(float(v) for v in items)
    return sorted(int(v) for v in items)


def cmd_sweep(args) -> int:
    kind, model = files.load_model_file(args.model)
    if kind != "params":
        raise files.FormatError("sweep requires a pub/sub params file")
    factor = args.factor
    if factor != NETWORK_BUFFER and factor not in FACTOR_NAMES:
        raise ValueError(
            f"unknown factor {factor!r}; expected {NETWORK_BUFFER!r} or one of {FACTOR_NAMES}"
        )
    values = _parse_values(factor, args.values)

    print(SWEEP_HEADER)
    for value in values:
        if factor == NETWORK_BUFFER:
            params = set_factor(model, "net_recv_buffer", value)
            params = set_factor(params, "net_send_buffer", value)
        else:
            params = set_factor(model, factor, value)
        ctmc = explore(build_pubsub_net(params), max_states=args.max_states)
        dist = steady_state(ctmc, method=args.method, tol=args.tol)
        report = headline_metrics(ctmc, dist)
        accept = report.response_times["accept_publication_response_time"]
        notify = report.response_times["notification_response_time"]
        row = (
            repr(value),
            "nan" if accept is None else repr(accept),
            "nan" if notify is None else repr(notify),
            str(ctmc.n_states),
            repr(dist.residual),
        )
        print(",".join(row))
    return 0


def cmd_simulate(args) -> int:
    if args.replications < 2:
        raise ValueError("--replications must be at least 2")
    kind, model = files.load_model_file(args.model)
    net = build_pubsub_net(model) if kind == "params" else model
    estimate = estimate_metrics(
        net,
        horizon=args.horizon,
        warmup=args.warmup,
        replications=args.replications,
        base_seed=args.seed,
    )
    doc = files.estimate_to_document(estimate)

    analytic = {}
    try:
        ctmc = explore(net, max_states=args.max_states)
        dist = steady_state(ctmc)
        for t in net.transitions:
            analytic[f"throughput:{t.name}"] = transition_throughput(ctmc, dist, t.name)
        for p in net.places:
            analytic[f"mean_tokens:{p.name}"] = mean_token_count(ctmc, dist, p.name)
    except (StateExplosionError, ChainStructureError, ConvergenceError):
        analytic = None

    if analytic is not None:
        for name, entry in doc["metrics"].items():
            value = analytic[name]
            entry["analytic"] = value
            entry["inside_ci"] = bool(
                abs(value - entry["mean"]) <= entry["half_width_95"]
            )
    print(json.dumps(doc, indent=2, sort_keys=True))
    return 0


def cmd_monitor(args) -> int:
    with open(args.trace) as fh:
        trace = files.read_trace(fh)
    kind, model = files.load_model_file(args.params)
    if kind != "params":
        raise files.FormatError("monitor requires a pub/sub params file")
    with open(args.policy) as fh:
        try:
            policy_doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise files.FormatError(f"{args.policy}: not valid JSON ({exc})") from exc
    policy = files.policy_from_document(policy_doc)
    records = run_loop(trace, model, policy, max_states=args.max_states, tol=args.tol)
    for record in records:
        print(json.dumps(files.decision_record_to_document(record), sort_keys=True))
    return 0


def cmd_export_net(args) -> int:
    kind, model = files.load_model_file(args.params)
    if kind != "params":
        raise files.FormatError("export-net requires a pub/sub params file")
    print(json.dumps(files.net_to_document(build_pubsub_net(model)), indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spnperf",
        description="Stochastic Petri net performance analysis for pub/sub brokers",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="steady-state metrics of a net or params file")
    p.add_argument("model", help="net document or pub/sub params JSON file")
    _analysis_options(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="sweep one influencing factor, CSV output")
    p.add_argument("model", help="pub/sub params JSON file")
    p.add_argument("--factor", required=True)
    p.add_argument("--values", required=True,
                   help="comma-separated values, e.g. 1,2,4,8")
    _analysis_options(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="discrete-event estimates vs analytic values")
    p.add_argument("model", help="net document or pub/sub params JSON file")
    p.add_argument("--horizon", type=float, required=True)
    p.add_argument("--warmup", type=float, default=None)
    p.add_argument("--replications", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-states", type=int, default=DEFAULT_MAX_STATES)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("monitor", help="run the self-optimizing loop over a trace")
    p.add_argument("trace", help="workload trace, JSON Lines")
    p.add_argument("params", help="pub/sub params JSON file")
    p.add_argument("policy", help="monitor policy JSON file")
    p.add_argument("--max-states", type=int, default=DEFAULT_MAX_STATES)
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(func=cmd_monitor)

    p = sub.add_parser("export-net", help="dump a params file as a net document")
    p.add_argument("params", help="pub/sub params JSON file")
    p.set_defaults(func=cmd_export_net)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (files.FormatError, InvalidNetError, ValueError, KeyError, OSError) as exc:
        print(f"spnperf: error: {exc}", file=sys.stderr)
        return 2
    except (StateExplosionError, ChainStructureError, ConvergenceError) as exc:
        print(f"spnperf: analysis failed: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
