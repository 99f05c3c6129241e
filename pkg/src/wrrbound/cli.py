"""Command-line entry point.

Exit codes
----------
0  success (deadlines met / plan feasible / simulation within bounds)
1  a deadline is missed or no feasible weight plan exists
2  configuration or usage error
3  simulation observed a delay above its analytical bound
4  saturation: a burst never drains or a simulated queue grows without bound
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

from . import __version__
from .analysis import DepartureMode
from .config import ConfigDocument, parse_config
from .errors import ConfigError, DomainError, SaturationError, UnstableError, WrrError
from .optimizer import OptimizerSettings, SearchMode, optimize
from .report import SimRow, render_analyze, render_optimize, render_simulate
from .simulator import max_observed_delay, run_simulation, write_trace_csv
from .topology import FlowClass, errors_only, find_flow, propagate_analysis, validate_topology

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2
EXIT_UNSOUND = 3
EXIT_SATURATED = 4

log = logging.getLogger("wrrbound")


def _setup_logging() -> None:
    level = os.environ.get("WRRBOUND_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def _load(args) -> ConfigDocument:
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("E_CONFIG_IO", str(exc)) from None
    doc = parse_config(text)
    diags = validate_topology(doc.topology, list(doc.flows))
    for d in diags:
        print(d, file=sys.stderr)
    if errors_only(diags):
        raise ConfigError("E_INVALID_CONFIG", f"{len(errors_only(diags))} validation error(s)")
    return doc


def _departure(args, doc: ConfigDocument) -> DepartureMode:
    if args.departure:
        return DepartureMode(args.departure)
    return doc.optimizer.departure_mode


def cmd_validate(args) -> int:
    _load(args)
    print("configuration valid")
    return EXIT_OK


def cmd_analyze(args) -> int:
    doc = _load(args)
    mode = _departure(args, doc)
    reports, failures = [], {}
    for flow in doc.control_flows():
        try:
            reports.append(propagate_analysis(doc.topology, flow, mode))
        except (SaturationError, UnstableError) as exc:
            failures[flow.name] = str(exc)
    sys.stdout.write(render_analyze(reports, args.format, failures))
    for name, msg in failures.items():
        print(f"error: flow {name}: {msg}", file=sys.stderr)
    if failures or not all(r.deadline_met for r in reports):
        return EXIT_VIOLATION
    return EXIT_OK


def _flow_for_optimize(args, doc: ConfigDocument):
    name = args.flow or doc.optimize_flow
    if name is None:
        ctrl = doc.control_flows()
        if len(ctrl) != 1:
            raise ConfigError("E_FLOW_AMBIGUOUS", "several control flows; pick one with --flow")
        return ctrl[0]
    try:
        flow = find_flow(list(doc.flows), name)
    except KeyError:
        raise ConfigError("E_UNKNOWN_FLOW", f"unknown flow {name!r}") from None
    if flow.cls is not FlowClass.CONTROL:
        raise ConfigError("E_NOT_CONTROL", f"flow {name!r} is not a control flow")
    return flow


def _int_list(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if min(vals) < 1:
        raise argparse.ArgumentTypeError("weights must be >= 1")
    return vals


def cmd_optimize(args) -> int:
    doc = _load(args)
    flow = _flow_for_optimize(args, doc)
    base = doc.optimizer
    settings = OptimizerSettings(
        mode=SearchMode(args.mode) if args.mode else base.mode,
        w2_candidates=tuple(range(1, args.w2_max + 1)) if args.w2_max else base.w2_candidates,
        w1_cap=args.w1_cap or base.w1_cap,
        departure_mode=_departure(args, doc),
        w2_fixed=args.w2 if args.w2 is not None else base.w2_fixed,
    )
    plan = optimize(doc.topology, flow, settings)
    sys.stdout.write(render_optimize(flow.name, plan, args.format))
    return EXIT_OK if plan.feasible else EXIT_VIOLATION


def cmd_simulate(args) -> int:
    doc = _load(args)
    sim = doc.simulation
    duration = args.duration if args.duration is not None else sim.duration
    seeds = args.seeds if args.seeds is not None else sim.seeds
    if not duration > 0:
        raise ConfigError("E_BAD_DURATION", f"duration must be positive, got {duration}")
    if seeds < 1:
        raise ConfigError("E_BAD_SEEDS", "need at least one seed")
    mode = _departure(args, doc)
    flows = list(doc.flows)
    bounds, saturated = {}, []
    for flow in doc.control_flows():
        try:
            bounds[flow.name] = propagate_analysis(doc.topology, flow, mode)
        except (SaturationError, UnstableError) as exc:
            saturated.append(f"analysis: flow {flow.name}: {exc}")

    maxima: dict[tuple[str, str], list] = {}
    for seed in range(seeds):
        try:
            trace = run_simulation(doc.topology, flows, duration, seed, gating=sim.gating,
                                   queue_cap=sim.queue_cap)
        except SaturationError as exc:
            saturated.append(f"simulation seed {seed}: {exc}")
            break
        if seed == 0 and args.trace:
            with open(args.trace, "w", encoding="utf-8", newline="") as fh:
                write_trace_csv(trace, fh)
        for name, ft in trace.flows.items():
            if len(ft.frame_ids) == 0:
                continue
            per_hop, e2e = max_observed_delay(trace, name)
            n = len(ft.frame_ids)
            for hop, val in list(zip(ft.hops, per_hop)) + [("TOTAL", e2e)]:
                cur = maxima.setdefault((name, hop), [0, 0, 0.0])
                cur[0] += 1
                cur[1] += n
                cur[2] = max(cur[2], val)

    rows = []
    for (name, hop), (nseeds, samples, worst) in maxima.items():
        rep = bounds.get(name)
        bound = None
        if rep is not None:
            bound = rep.end_to_end if hop == "TOTAL" else next(h.bound.overall for h in rep.hops
                                                              if h.hop == hop)
        rows.append(SimRow(name, hop, nseeds, samples, worst, bound))
    sys.stdout.write(render_simulate(rows, args.format, saturated))
    for s in saturated:
        print(f"saturated: {s}", file=sys.stderr)
    if saturated:
        return EXIT_SATURATED
    if not all(r.within for r in rows):
        return EXIT_UNSOUND
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wrrbound",
                                description="Worst-case delay analysis for WRR-scheduled Ethernet ports")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="configuration file")
    common.add_argument("--format", choices=("table", "csv"), default="table")
    common.add_argument("--departure", choices=("eq12", "paper"),
                        help="output burst rule (default: config, else paper)")
    sub.add_parser("validate", parents=[common], help="check a configuration").set_defaults(func=cmd_validate)
    sub.add_parser("analyze", parents=[common], help="per-hop and end-to-end delay bounds") \
        .set_defaults(func=cmd_analyze)
    o = sub.add_parser("optimize", parents=[common], help="choose WRR weights for a deadline")
    o.add_argument("--mode", choices=("paper", "exhaustive"))
    o.add_argument("--flow", help="control flow to optimize")
    o.add_argument("--w2", type=_int_list, help="fixed per-hop w2 for paper mode, e.g. 1,2")
    o.add_argument("--w2-max", type=int, help="largest w2 tried by exhaustive mode")
    o.add_argument("--w1-cap", type=int, help="largest w1 tried")
    o.set_defaults(func=cmd_optimize)
    s = sub.add_parser("simulate", parents=[common], help="compare simulated delays with the bounds")
    s.add_argument("--duration", type=float, help="simulated seconds per seed")
    s.add_argument("--seeds", type=int, help="number of seeds (0..n-1)")
    s.add_argument("--trace", help="write the per-frame trace of seed 0 as CSV")
    s.set_defaults(func=cmd_simulate)
    return p


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SaturationError as exc:
        print(f"saturated: {exc}", file=sys.stderr)
        return EXIT_SATURATED
    except (DomainError, WrrError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
