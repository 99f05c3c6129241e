"""Choose WRR weights along a control flow's path.

Two strategies:

``paper``
    Fix ``w2`` per hop, start every hop at its smallest admissible ``w1``
    (burst drain and mean-phase slot), then repeatedly bump the ``w1``
    whose increment lowers the end-to-end bound the most until the
    deadline is met.
``exhaustive``
    Branch and bound over every ``w2`` combination and every admissible
    ``w1`` vector, keeping the plan that leaves the most background
    bandwidth on the tightest hop.
"""
from __future__ import annotations

import enum
import itertools
import logging
import math
from dataclasses import dataclass, field

from .analysis import (DEFAULT_W1_CAP, ControlFlowAtPort, DepartureMode, PortConfig,
                       delay_bound_overall, departure_curve, min_weight_burst, min_weight_mean)
from .curves import AffineArrivalCurve, affine_from_periodic
from .errors import DomainError, InfeasibleError, SaturationError, UnstableError
from .topology import (FlowClass, FlowSpec, PathReport, PortId, Topology, background_bandwidth,
                       port_name, propagate_analysis)

log = logging.getLogger(__name__)


class SearchMode(str, enum.Enum):
    PAPER_ITERATIVE = "paper"
    EXHAUSTIVE = "exhaustive"


@dataclass(frozen=True)
class OptimizerSettings:
    mode: SearchMode = SearchMode.PAPER_ITERATIVE
    w2_candidates: tuple[int, ...] = tuple(range(1, 9))
    w1_cap: int = DEFAULT_W1_CAP
    departure_mode: DepartureMode = DepartureMode.PAPER_CASE_STUDY
    # per-hop w2 for paper mode; None keeps the configured port weights
    w2_fixed: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "mode", SearchMode(self.mode))
        object.__setattr__(self, "departure_mode", DepartureMode(self.departure_mode))
        if not self.w2_candidates or min(self.w2_candidates) < 1:
            raise DomainError("w2 candidates must be a nonempty set of integers >= 1")
        if self.w1_cap < 1:
            raise DomainError("w1 cap must be >= 1")
        if self.w2_fixed is not None and min(self.w2_fixed, default=1) < 1:
            raise DomainError("fixed w2 values must be >= 1")


@dataclass(frozen=True)
class WeightPlan:
    assignments: dict[PortId, tuple[int, int]]
    end_to_end_bound: float
    min_bg_bandwidth: float
    feasible: bool
    report: PathReport | None = None
    code: str | None = None
    binding: tuple[str, ...] = field(default=())


def _min_w1(port: PortConfig, flow: ControlFlowAtPort, cap: int) -> int:
    return max(min_weight_burst(port, flow, cap), min_weight_mean(port, flow))


def min_feasible_w1(port: PortConfig, arrival: AffineArrivalCurve, frame_len: float,
                    budget: float, cap: int = DEFAULT_W1_CAP) -> int:
    """Smallest ``w1`` that drains the burst, covers the mean phase and meets ``budget``.

    ``port.w1`` is ignored.
    """
    if not budget > 0:
        raise DomainError("hop budget must be positive")
    flow = ControlFlowAtPort(frame_len, arrival)
    for w1 in range(_min_w1(port, flow, cap), cap + 1):
        if delay_bound_overall(port.with_weights(w1=w1), flow).overall <= budget:
            return w1
    raise InfeasibleError(f"no w1 <= {cap} meets a hop budget of {budget * 1e6:.1f} us")


def check_plan(topo: Topology, flow: FlowSpec, weights: dict[PortId, tuple[int, int]],
               mode: DepartureMode | str, cap: int = DEFAULT_W1_CAP) -> list[str]:
    """List the constraints a weight assignment violates (empty when feasible)."""
    problems = []
    t = topo.with_weights(weights)
    arrival = affine_from_periodic(flow.source)
    for pid in flow.path:
        port = t.ports[pid]
        at = ControlFlowAtPort(flow.source.frame_len, arrival)
        try:
            need = _min_w1(port, at, cap)
            if port.w1 < need:
                problems.append(f"{port_name(pid)}: w1={port.w1} below admissible minimum {need}")
            arrival = departure_curve(port, at, mode)
        except (SaturationError, UnstableError, InfeasibleError) as exc:
            problems.append(f"{port_name(pid)}: {exc}")
            return problems
    report = propagate_analysis(t, flow, mode)
    if not report.deadline_met:
        problems.append(f"end-to-end {report.end_to_end * 1e6:.1f} us exceeds deadline "
                        f"{flow.deadline * 1e6:.1f} us")
    return problems


def _repair(topo: Topology, flow: FlowSpec, w1s: list[int], w2s: list[int],
            mode: DepartureMode, cap: int) -> list[int] | None:
    """Raise each ``w1`` to at least its admissible minimum, walking downstream."""
    out = list(w1s)
    arrival = affine_from_periodic(flow.source)
    for i, pid in enumerate(flow.path):
        port = topo.ports[pid].with_weights(w2=w2s[i])
        at = ControlFlowAtPort(flow.source.frame_len, arrival)
        try:
            out[i] = max(out[i], _min_w1(port, at, cap))
        except (InfeasibleError, SaturationError, UnstableError):
            return None
        if out[i] > cap:
            return None
        arrival = departure_curve(port.with_weights(w1=out[i]), at, mode)
    return out


def _evaluate(topo: Topology, flow: FlowSpec, w1s, w2s, mode) -> PathReport:
    weights = {pid: (w1s[i], w2s[i]) for i, pid in enumerate(flow.path)}
    return propagate_analysis(topo.with_weights(weights), flow, mode)


def _plan(flow: FlowSpec, w1s, w2s, report: PathReport) -> WeightPlan:
    weights = {pid: (w1s[i], w2s[i]) for i, pid in enumerate(flow.path)}
    return WeightPlan(weights, report.end_to_end, report.min_bg_bandwidth,
                      report.deadline_met, report)


def _hop_floors(topo: Topology, flow: FlowSpec, w2s) -> list[float]:
    """No weight choice gets a hop below one background visit plus one frame."""
    return [w2s[i] * topo.ports[pid].tau_bar + flow.source.frame_len / topo.ports[pid].capacity
            for i, pid in enumerate(flow.path)]


def _infeasible(flow: FlowSpec, code: str, binding: list[str], w1s=None, w2s=None,
                report: PathReport | None = None) -> WeightPlan:
    weights = {}
    if w1s is not None:
        weights = {pid: (w1s[i], w2s[i]) for i, pid in enumerate(flow.path)}
    return WeightPlan(weights, report.end_to_end if report else math.inf,
                      report.min_bg_bandwidth if report else 0.0, False, report, code, tuple(binding))


def _paper_iterative(topo: Topology, flow: FlowSpec, s: OptimizerSettings) -> WeightPlan:
    n = len(flow.path)
    if s.w2_fixed is not None:
        if len(s.w2_fixed) != n:
            raise DomainError(f"{len(s.w2_fixed)} fixed w2 values for a {n}-hop path")
        w2s = list(s.w2_fixed)
    else:
        w2s = [topo.ports[pid].w2 for pid in flow.path]
    mode = s.departure_mode
    floors = _hop_floors(topo, flow, w2s)
    if sum(floors) > flow.deadline:
        binding = [f"{port_name(pid)}: floor {floors[i] * 1e6:.1f} us"
                   for i, pid in enumerate(flow.path)]
        binding.append(f"sum of floors {sum(floors) * 1e6:.1f} us > deadline "
                       f"{flow.deadline * 1e6:.1f} us")
        return _infeasible(flow, "E_DEADLINE_UNREACHABLE", binding)
    w1s = _repair(topo, flow, [1] * n, w2s, mode, s.w1_cap)
    if w1s is None:
        return _infeasible(flow, "E_INFEASIBLE", ["burst cannot drain within the w1 cap"])
    report = _evaluate(topo, flow, w1s, w2s, mode)
    while not report.deadline_met:
        best = None
        for i in range(n):
            if w1s[i] + 1 > s.w1_cap:
                continue
            trial = list(w1s)
            trial[i] += 1
            trial = _repair(topo, flow, trial, w2s, mode, s.w1_cap)
            if trial is None:
                continue
            r = _evaluate(topo, flow, trial, w2s, mode)
            if best is None or r.end_to_end < best[1].end_to_end:
                best = (trial, r)
        if best is None or best[1].end_to_end >= report.end_to_end:
            binding = [f"{h.hop}: w1={w1s[i]} bound {h.bound.overall * 1e6:.1f} us"
                       for i, h in enumerate(report.hops)]
            return _infeasible(flow, "E_DEADLINE_UNREACHABLE", binding, w1s, w2s, report)
        w1s, report = best
        log.debug("iterative search: w1=%s e2e=%.1f us", w1s, report.end_to_end * 1e6)
    return _plan(flow, w1s, w2s, report)


def _exhaustive(topo: Topology, flow: FlowSpec, s: OptimizerSettings) -> WeightPlan:
    n = len(flow.path)
    mode = s.departure_mode
    frame_len = flow.source.frame_len
    ports = [topo.ports[pid] for pid in flow.path]
    best_key = None
    best = None
    cands = sorted(set(s.w2_candidates))

    def key(w1s, w2s, bw):
        return (-bw, sum(w1s), sum(w2s), tuple(zip(w1s, w2s)))

    for w2s in itertools.product(cands, repeat=n):
        floors = _hop_floors(topo, flow, w2s)
        if sum(floors) > flow.deadline:
            continue
        rest = [sum(floors[i + 1:]) for i in range(n)]

        def dfs(i, arrival, w1s, spent, bw):
            nonlocal best_key, best
            if i == n:
                if spent <= flow.deadline:
                    k = key(w1s, w2s, bw)
                    if best_key is None or k < best_key:
                        best_key, best = k, (list(w1s), list(w2s))
                return
            port = ports[i].with_weights(w2=w2s[i])
            at = ControlFlowAtPort(frame_len, arrival)
            try:
                start = _min_w1(port, at, s.w1_cap)
            except (InfeasibleError, SaturationError, UnstableError):
                return
            for w1 in range(start, s.w1_cap + 1):
                p = port.with_weights(w1=w1)
                hop_bw = min(bw, background_bandwidth(p, frame_len))
                if best_key is not None and -hop_bw > best_key[0]:
                    break  # bandwidth only shrinks as w1 grows
                bound = delay_bound_overall(p, at).overall
                if spent + bound + rest[i] > flow.deadline:
                    continue
                dfs(i + 1, departure_curve(p, at, mode), w1s + [w1], spent + bound, hop_bw)

        dfs(0, affine_from_periodic(flow.source), [], 0.0, math.inf)

    if best is None:
        return _infeasible(flow, "E_DEADLINE_UNREACHABLE",
                           [f"no (w1 <= {s.w1_cap}, w2 in {cands[0]}..{cands[-1]}) combination "
                            f"meets {flow.deadline * 1e6:.1f} us"])
    w1s, w2s = best
    return _plan(flow, w1s, w2s, _evaluate(topo, flow, w1s, w2s, mode))


def optimize(topo: Topology, flow: FlowSpec, settings: OptimizerSettings | None = None) -> WeightPlan:
    """Pick per-hop ``(w1, w2)`` meeting the flow's deadline.

    Returns a plan with ``feasible=False`` plus a code and the binding
    constraints when nothing within the caps works.
    """
    settings = settings or OptimizerSettings()
    if flow.cls is not FlowClass.CONTROL or flow.source is None or flow.deadline is None:
        raise DomainError(f"flow {flow.name} is not a control flow with a deadline")
    if settings.mode is SearchMode.EXHAUSTIVE:
        plan = _exhaustive(topo, flow, settings)
    else:
        plan = _paper_iterative(topo, flow, settings)
    if plan.feasible:
        # never hand back a plan the analysis itself would not confirm
        again = propagate_analysis(topo.with_weights(plan.assignments), flow, settings.departure_mode)
        assert again.end_to_end <= flow.deadline
    return plan
