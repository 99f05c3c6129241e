"""Network model and multi-hop propagation of the control-flow envelope.

A hop is one WRR output port ``(switch, port)``.  Ports take their
capacity from the link they are attached to.  Only control flows carry an
arrival curve; background flows just mark the ports where the background
queue is kept busy.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping

from .analysis import (ControlFlowAtPort, DepartureMode, HopDelayBound, PortConfig,
                       delay_bound_overall, departure_curve)
from .curves import AffineArrivalCurve, PeriodicSource, affine_from_periodic
from .errors import DomainError, SaturationError, UnknownFlowError, UnstableError

PortId = tuple[str, int]


def port_name(port: PortId) -> str:
    return f"{port[0]}.{port[1]}"


def parse_port_name(text: str) -> PortId:
    sw, sep, num = text.rpartition(".")
    if not sep or not sw or not num.isdigit():
        raise DomainError(f"not a switch port reference: {text!r}")
    return sw, int(num)


class FlowClass(str, enum.Enum):
    CONTROL = "control"
    BACKGROUND = "background"


@dataclass(frozen=True)
class Link:
    name: str
    a: str
    b: str
    capacity: float

    def other_end(self, endpoint: str) -> str | None:
        if endpoint == self.a:
            return self.b
        if endpoint == self.b:
            return self.a
        return None


@dataclass(frozen=True)
class FlowSpec:
    name: str
    cls: FlowClass
    src: str
    dst: str
    path: tuple[PortId, ...]
    source: PeriodicSource | None = None
    deadline: float | None = None

    @property
    def priority(self) -> int:
        return 1 if self.cls is FlowClass.CONTROL else 2


@dataclass(frozen=True)
class Topology:
    links: tuple[Link, ...]
    ports: Mapping[PortId, PortConfig]
    stations: frozenset[str] = field(default=frozenset())

    @property
    def switches(self) -> frozenset[str]:
        names = {sw for sw, _ in self.ports}
        for link in self.links:
            for end in (link.a, link.b):
                if end not in self.stations:
                    names.add(end.rpartition(".")[0])
        return frozenset(names)

    def link_of(self, endpoint: str) -> Link | None:
        for link in self.links:
            if endpoint in (link.a, link.b):
                return link
        return None

    def with_weights(self, weights: Mapping[PortId, tuple[int, int]]) -> "Topology":
        ports = dict(self.ports)
        for pid, (w1, w2) in weights.items():
            ports[pid] = ports[pid].with_weights(w1, w2)
        return Topology(self.links, ports, self.stations)


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    severity: str = "error"

    def __str__(self) -> str:
        return f"{self.severity}: {self.code}: {self.message}"


@dataclass(frozen=True)
class HopReport:
    hop: str
    port: PortConfig
    arrival: AffineArrivalCurve
    bound: HopDelayBound
    departure: AffineArrivalCurve
    bg_bandwidth: float


@dataclass(frozen=True)
class PathReport:
    flow: str
    hops: tuple[HopReport, ...]
    end_to_end: float
    deadline: float | None
    deadline_met: bool

    @property
    def min_bg_bandwidth(self) -> float:
        """Background bandwidth left along the path (the tightest hop)."""
        return min(h.bg_bandwidth for h in self.hops)


def background_bandwidth(port: PortConfig, flow_or_len) -> float:
    """Background share of a cycle where both queues use their full quota.

    ``C * w2*tau_bar / (w1*tau + w2*tau_bar)``.  The second argument is a
    :class:`ControlFlowAtPort` or a control frame length in bits.
    """
    frame_len = getattr(flow_or_len, "frame_len", flow_or_len)
    tau = frame_len / port.capacity
    vac = port.w2 * port.tau_bar
    return port.capacity * vac / (port.w1 * tau + vac)


def validate_topology(topo: Topology, flows: list[FlowSpec]) -> list[Diagnostic]:
    diags: list[Diagnostic] = []

    def err(code, msg):
        diags.append(Diagnostic(code, msg))

    for link in topo.links:
        if not link.capacity > 0:
            err("E_LINK_CAPACITY", f"link {link.name} has nonpositive capacity {link.capacity}")
    seen_ends: dict[str, str] = {}
    for link in topo.links:
        for end in (link.a, link.b):
            if end in seen_ends:
                err("E_ENDPOINT_REUSED", f"endpoint {end} attached to links {seen_ends[end]} and {link.name}")
            seen_ends[end] = link.name
    for pid, port in sorted(topo.ports.items()):
        link = topo.link_of(port_name(pid))
        if link is None:
            err("E_PORT_UNATTACHED", f"port {port_name(pid)} is not attached to any link")
        elif link.capacity != port.capacity:
            err("E_PORT_CAPACITY", f"port {port_name(pid)} capacity {port.capacity} differs from "
                                   f"link {link.name} capacity {link.capacity}")

    names = set()
    control_at: dict[PortId, list[str]] = {}
    for flow in flows:
        if flow.name in names:
            err("E_DUPLICATE_FLOW", f"flow {flow.name} defined twice")
        names.add(flow.name)
        if not flow.path:
            err("E_PATH_EMPTY", f"flow {flow.name} has an empty path")
            continue
        for end in (flow.src, flow.dst):
            if end not in topo.stations:
                err("E_UNKNOWN_STATION", f"flow {flow.name} references unknown station {end}")
        unknown = [p for p in flow.path if p not in topo.ports]
        for p in unknown:
            err("E_PATH_UNKNOWN_PORT", f"flow {flow.name} path references undefined port {port_name(p)}")
        if not unknown:
            _check_path(topo, flow, err)
        if flow.cls is FlowClass.CONTROL:
            if flow.source is None:
                err("E_FLOW_SOURCE", f"control flow {flow.name} has no periodic source")
                continue
            if flow.deadline is None or not flow.deadline > 0:
                err("E_BAD_DEADLINE", f"control flow {flow.name} needs a positive deadline")
            rho = flow.source.frame_len / flow.source.period
            for p in flow.path:
                if p in topo.ports and rho >= topo.ports[p].capacity:
                    err("E_FLOW_OVERLOAD", f"flow {flow.name} rate {rho:.6g} b/s >= capacity of "
                                           f"{port_name(p)}")
                    break
            for p in flow.path:
                control_at.setdefault(p, []).append(flow.name)
    for p, shared in sorted(control_at.items()):
        if len(shared) > 1:
            diags.append(Diagnostic("W_SHARED_CONTROL_QUEUE",
                                    f"port {port_name(p)} carries several control flows "
                                    f"({', '.join(shared)}); per-flow bounds assume one", "warning"))
    return diags


def _check_path(topo: Topology, flow: FlowSpec, err) -> None:
    """Each hop must be reachable from the previous one over a link."""
    first_link = topo.link_of(flow.src)
    here = first_link.other_end(flow.src) if first_link else None
    if here is None or here.rpartition(".")[0] != flow.path[0][0]:
        err("E_PATH_BROKEN", f"flow {flow.name}: station {flow.src} is not attached to switch "
                             f"{flow.path[0][0]}")
        return
    for i, pid in enumerate(flow.path):
        link = topo.link_of(port_name(pid))
        if link is None:
            return
        far = link.other_end(port_name(pid))
        if i + 1 < len(flow.path):
            nxt = flow.path[i + 1][0]
            if far.rpartition(".")[0] != nxt or far in topo.stations:
                err("E_PATH_BROKEN", f"flow {flow.name}: port {port_name(pid)} leads to {far}, "
                                     f"not to switch {nxt}")
                return
        elif far != flow.dst:
            err("E_PATH_BROKEN", f"flow {flow.name}: last port {port_name(pid)} leads to {far}, "
                                 f"not to {flow.dst}")


def errors_only(diags: list[Diagnostic]) -> list[Diagnostic]:
    return [d for d in diags if d.severity == "error"]


def find_flow(flows: list[FlowSpec], name: str) -> FlowSpec:
    for f in flows:
        if f.name == name:
            return f
    raise UnknownFlowError(f"unknown flow {name!r}")


def propagate_analysis(topo: Topology, flow: FlowSpec,
                       mode: DepartureMode | str = DepartureMode.EQ12_MIN) -> PathReport:
    """Analyse a control flow hop by hop along its path.

    The first hop sees the token bucket of the periodic source; every later
    hop sees the departure curve of the hop before it.  The end-to-end bound
    is the sum of the per-hop bounds.

    :raises SaturationError: some hop cannot drain the burst; ``hop`` names it.
    """
    if flow.cls is not FlowClass.CONTROL or flow.source is None:
        raise DomainError(f"flow {flow.name} is not a control flow")
    arrival = affine_from_periodic(flow.source)
    hops = []
    total = 0.0
    for pid in flow.path:
        port = topo.ports[pid]
        at_port = ControlFlowAtPort(flow.source.frame_len, arrival)
        try:
            bound = delay_bound_overall(port, at_port)
            departure = departure_curve(port, at_port, mode)
        except (SaturationError, UnstableError) as exc:
            raise SaturationError(str(exc), hop=port_name(pid), code=exc.code) from exc
        hops.append(HopReport(port_name(pid), port, arrival, bound, departure,
                              background_bandwidth(port, at_port)))
        total += bound.overall
        arrival = departure
    met = flow.deadline is None or total <= flow.deadline
    return PathReport(flow.name, tuple(hops), total, flow.deadline, met)
