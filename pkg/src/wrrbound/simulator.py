"""Discrete-event simulation of WRR output ports, used as an empirical oracle.

Every port serves a control queue (weight ``w1``) and a background queue
(weight ``w2``) cyclically, non-preemptively, skipping an empty queue at
once.  Background queues on ports crossed by a background flow are kept
permanently backlogged with maximum-length frames.  Control sources are
strictly periodic; the only randomness is each source's phase offset.

Control traffic only moves forward along declared paths, so ports are
simulated one at a time in dependency order: the departures of a port are
the arrivals of the next one.  Within a port, simultaneous events are
ordered arrival-before-completion and then by frame id.
"""
from __future__ import annotations

import csv
import graphlib
import math
from dataclasses import dataclass, field
from typing import Iterator, TextIO

import numpy as np

from . import _kernels
from .analysis import PortConfig
from .errors import DomainError, NoSamplesError, SaturationError, UnknownFlowError
from .topology import FlowClass, FlowSpec, PortId, Topology, port_name

DEFAULT_QUEUE_CAP = 512


@dataclass(frozen=True)
class Frame:
    id: int
    flow: str
    length: float
    creation_time: float
    arrivals: tuple[float, ...]
    departures: tuple[float, ...]


@dataclass
class FlowTrace:
    name: str
    hops: tuple[str, ...]
    frame_ids: np.ndarray
    length: float
    arrival: np.ndarray  # (frames, hops)
    depart: np.ndarray  # (frames, hops)

    @property
    def hop_delays(self) -> np.ndarray:
        return self.depart - self.arrival

    @property
    def end_to_end(self) -> np.ndarray:
        return self.depart[:, -1] - self.arrival[:, 0]


@dataclass
class PortStats:
    port: str
    ctrl_bits: float
    bg_bits: float
    visits: int
    log: dict | None = None


@dataclass
class SimTrace:
    flows: dict[str, FlowTrace]
    ports: dict[str, PortStats]
    duration: float
    seed: int
    phases: dict[str, float] = field(default_factory=dict)

    def throughput(self, port: str) -> tuple[float, float]:
        """``(control, background)`` bits per second delivered by ``port``."""
        st = self.ports[port]
        return st.ctrl_bits / self.duration, st.bg_bits / self.duration

    def frames(self, flow: str) -> Iterator[Frame]:
        ft = self.flows[flow]
        for i, fid in enumerate(ft.frame_ids):
            yield Frame(int(fid), flow, ft.length, float(ft.arrival[i, 0]),
                        tuple(ft.arrival[i].tolist()), tuple(ft.depart[i].tolist()))


def _port_order(ports: set[PortId], flows: list[FlowSpec]) -> list[PortId]:
    ts = graphlib.TopologicalSorter()
    for pid in sorted(ports):
        ts.add(pid)
    for f in flows:
        for a, b in zip(f.path, f.path[1:]):
            ts.add(b, a)
    try:
        return list(ts.static_order())
    except graphlib.CycleError as exc:
        raise DomainError(f"control paths form a cycle through ports {exc.args[1]}") from exc


def run_simulation(topo: Topology, flows: list[FlowSpec], duration: float, seed: int, *,
                   gating: str = "open", queue_cap: int = DEFAULT_QUEUE_CAP,
                   phases: dict[str, float] | None = None, record: bool = False) -> SimTrace:
    """Simulate ``duration`` seconds of traffic and collect per-frame delays.

    Control frames are emitted for ``phase + n*period < duration``; the run
    continues past ``duration`` until every emitted frame has left the
    network.  Per-hop delay is measured from complete reception at the
    output queue to the end of transmission on the output link.

    :param gating: ``"open"`` lets a frame that reaches an empty queue
        during that queue's visit use the remaining quota; ``"closed"``
        limits each visit to the frames present when it started.
    :param phases: fixed phase offsets by flow name, overriding the seed.
    :raises SaturationError: a control queue exceeds ``queue_cap`` frames.
    """
    if not duration > 0:
        raise DomainError(f"simulation duration must be positive, got {duration}")
    if gating not in ("open", "closed"):
        raise DomainError(f"gating must be 'open' or 'closed', got {gating!r}")
    control = [f for f in flows if f.cls is FlowClass.CONTROL]
    bg_ports = {p for f in flows if f.cls is FlowClass.BACKGROUND for p in f.path}
    used = bg_ports | {p for f in control for p in f.path}
    missing = sorted(p for p in used if p not in topo.ports)
    if missing:
        raise DomainError(f"undefined ports in paths: {', '.join(map(port_name, missing))}")

    rng = np.random.default_rng(seed)
    phases = dict(phases or {})
    per_flow = []
    for fi, f in enumerate(control):
        drawn = rng.uniform(0.0, f.source.period)
        ph = phases.setdefault(f.name, float(drawn))
        count = max(0, math.ceil((duration - ph) / f.source.period))
        t = ph + f.source.period * np.arange(count, dtype=float)
        t = t[t < duration]
        per_flow.append(t)

    # frame ids follow emission order, ties broken by flow declaration order
    keys = [(t, fi, n) for fi, ts in enumerate(per_flow) for n, t in enumerate(ts.tolist())]
    keys.sort()
    ids = [np.empty(len(ts), dtype=np.int64) for ts in per_flow]
    for fid, (_, fi, n) in enumerate(keys):
        ids[fi][n] = fid

    arrival = [np.full((len(ts), len(f.path)), np.nan) for ts, f in zip(per_flow, control)]
    depart = [np.full((len(ts), len(f.path)), np.nan) for ts, f in zip(per_flow, control)]
    for fi, ts in enumerate(per_flow):
        if len(control[fi].path):
            arrival[fi][:, 0] = ts

    stats: dict[str, PortStats] = {}
    for pid in _port_order(used, control):
        port: PortConfig = topo.ports[pid]
        users = [(fi, h) for fi, f in enumerate(control) for h, p in enumerate(f.path) if p == pid]
        times, lens, fids, owners = [], [], [], []
        for fi, h in users:
            at = per_flow[fi] if h == 0 else depart[fi][:, h - 1]
            arrival[fi][:, h] = at
            times.append(at)
            lens.append(np.full(len(at), control[fi].source.frame_len))
            fids.append(ids[fi])
            owners.append(np.stack([np.full(len(at), fi), np.full(len(at), h),
                                    np.arange(len(at))], axis=1) if len(at) else np.empty((0, 3), int))
        if users:
            times_a = np.concatenate(times)
            lens_a = np.concatenate(lens)
            fids_a = np.concatenate(fids)
            owners_a = np.concatenate(owners).astype(np.int64)
            order = np.lexsort((fids_a, times_a))
            times_a, lens_a, owners_a = times_a[order], lens_a[order], owners_a[order]
        else:
            times_a = lens_a = np.empty(0)
            owners_a = np.empty((0, 3), dtype=np.int64)
        out = _kernels.simulate_port(times_a, lens_a, float(port.capacity), port.w1, port.w2,
                                     pid in bg_ports, float(port.max_bg_frame), float(duration),
                                     gating == "open", int(queue_cap), bool(record))
        if out["status"] == _kernels.SIM_SATURATED:
            raise SaturationError(f"control queue exceeded {queue_cap} frames at "
                                  f"t={out['end_time']:.6f} s", hop=port_name(pid))
        for j, (fi, h, n) in enumerate(owners_a):
            depart[fi][n, h] = out["depart"][j]
        log = None
        if record:
            log = {k[4:]: v for k, v in out.items() if k.startswith("rec_")}
            log["arrival"] = times_a
            log["depart"] = out["depart"]
        stats[port_name(pid)] = PortStats(port_name(pid), out["ctrl_bits"], out["bg_bits"],
                                          out["visits"], log)

    traces = {}
    for fi, f in enumerate(control):
        traces[f.name] = FlowTrace(f.name, tuple(port_name(p) for p in f.path), ids[fi],
                                   f.source.frame_len, arrival[fi], depart[fi])
    return SimTrace(traces, dict(sorted(stats.items())), duration, seed,
                    {f.name: phases[f.name] for f in control})


def max_observed_delay(trace: SimTrace, flow: str) -> tuple[tuple[float, ...], float]:
    """Largest per-hop and end-to-end delay over the completed frames of ``flow``."""
    if flow not in trace.flows:
        raise UnknownFlowError(f"flow {flow!r} not in trace")
    ft = trace.flows[flow]
    done = ~np.isnan(ft.depart).any(axis=1)
    if not done.any():
        raise NoSamplesError(f"no completed frames for flow {flow!r}")
    per_hop = tuple(float(x) for x in ft.hop_delays[done].max(axis=0))
    return per_hop, float(ft.end_to_end[done].max())


def port_throughput(port: PortConfig, frame_len: float, cycles: int,
                    gating: str = "open") -> tuple[float, float]:
    """Long-run ``(control, background)`` rates with both queues saturated.

    The control queue is preloaded with enough frames to stay backlogged for
    ``cycles`` full WRR cycles.
    """
    cycle = (port.w1 * frame_len + port.w2 * port.max_bg_frame) / port.capacity
    horizon = cycles * cycle
    n = port.w1 * (cycles + 1)
    out = _kernels.simulate_port(np.zeros(n), np.full(n, float(frame_len)), float(port.capacity),
                                 port.w1, port.w2, True, float(port.max_bg_frame), horizon,
                                 gating == "open", n + 1, False)
    return out["ctrl_bits"] / horizon, out["bg_bits"] / horizon


def write_trace_csv(trace: SimTrace, fh: TextIO) -> None:
    """One row per frame and hop: ``frame_id,flow,hop,arrival_s,depart_s,delay_s``."""
    rows = []
    for name, ft in trace.flows.items():
        for i, fid in enumerate(ft.frame_ids):
            for h, hop in enumerate(ft.hops):
                rows.append((int(fid), h, name, hop, ft.arrival[i, h], ft.depart[i, h]))
    rows.sort(key=lambda r: (r[0], r[1]))
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["frame_id", "flow", "hop", "arrival_s", "depart_s", "delay_s"])
    for fid, _, name, hop, a, d in rows:
        w.writerow([fid, name, hop, f"{a:.9f}", f"{d:.9f}", f"{d - a:.9f}"])
