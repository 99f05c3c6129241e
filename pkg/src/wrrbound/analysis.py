"""Closed-form delay analysis of one WRR output port.

Two queues share the port: the control queue (weight ``w1``, frames of
``L`` bits) and a background queue (weight ``w2``, assumed always full of
maximum-length frames of ``Lbar`` bits).  The control flow is constrained
by an affine arrival curve.  Two regimes are analysed:

* burst phase: the queue holds the initial burst, so every cycle is one
  full background visit (``w2 * Lbar/C``) followed by ``w1`` control frames;
* mean phase: the queue empties every cycle and background visits repeat
  until the next control frame shows up.

The per-hop bound is the larger of the two phase bounds.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

from .curves import AffineArrivalCurve, RateLatencyCurve
from .errors import DomainError, InfeasibleError, MeanPhaseUndefined, SaturationError, UnstableError

# Guards integer rounding against representation error (e.g. 2.0000000000000004).
_REL_EPS = 1e-12

DEFAULT_W1_CAP = 64


def _ceil(x: float) -> int:
    return math.ceil(x - abs(x) * _REL_EPS)


def _floor(x: float) -> int:
    return math.floor(x + abs(x) * _REL_EPS)


class DepartureMode(str, enum.Enum):
    """How the output burst of a hop is computed.

    ``EQ12_MIN`` takes the smaller of the per-cycle quota ``w1*L`` and the
    deconvolution burst ``sigma + rho*w2*tau_bar``.  ``PAPER_CASE_STUDY``
    always takes ``w1*L``, which is what the two-switch case study uses.
    """

    EQ12_MIN = "eq12"
    PAPER_CASE_STUDY = "paper"


@dataclass(frozen=True)
class PortConfig:
    capacity: float
    w1: int
    w2: int
    max_bg_frame: float

    def __post_init__(self):
        for name in ("w1", "w2"):
            w = getattr(self, name)
            if isinstance(w, bool) or not isinstance(w, int):
                raise DomainError(f"{name} must be an integer, got {w!r}")
            if w < 1:
                raise DomainError(f"{name} must be >= 1, got {w}")
        if not self.capacity > 0:
            raise DomainError(f"capacity must be positive, got {self.capacity}")
        if not self.max_bg_frame > 0:
            raise DomainError(f"max background frame must be positive, got {self.max_bg_frame}")

    @property
    def tau_bar(self) -> float:
        """Transmission time of one maximum-length background frame."""
        return self.max_bg_frame / self.capacity

    def with_weights(self, w1: int | None = None, w2: int | None = None) -> "PortConfig":
        return PortConfig(self.capacity, self.w1 if w1 is None else w1,
                          self.w2 if w2 is None else w2, self.max_bg_frame)


@dataclass(frozen=True)
class ControlFlowAtPort:
    frame_len: float
    arrival: AffineArrivalCurve

    def __post_init__(self):
        if not self.frame_len > 0:
            raise DomainError(f"control frame length must be positive, got {self.frame_len}")
        if self.arrival.sigma < self.frame_len * (1 - _REL_EPS):
            raise DomainError(f"burst {self.arrival.sigma} smaller than one frame {self.frame_len}")

    @property
    def sigma(self) -> float:
        return self.arrival.sigma

    @property
    def rho(self) -> float:
        return self.arrival.rho


@dataclass(frozen=True)
class BurstPhaseResult:
    tau_v: float
    tau_f: float
    k: int
    drain_time: float


@dataclass(frozen=True)
class MeanPhaseResult:
    tau_v: float
    tau_f: float


@dataclass(frozen=True)
class HopDelayBound:
    burst_bound: float
    mean_bound: float
    pessimistic_mean_bound: float | None
    overall: float


def frame_service_time(length: float, capacity: float) -> float:
    if capacity <= 0:
        raise DomainError(f"capacity must be positive, got {capacity}")
    if length < 0:
        raise DomainError(f"frame length must be nonnegative, got {length}")
    return length / capacity


def _check_rate(port: PortConfig, flow: ControlFlowAtPort) -> None:
    if flow.rho >= port.capacity:
        raise UnstableError(f"arrival rate {flow.rho} b/s >= port capacity {port.capacity} b/s")


def drain_denominator(port: PortConfig, flow: ControlFlowAtPort) -> float:
    """Net bits drained per burst-phase cycle, as used by the cycle-count formula.

    ``C*w1*tau - rho*w2*tau_bar``, i.e. ``w1*L`` minus what arrives during
    one background visit.
    """
    return port.w1 * flow.frame_len - flow.rho * port.w2 * port.tau_bar


def conservative_drain_denominator(port: PortConfig, flow: ControlFlowAtPort) -> float:
    """Per-cycle balance that also charges arrivals during the forwarding slot."""
    tau = flow.frame_len / port.capacity
    return port.w1 * flow.frame_len - flow.rho * (port.w1 * tau + port.w2 * port.tau_bar)


def burst_cycles(port: PortConfig, flow: ControlFlowAtPort) -> int:
    denom = drain_denominator(port, flow)
    if denom <= 0:
        raise SaturationError(
            f"saturated: burst never drains (w1*L={port.w1 * flow.frame_len:.6g} bits per cycle "
            f"<= {flow.rho * port.w2 * port.tau_bar:.6g} bits arriving per vacation)")
    return max(1, _ceil(flow.sigma / denom))


def burst_phase(port: PortConfig, flow: ControlFlowAtPort, strict: bool = False) -> BurstPhaseResult:
    """Vacation/forwarding periods while the burst drains, and the cycles it takes.

    With ``strict=True`` the cycle count is recomputed with the conservative
    denominator and a warning is issued when the two disagree.
    """
    _check_rate(port, flow)
    tau_v = port.w2 * port.tau_bar
    tau_f = port.w1 * flow.frame_len / port.capacity
    k = burst_cycles(port, flow)
    if strict:
        cons = conservative_drain_denominator(port, flow)
        if cons <= 0:
            warnings.warn("conservative per-cycle balance says the burst never drains", RuntimeWarning)
        else:
            k_cons = max(1, _ceil(flow.sigma / cons))
            if k_cons != k:
                warnings.warn(f"burst cycle count {k} differs from conservative count {k_cons}",
                              RuntimeWarning)
    return BurstPhaseResult(tau_v, tau_f, k, k * (tau_v + tau_f))


def drain_weight_bound(port: PortConfig, flow: ControlFlowAtPort, k: int) -> float:
    """Smallest real ``w1`` that drains the burst in ``k`` cycles.

    ``(sigma + rho*k*w2*tau_bar) / (k*L - k*rho*tau)``; ``port.w1`` is ignored.
    """
    tau = flow.frame_len / port.capacity
    denom = k * (flow.frame_len - flow.rho * tau)
    if denom <= 0:
        raise SaturationError("control flow alone exceeds the port capacity (L <= rho*tau)")
    return (flow.sigma + flow.rho * k * port.w2 * port.tau_bar) / denom


def drain_holds(port: PortConfig, flow: ControlFlowAtPort, k: int) -> bool:
    """Check the burst-drain inequality for ``port.w1`` with ``k`` cycles held fixed."""
    return port.w1 >= drain_weight_bound(port, flow, k) * (1 - _REL_EPS)


def burst_fixed_point(port: PortConfig, flow: ControlFlowAtPort,
                      cap: int = DEFAULT_W1_CAP) -> tuple[int, int]:
    """Resolve the mutual dependency between ``w1`` and the cycle count ``k``.

    Starts from a single-cycle drain (``k = 1``), takes the smallest
    integer ``w1`` meeting the drain inequality (bumped until the cycle
    count is defined), recomputes ``k`` for that ``w1`` and repeats until
    ``k`` no longer changes.  ``w1`` can only go down and ``k`` only up, so
    the loop terminates.  Returns ``(w1, k)``.
    """
    _check_rate(port, flow)
    drain_weight_bound(port, flow, 1)  # raises when L <= rho*tau
    k = 1
    for _ in range(cap + 64):
        w1 = max(1, _ceil(drain_weight_bound(port, flow, k)))
        while drain_denominator(port.with_weights(w1=w1), flow) <= 0:
            w1 += 1
            if w1 > cap:
                break
        if w1 > cap:
            raise InfeasibleError(f"no burst-feasible w1 <= {cap} (w2={port.w2})")
        k_new = burst_cycles(port.with_weights(w1=w1), flow)
        if k_new == k:
            return w1, k
        k = k_new
    raise InfeasibleError("burst weight iteration did not settle")  # pragma: no cover


def min_weight_burst(port: PortConfig, flow: ControlFlowAtPort, cap: int = DEFAULT_W1_CAP) -> int:
    """Smallest control weight that drains the burst (``port.w1`` is ignored)."""
    return burst_fixed_point(port, flow, cap)[0]


def mean_phase(port: PortConfig, flow: ControlFlowAtPort) -> MeanPhaseResult:
    """Longest vacation between two periodic control frames and the matching forwarding time.

    The vacation is a whole number of background visits that fits in the
    interarrival gap ``L/rho - tau``; the forwarding time is what it takes
    to send the control traffic that arrived meanwhile,
    ``rho*tau_v/(C - rho)``.
    """
    if flow.rho <= 0:
        raise MeanPhaseUndefined("mean phase undefined for rho = 0; burst phase governs")
    _check_rate(port, flow)
    tau = flow.frame_len / port.capacity
    visit = port.w2 * port.tau_bar
    gap = flow.frame_len / flow.rho - tau
    if gap <= 0:
        raise DomainError("mean phase needs L/rho > tau")
    if not math.isfinite(gap / visit):
        raise MeanPhaseUndefined("mean phase undefined: rho too small for a finite interarrival gap")
    tau_v = _floor(gap / visit) * visit
    tau_f = flow.rho * tau_v / (port.capacity - flow.rho)
    return MeanPhaseResult(tau_v, tau_f)


def min_weight_mean(port: PortConfig, flow: ControlFlowAtPort) -> int:
    """Smallest ``w1`` whose forwarding slot ``w1*L/C`` covers the mean-phase ``tau_f``."""
    try:
        mp = mean_phase(port, flow)
    except MeanPhaseUndefined:
        return 1
    return max(1, _ceil(port.capacity * mp.tau_f / flow.frame_len))


def delay_bound_rate_latency(sigma: float, rho: float, rate: float, latency: float,
                             tau_i: float = 0.0) -> float:
    """``(T - tau_i) + (sigma + rho*tau_i)/R`` for an affine flow on a rate-latency server."""
    if rho >= rate:
        raise UnstableError(f"unstable: arrival rate {rho} >= service rate {rate}")
    if tau_i < 0:
        raise DomainError("tau_i must be nonnegative")
    return (latency - tau_i) + (sigma + rho * tau_i) / rate


def burst_service_curve(port: PortConfig, flow: ControlFlowAtPort) -> RateLatencyCurve:
    """Rate-latency curve ``w1*L/(w1*tau + w2*tau_bar) * (t - w2*tau_bar)+``."""
    tau = flow.frame_len / port.capacity
    rate = port.w1 * flow.frame_len / (port.w1 * tau + port.w2 * port.tau_bar)
    return RateLatencyCurve(rate, port.w2 * port.tau_bar)


def delay_bound_burst(port: PortConfig, flow: ControlFlowAtPort) -> float:
    burst_phase(port, flow)
    if flow.rho >= burst_service_curve(port, flow).rate:
        raise UnstableError(f"unstable: arrival rate {flow.rho} b/s exceeds the guaranteed "
                            f"WRR rate of the control queue")
    w1_l = port.w1 * flow.frame_len
    return (port.w2 * port.tau_bar
            + flow.sigma / port.capacity * (w1_l + port.w2 * port.max_bg_frame) / w1_l)


def delay_bound_mean(port: PortConfig, flow: ControlFlowAtPort) -> tuple[float, float | None]:
    """Return ``(refined, pessimistic)``.

    refined is one background visit plus one control frame; pessimistic is
    the full mean-phase vacation, or ``None`` when ``rho == 0``.
    """
    refined = port.w2 * port.tau_bar + flow.frame_len / port.capacity
    try:
        pessimistic = mean_phase(port, flow).tau_v
    except MeanPhaseUndefined:
        pessimistic = None
    return refined, pessimistic


def delay_bound_overall(port: PortConfig, flow: ControlFlowAtPort) -> HopDelayBound:
    burst = delay_bound_burst(port, flow)
    refined, pessimistic = delay_bound_mean(port, flow)
    return HopDelayBound(burst, refined, pessimistic, max(burst, refined))


def departure_curve(port: PortConfig, flow: ControlFlowAtPort,
                    mode: DepartureMode | str = DepartureMode.EQ12_MIN) -> AffineArrivalCurve:
    mode = DepartureMode(mode)
    burst_phase(port, flow)
    quota = port.w1 * flow.frame_len
    if mode is DepartureMode.PAPER_CASE_STUDY:
        return AffineArrivalCurve(quota, flow.rho)
    return AffineArrivalCurve(min(quota, flow.sigma + flow.rho * port.w2 * port.tau_bar), flow.rho)
