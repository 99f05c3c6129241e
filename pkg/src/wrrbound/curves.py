"""Arrival and service curves used by the WRR analysis.

Only the curve families needed here are supported: affine arrival curves,
rate-latency service curves and the periodic vacation/forwarding pattern
of a WRR queue.  All quantities are bits and seconds.

>>> eval_affine(AffineArrivalCurve(576.0, 115200.0), 5e-3)
1152.0
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from . import _kernels
from .errors import DomainError, SaturationError, UnstableError

Curve = Callable[[float], float]

#: Search window for the delay scan, in service cycles.
SATURATION_CYCLES = 1e4


def _check_t(t: float) -> None:
    if t < 0 or math.isnan(t):
        raise DomainError(f"curve evaluated at negative time t={t!r}")


@dataclass(frozen=True)
class AffineArrivalCurve:
    """Token-bucket envelope ``sigma + rho*t``."""

    sigma: float
    rho: float

    def __post_init__(self):
        if not (self.sigma >= 0 and self.rho >= 0):
            raise DomainError(f"affine curve needs sigma, rho >= 0, got {self.sigma}, {self.rho}")

    def __call__(self, t: float) -> float:
        return eval_affine(self, t)


@dataclass(frozen=True)
class PeriodicSource:
    """A station emitting one ``frame_len``-bit frame every ``period`` seconds."""

    frame_len: float
    period: float

    def __post_init__(self):
        if self.period <= 0:
            raise DomainError(f"period must be positive, got {self.period}")
        if self.frame_len < 0:
            raise DomainError(f"frame length must be nonnegative, got {self.frame_len}")


@dataclass(frozen=True)
class RateLatencyCurve:
    rate: float
    latency: float

    def __post_init__(self):
        if not (self.rate > 0 and self.latency >= 0):
            raise DomainError(f"rate-latency curve needs rate > 0, latency >= 0, "
                              f"got {self.rate}, {self.latency}")

    def __call__(self, t: float) -> float:
        return eval_rate_latency(self, t)


@dataclass(frozen=True)
class WrrServicePattern:
    """Service offered to a queue that waits ``tau_v`` then sends for ``tau_f``."""

    tau_v: float
    tau_f: float
    capacity: float

    def __post_init__(self):
        if not (self.tau_v >= 0 and self.tau_f > 0 and self.capacity > 0):
            raise DomainError(f"invalid WRR pattern tau_v={self.tau_v}, tau_f={self.tau_f}, "
                              f"C={self.capacity}")

    @property
    def cycle(self) -> float:
        return self.tau_v + self.tau_f

    @property
    def mean_rate(self) -> float:
        return self.capacity * self.tau_f / self.cycle

    def lower_envelope(self) -> RateLatencyCurve:
        """Rate-latency curve lying under the pattern everywhere."""
        return RateLatencyCurve(self.mean_rate, self.tau_v)

    def __call__(self, t: float) -> float:
        return eval_wrr_service(self, t)


@dataclass(frozen=True)
class CurveSample:
    t: float
    value: float


def eval_affine(curve: AffineArrivalCurve, t: float) -> float:
    _check_t(t)
    return curve.sigma + curve.rho * t


def affine_from_periodic(src: PeriodicSource) -> AffineArrivalCurve:
    """Token bucket of a periodic source: one frame of burst, ``L/T`` of rate."""
    if src.period <= 0:
        raise DomainError(f"period must be positive, got {src.period}")
    return AffineArrivalCurve(src.frame_len, src.frame_len / src.period)


def eval_wrr_service(p: WrrServicePattern, t: float) -> float:
    """Evaluate ``max(C(t - tau_v*ceil(t/c))+, C*tau_f*floor(t/c))`` with ``c = tau_v + tau_f``."""
    _check_t(t)
    r = t / p.cycle
    ramp = max(0.0, p.capacity * (t - p.tau_v * math.ceil(r)))
    flat = p.capacity * p.tau_f * math.floor(r)
    return max(ramp, flat)


def eval_rate_latency(c: RateLatencyCurve, t: float) -> float:
    _check_t(t)
    return c.rate * max(0.0, t - c.latency)


def sample(curve: Curve, horizon: float, step: float) -> list[CurveSample]:
    """Evaluate ``curve`` on ``0, step, ..., horizon``."""
    if step <= 0:
        raise DomainError("step must be positive")
    n = int(math.floor(horizon / step + 1e-9))
    return [CurveSample(i * step, curve(i * step)) for i in range(n + 1)]


def _scales(alpha, beta) -> tuple[float, float, float]:
    """Characteristic (step, horizon, window) for a curve pair.

    step is a hundredth of the smallest of vacation, forwarding and burst
    transmission time; horizon runs ten cycles past the point where the
    rate-latency envelope of ``beta`` catches up with ``alpha``.
    """
    sigma = getattr(alpha, "sigma", 0.0)
    rho = getattr(alpha, "rho", 0.0)
    if isinstance(beta, WrrServicePattern):
        cycle = beta.cycle
        parts = [beta.tau_v, beta.tau_f, sigma / beta.capacity]
        env = beta.lower_envelope()
    elif isinstance(beta, RateLatencyCurve):
        env = beta
        cycle = max(beta.latency, sigma / beta.rate)
        parts = [beta.latency, sigma / beta.rate]
    else:
        raise DomainError("default step/horizon only known for rate-latency and WRR curves")
    positive = [x for x in parts if x > 0]
    if not positive:
        positive = [1e-6]
    if cycle <= 0:
        cycle = min(positive)
    step = min(positive) / 100.0
    if env.rate <= rho:
        drain = 0.0
    else:
        drain = (sigma + env.rate * env.latency) / (env.rate - rho)
    return step, drain + 10.0 * cycle, SATURATION_CYCLES * cycle


def default_step(alpha, beta) -> float:
    return _scales(alpha, beta)[0]


def default_horizon(alpha, beta) -> float:
    return _scales(alpha, beta)[1]


def horizontal_deviation(alpha, beta, horizon: float | None = None, step: float | None = None,
                         window: float | None = None, tol: float | None = None) -> float:
    """Largest delay ``inf{d >= 0 : alpha(t) <= beta(t + d)}`` over a time grid.

    The grid is ``0, step, ..., horizon``; each inner infimum is bracketed by
    doubling and then bisected to ``tol`` (default ``step/1000``), always
    keeping the upper end, so the result never underestimates a sampled
    delay.  Affine arrivals against rate-latency or WRR service go through
    the compiled kernel; any other pair of callables is scanned in Python.

    :raises SaturationError: ``beta`` stays below ``alpha(t)`` for the
        whole search window at some sample.
    """
    if horizon is None or step is None or window is None:
        d_step, d_horizon, d_window = _scales(alpha, beta)
        step = d_step if step is None else step
        horizon = d_horizon if horizon is None else horizon
        window = d_window if window is None else window
    if step <= 0 or horizon < 0:
        raise DomainError("horizontal deviation needs step > 0 and horizon >= 0")
    if tol is None:
        tol = step * 1e-3

    if isinstance(alpha, AffineArrivalCurve) and isinstance(beta, (RateLatencyCurve, WrrServicePattern)):
        if isinstance(beta, RateLatencyCurve):
            args = (_kernels.BETA_RATE_LATENCY, beta.rate, beta.latency, 0.0)
        else:
            args = (_kernels.BETA_WRR, beta.tau_v, beta.tau_f, beta.capacity)
        kind, p0, p1, p2 = args
        d = _kernels.hdev_affine(kind, alpha.sigma, alpha.rho, p0, p1, p2,
                                 horizon, step, window, tol)
    else:
        d = _scan(alpha, beta, horizon, step, window, tol)
    if d < 0:
        raise SaturationError("server saturated: service never reaches the arrival curve "
                              "within the search window")
    return d


def _scan(alpha: Curve, beta: Curve, horizon: float, step: float, window: float, tol: float) -> float:
    worst = 0.0
    for pt in sample(alpha, horizon, step):
        t, a = pt.t, pt.value
        if beta(t) >= a:
            continue
        lo, hi = 0.0, step
        while beta(t + hi) < a:
            lo, hi = hi, 2.0 * hi
            if hi >= window:
                hi = window
                if beta(t + hi) < a:
                    return -1.0
                break
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if beta(t + mid) >= a:
                hi = mid
            else:
                lo = mid
        worst = max(worst, hi)
    return worst


def deconvolve_affine_ratelatency(alpha: AffineArrivalCurve, beta: RateLatencyCurve) -> AffineArrivalCurve:
    """Output envelope of an affine flow crossing a rate-latency server.

    The burst grows by what arrives during the latency: ``sigma + rho*T``.
    """
    if alpha.rho >= beta.rate:
        raise UnstableError(f"unstable system: arrival rate {alpha.rho} >= service rate {beta.rate}")
    return AffineArrivalCurve(alpha.sigma + alpha.rho * beta.latency, alpha.rho)
