"""Pure-Python implementations of the hot kernels.

These mirror ``_ckernels.pyx`` line for line and are used whenever the
compiled extension is unavailable (or ``WRRBOUND_PURE=1`` is set).
Keep the two files in sync: the test-suite runs both and compares.
"""
import math

import numpy as np

BETA_RATE_LATENCY = 0
BETA_WRR = 1

SIM_OK = 0
SIM_SATURATED = 1


def _beta(kind, p0, p1, p2, u):
    if kind == BETA_RATE_LATENCY:
        x = u - p1
        return p0 * x if x > 0.0 else 0.0
    cycle = p0 + p1
    r = u / cycle
    ramp = p2 * (u - p0 * math.ceil(r))
    if ramp < 0.0:
        ramp = 0.0
    flat = p2 * p1 * math.floor(r)
    return ramp if ramp > flat else flat


def hdev_affine(kind, sigma, rho, p0, p1, p2, horizon, step, window, tol):
    """Grid-sampled horizontal deviation of ``sigma + rho*t`` against a beta.

    Returns the largest sampled delay, or -1.0 when the service curve does
    not reach the arrival curve within ``window`` of some sample.
    """
    n = int(math.floor(horizon / step + 1e-9))
    worst = 0.0
    for i in range(n + 1):
        t = i * step
        a = sigma + rho * t
        if _beta(kind, p0, p1, p2, t) >= a:
            continue
        lo = 0.0
        hi = step
        while _beta(kind, p0, p1, p2, t + hi) < a:
            lo = hi
            hi *= 2.0
            if hi >= window:
                hi = window
                if _beta(kind, p0, p1, p2, t + hi) < a:
                    return -1.0
                break
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if _beta(kind, p0, p1, p2, t + mid) >= a:
                hi = mid
            else:
                lo = mid
        if hi > worst:
            worst = hi
    return worst


def simulate_port(arr_t, arr_len, capacity, w1, w2, bg_saturated, bg_len,
                  horizon, gating_open, queue_cap, record):
    """Serve one WRR output port with a control queue and a background queue.

    ``arr_t`` must be sorted (ties already ordered by frame id).  Returns a
    dict with per-frame departure times, bits delivered per queue up to
    ``horizon`` and, when ``record`` is set, one row per transmission.
    """
    n = len(arr_t)
    depart = np.full(n, np.nan)
    weights = (w1, w2)
    nxt = 0
    head = 0
    now = 0.0
    q = 1
    served = 0
    limit = 0
    visits = 0
    bits = [0.0, 0.0]
    rec_start = []
    rec_end = []
    rec_queue = []
    rec_visit = []
    status = SIM_OK
    while True:
        while nxt < n and arr_t[nxt] <= now:
            nxt += 1
        backlog = nxt - head
        if backlog > queue_cap:
            status = SIM_SATURATED
            break
        if head == n and now >= horizon:
            break
        has = (backlog > 0, bg_saturated)
        if not (has[q] and served < limit):
            other = 1 - q
            if has[other]:
                q = other
            elif not has[q]:
                if nxt < n:
                    now = arr_t[nxt]
                    continue
                break
            served = 0
            visits += 1
            if q == 0 and not gating_open:
                limit = min(weights[0], backlog)
            else:
                limit = weights[q]
        if q == 0:
            tx = arr_len[head] / capacity
            depart[head] = now + tx
            length = arr_len[head]
            head += 1
        else:
            tx = bg_len / capacity
            length = bg_len
        end = now + tx
        if end <= horizon:
            bits[q] += length
        if record:
            rec_start.append(now)
            rec_end.append(end)
            rec_queue.append(q)
            rec_visit.append(visits)
        served += 1
        now = end
    out = {
        "status": status,
        "depart": depart,
        "ctrl_bits": bits[0],
        "bg_bits": bits[1],
        "end_time": now,
        "visits": visits,
        "backlog": nxt - head,
    }
    if record:
        out["rec_start"] = np.asarray(rec_start, dtype=float)
        out["rec_end"] = np.asarray(rec_end, dtype=float)
        out["rec_queue"] = np.asarray(rec_queue, dtype=np.int64)
        out["rec_visit"] = np.asarray(rec_visit, dtype=np.int64)
    return out
