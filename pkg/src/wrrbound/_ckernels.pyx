# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_pykernels``.

Same algorithms, same return contracts; only typed.
"""
from libc.math cimport ceil, floor

import numpy as np
cimport numpy as cnp

cnp.import_array()

DEF BETA_RATE_LATENCY = 0


cdef inline double _beta(int kind, double p0, double p1, double p2, double u) nogil:
    cdef double x, r, ramp, flat
    if kind == BETA_RATE_LATENCY:
        x = u - p1
        return p0 * x if x > 0.0 else 0.0
    r = u / (p0 + p1)
    ramp = p2 * (u - p0 * ceil(r))
    if ramp < 0.0:
        ramp = 0.0
    flat = p2 * p1 * floor(r)
    return ramp if ramp > flat else flat


def hdev_affine(int kind, double sigma, double rho, double p0, double p1, double p2,
                double horizon, double step, double window, double tol):
    cdef long n = <long>floor(horizon / step + 1e-9)
    cdef long i
    cdef double worst = 0.0, t, a, lo, hi, mid
    with nogil:
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
                        worst = -1.0
                        break
                    break
            if worst < 0.0:
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


def simulate_port(arr_t_in, arr_len_in, double capacity, long w1, long w2,
                  bint bg_saturated, double bg_len, double horizon,
                  bint gating_open, long queue_cap, bint record):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] arr_t = np.ascontiguousarray(arr_t_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] arr_len = np.ascontiguousarray(arr_len_in, dtype=np.float64)
    cdef long n = arr_t.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] depart = np.full(n, np.nan)
    cdef long nxt = 0, head = 0, backlog, visits = 0
    cdef long served = 0, limit = 0
    cdef int q = 1, other, status = 0
    cdef double now = 0.0, tx, end, length
    cdef double ctrl_bits = 0.0, bg_bits = 0.0
    cdef bint has0, has_q, has_other
    rec_start = []
    rec_end = []
    rec_queue = []
    rec_visit = []
    while True:
        while nxt < n and arr_t[nxt] <= now:
            nxt += 1
        backlog = nxt - head
        if backlog > queue_cap:
            status = 1
            break
        if head == n and now >= horizon:
            break
        has0 = backlog > 0
        has_q = has0 if q == 0 else bg_saturated
        if not (has_q and served < limit):
            other = 1 - q
            has_other = has0 if other == 0 else bg_saturated
            if has_other:
                q = other
            elif not has_q:
                if nxt < n:
                    now = arr_t[nxt]
                    continue
                break
            served = 0
            visits += 1
            if q == 0:
                limit = w1 if gating_open or backlog > w1 else backlog
            else:
                limit = w2
        if q == 0:
            length = arr_len[head]
            tx = length / capacity
            depart[head] = now + tx
            head += 1
        else:
            length = bg_len
            tx = bg_len / capacity
        end = now + tx
        if end <= horizon:
            if q == 0:
                ctrl_bits += length
            else:
                bg_bits += length
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
        "ctrl_bits": ctrl_bits,
        "bg_bits": bg_bits,
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
