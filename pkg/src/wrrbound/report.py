"""Render analysis, optimization and simulation results.

Delays are printed in microseconds with one decimal, bandwidths in Mb/s
with three, bits with two.  Python's float formatting rounds the exact
binary value half-to-even, so the machine output is reproducible across
runs and platforms.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from .optimizer import WeightPlan
from .topology import PathReport


def us(x: float) -> str:
    return f"{x * 1e6:.1f}"


def mbps(x: float) -> str:
    return f"{x / 1e6:.3f}"


def bits(x: float) -> str:
    return f"{x:.2f}"


def _csv(header: list[str], rows: list[list[str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _table(header: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(str(r[i])) for r in [header] + rows) for i in range(len(header))]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for r in rows:
        lines.append("  ".join(str(c).rjust(w) if i else str(c).ljust(w)
                               for i, (c, w) in enumerate(zip(r, widths))).rstrip())
    return "\n".join(lines) + "\n"


ANALYZE_HEADER = ["flow", "hop", "sigma_in_bits", "rho_in_bps", "burst_bound_us", "mean_bound_us",
                  "pessimistic_mean_us", "overall_us", "sigma_out_bits", "bg_bandwidth_mbps",
                  "deadline_us", "deadline_met"]


def analyze_rows(reports: list[PathReport]) -> list[list[str]]:
    rows = []
    for r in reports:
        for h in r.hops:
            pess = "" if h.bound.pessimistic_mean_bound is None else us(h.bound.pessimistic_mean_bound)
            rows.append([r.flow, h.hop, bits(h.arrival.sigma), f"{h.arrival.rho:.1f}",
                         us(h.bound.burst_bound), us(h.bound.mean_bound), pess, us(h.bound.overall),
                         bits(h.departure.sigma), mbps(h.bg_bandwidth), "", ""])
        rows.append([r.flow, "TOTAL", "", "", "", "", "", us(r.end_to_end), "", mbps(r.min_bg_bandwidth),
                     "" if r.deadline is None else us(r.deadline), "yes" if r.deadline_met else "no"])
    return rows


def render_analyze(reports: list[PathReport], fmt: str, failures: dict[str, str] | None = None) -> str:
    if fmt == "csv":
        return _csv(ANALYZE_HEADER, analyze_rows(reports))
    out = []
    for r in reports:
        rows = [[h.hop, bits(h.arrival.sigma), f"{h.arrival.rho / 1e3:.1f}", us(h.bound.burst_bound),
                 us(h.bound.mean_bound), us(h.bound.overall), bits(h.departure.sigma),
                 mbps(h.bg_bandwidth)] for h in r.hops]
        out.append(f"flow {r.flow}\n")
        out.append(_table(["hop", "sigma in [bit]", "rho [kb/s]", "burst [us]", "mean [us]",
                           "bound [us]", "sigma out [bit]", "background [Mb/s]"], rows))
        verdict = "met" if r.deadline_met else "MISSED"
        dl = "none" if r.deadline is None else f"{us(r.deadline)} us"
        out.append(f"end-to-end bound {us(r.end_to_end)} us, deadline {dl} ({verdict}); "
                   f"path background bandwidth {mbps(r.min_bg_bandwidth)} Mb/s\n\n")
    for name, msg in (failures or {}).items():
        out.append(f"flow {name}: no bound ({msg})\n")
    return "".join(out)


OPTIMIZE_HEADER = ["flow", "hop", "w1", "w2", "overall_us", "bg_bandwidth_mbps", "feasible", "code"]


def render_optimize(flow: str, plan: WeightPlan, fmt: str) -> str:
    rows = []
    if plan.report is not None:
        for h in plan.report.hops:
            pid_w = next(w for p, w in plan.assignments.items() if f"{p[0]}.{p[1]}" == h.hop)
            rows.append([flow, h.hop, str(pid_w[0]), str(pid_w[1]), us(h.bound.overall),
                         mbps(h.bg_bandwidth), "", ""])
    total = "" if plan.end_to_end_bound == float("inf") else us(plan.end_to_end_bound)
    rows.append([flow, "TOTAL", "", "", total, mbps(plan.min_bg_bandwidth) if plan.report else "",
                 "yes" if plan.feasible else "no", plan.code or ""])
    if fmt == "csv":
        return _csv(OPTIMIZE_HEADER, rows)
    text = [f"flow {flow}: {'feasible' if plan.feasible else 'INFEASIBLE'}\n"]
    text.append(_table(["hop", "w1", "w2", "bound [us]", "background [Mb/s]"],
                       [r[1:6] for r in rows[:-1]]) if len(rows) > 1 else "")
    if plan.report is not None:
        text.append(f"end-to-end bound {total} us; path background bandwidth "
                    f"{mbps(plan.min_bg_bandwidth)} Mb/s\n")
    if not plan.feasible:
        text.append(f"{plan.code}\n")
        text.extend(f"  {b}\n" for b in plan.binding)
    return "".join(text)


@dataclass
class SimRow:
    flow: str
    hop: str
    seeds: int
    samples: int
    max_observed: float
    bound: float | None

    @property
    def within(self) -> bool:
        return self.bound is None or self.max_observed <= self.bound


SIMULATE_HEADER = ["flow", "hop", "seeds", "samples", "max_observed_us", "bound_us", "within_bound"]


def render_simulate(rows: list[SimRow], fmt: str, notes: list[str] | None = None) -> str:
    cells = [[r.flow, r.hop, str(r.seeds), str(r.samples), f"{r.max_observed * 1e6:.3f}",
              "" if r.bound is None else us(r.bound), "yes" if r.within else "no"] for r in rows]
    if fmt == "csv":
        return _csv(SIMULATE_HEADER, cells)
    text = _table(["flow", "hop", "seeds", "samples", "max observed [us]", "bound [us]", "ok"], cells)
    return text + "".join(f"{n}\n" for n in (notes or []))
