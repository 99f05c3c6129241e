"""Compare the compiled kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Both workloads come from the two-switch case study: the horizontal
deviation behind the switch-1 bound, and ten simulated seconds of the
switch-2 output port with a saturated background queue.
"""
import argparse
import statistics
import time

import numpy as np

from wrrbound import _kernels

C = 1e7
L = 576.0
LBAR = 12208.0
RHO = L / 5e-3


def hdev_job(mod):
    # sigma=L against the (2,1) rate-latency envelope, default grid scales
    rate = 2 * L / (2 * L / C + LBAR / C)
    lat = LBAR / C
    step = min(lat, L / rate) / 100
    horizon = (L + rate * lat) / (rate - RHO) + 10 * lat
    return mod.hdev_affine(_kernels.BETA_RATE_LATENCY, L, RHO, rate, lat, 0.0,
                           horizon, step, 1e4 * lat, step * 1e-3)


def sim_job(mod, seconds=10.0):
    arrivals = 0.0013 + 5e-3 * np.arange(int(seconds / 5e-3))
    lens = np.full(len(arrivals), L)
    out = mod.simulate_port(arrivals, lens, C, 9, 2, True, LBAR, seconds, True, 512, False)
    return out["ctrl_bits"]


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times), statistics.median(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    found = _kernels.backends()
    if "compiled" not in found:
        print("compiled extension not built; only the Python fallback is timed")
    results = {}
    for name, mod in found.items():
        results[name] = {
            "hdev": best_of(lambda: hdev_job(mod), args.repeat),
            "simulate_port": best_of(lambda: sim_job(mod), args.repeat),
        }
    # both backends must give the same numbers
    values = {name: (hdev_job(mod), sim_job(mod)) for name, mod in found.items()}
    if len(set(values.values())) != 1:
        raise SystemExit(f"backend results differ: {values}")

    print(f"{'kernel':<15}{'backend':<10}{'best [ms]':>12}{'median [ms]':>14}{'speedup':>10}")
    for job in ("hdev", "simulate_port"):
        base = results["python"][job][0]
        for name in found:
            best, med = results[name][job]
            print(f"{job:<15}{name:<10}{best * 1e3:>12.2f}{med * 1e3:>14.2f}{base / best:>9.1f}x")


if __name__ == "__main__":
    main()
