"""Time the hot kernels with and without numba.

Each backend runs in a fresh interpreter because the backend is chosen at
import time from COLLECTIVE_QUBIT_NUMBA.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time

WORKER = r"""
import json, sys, time
import numpy as np
from collective_qubit import emission, geometry, kernels
from collective_qubit.dynamics import PulseConfig, integrate_transfer

repeat = int(sys.argv[1])
trap = geometry.FIG3_TRAP
kv = emission.WaveVectors.for_wavelength(trap.wavelength)
sample = emission.sample_positions(trap, 1000, seed=7)

def best(fn):
    fn()  # warm-up, includes JIT compilation
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out

grid = emission._grid(-1.0, 128, 128)
t_ff, ff = best(lambda: emission._intensity_on(sample, kv, grid[0], grid[1]))
t_pp, pp = best(lambda: emission.total_power(sample, kv))
pulse = PulseConfig.operating_point(20.0)
t_ode, res = best(lambda: integrate_transfer(pulse))
print(json.dumps({
    "backend": kernels.backend_name(),
    "far_field_128x128_N1000_s": t_ff,
    "pair_sum_N1000_s": t_pp,
    "transfer_ode_s": t_ode,
    "checksum": [float(ff.sum()), float(pp), float(res.p_remain)],
}))
"""


def run(flag: str, repeat: int) -> dict:
    env = dict(os.environ, COLLECTIVE_QUBIT_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    t0 = time.perf_counter()
    results = [run("1", args.repeat), run("0", args.repeat)]
    keys = [k for k in results[0] if k.endswith("_s")]
    print(f"{'kernel':28s} " + " ".join(f"{r['backend']:>12s}" for r in results) + "   speedup")
    for k in keys:
        a, b = results[0][k], results[1][k]
        print(f"{k:28s} {a:12.4g} {b:12.4g}   {b / a:7.1f}x")
    ca, cb = results[0]["checksum"], results[1]["checksum"]
    agree = all(abs(x - y) <= 1e-9 * max(1.0, abs(y)) for x, y in zip(ca, cb))
    print(f"backends agree: {agree}   (total {time.perf_counter() - t0:.1f} s)")


if __name__ == "__main__":
    main()
