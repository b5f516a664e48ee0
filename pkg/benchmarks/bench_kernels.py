"""Time the RK4 kernels compiled with numba against the plain numpy path.

    python benchmarks/bench_kernels.py [--steps 20000] [--repeat 5]

The numpy timings come from a child process started with RMFRAME_NUMBA=0, so
every nested kernel call runs uncompiled as well.
"""

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

CASES = ("transport_euclid", "transport_hyp", "geodesic", "magnetic", "involute")


def _inputs(steps):
    from rmframe.core import EUCLID3, HYP3, CurveSpec, evaluate

    def half(curve):
        t0, t1 = curve.t_range
        ts = np.linspace(t0, t1, 2 * steps + 1)
        return evaluate(curve, ts, 0), evaluate(curve, ts, 1), evaluate(curve, ts, 2), (t1 - t0) / steps

    helix = CurveSpec.analytic("helix", EUCLID3, (0.0, 20.0))
    circle = CurveSpec.analytic("circle", HYP3, (0.0, 6.0), center=[0, 0, 1.0], radius=1.0)
    return {"helix": half(helix), "circle": half(circle)}


def run(steps, repeat):
    from rmframe import _kernels as K

    data = _inputs(steps)
    pe, ve, ae, he = data["helix"]
    ph, vh, ah, hh = data["circle"]
    calls = {
        "transport_euclid": lambda: K.transport(pe, ve, ae, np.array([1.0, 0, 0]), he, 0, True),
        "transport_hyp": lambda: K.transport(ph, vh, ah, np.array([0, 0, 1.0]), hh, 1, True),
        "geodesic": lambda: K.geodesic_halfspace(np.array([0, 0, 1.0]), np.array([0.6, 0, 0.8]), 3.0 / steps, steps),
        "magnetic": lambda: K.magnetic(np.full(2 * steps + 1, 2.0), np.zeros(4), np.array([1.0, 0, 0, 0]), 10.0 / steps),
        "involute": lambda: K.involute_lambda(ph, vh, ah, 10.0, hh),
    }
    out = {}
    for name in CASES:
        calls[name]()  # compile / warm up
        out[name] = min(timeit.repeat(calls[name], number=1, repeat=repeat))
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.child:
        print(json.dumps(run(args.steps, args.repeat)))
        return
    compiled = run(args.steps, args.repeat)
    env = dict(os.environ, RMFRAME_NUMBA="0")
    cmd = [sys.executable, __file__, "--child", "--steps", str(args.steps), "--repeat", str(max(1, args.repeat // 2))]
    plain = json.loads(subprocess.run(cmd, env=env, capture_output=True, text=True, check=True).stdout)
    print(f"RK4 kernels, {args.steps} steps (best of {args.repeat})")
    print(f"{'kernel':<18}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}")
    for name in CASES:
        a, b = compiled[name] * 1e3, plain[name] * 1e3
        print(f"{name:<18}{a:>12.2f}{b:>12.1f}{b / a:>9.0f}x")


if __name__ == "__main__":
    main()
