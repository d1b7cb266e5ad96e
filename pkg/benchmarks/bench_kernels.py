"""Compiled vs pure-Python kernel timings.

    python benchmarks/bench_kernels.py [--repeat N]

The scenario comparison runs the pure-Python case in a subprocess with
AFS_PACBF_PURE_PYTHON=1 so backend selection happens at import as usual.
"""

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from afs_pacbf import _pykernels

try:
    from afs_pacbf import _ckernels
except ImportError:
    _ckernels = None

SCENARIO = (
    "import json, time; from afs_pacbf.config import default_config; "
    "from afs_pacbf.scenario import run_scenario; "
    "r, s = run_scenario(default_config()); "
    "print(json.dumps({'backend': s.backend, 'steps': s.steps, 'wall': s.wall_clock_s}))"
)


def per_call(fn, args, repeat):
    t = timeit.Timer(lambda: fn(*args))
    n, _ = t.autorange()
    return min(t.repeat(repeat, n)) / n


def scenario(pure):
    env = dict(os.environ)
    if pure:
        env["AFS_PACBF_PURE_PYTHON"] = "1"
    else:
        env.pop("AFS_PACBF_PURE_PYTHON", None)
    out = subprocess.run([sys.executable, "-c", SCENARIO], env=env, check=True,
                         capture_output=True, text=True)
    return json.loads(out.stdout)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--skip-scenario", action="store_true")
    args = ap.parse_args()
    z = np.array([1.0, 0.5, 0.7, 0.1, 0.8, 0.1])
    chain = (z, 4.0, 4.5, 1.0, 2 ** 0.5, 0.5, 1.0, 1.0, 4.0, 4.0)
    step = (z, (0.9, 0.2), 0.01, 1.0, 1.0, 4.0, 4.0)
    mods = [("python", _pykernels)] + ([("cython", _ckernels)] if _ckernels else [])
    print(f"{'kernel':<14}" + "".join(f"{name:>14}" for name, _ in mods) + f"{'speedup':>10}")
    for label, fname, a in (("barrier_chain", "barrier_chain", chain), ("rk4_step", "rk4_step", step)):
        ts = [per_call(getattr(m, fname), a, args.repeat) for _, m in mods]
        speed = f"{ts[0] / ts[-1]:9.1f}x" if len(ts) > 1 else ""
        print(f"{label:<14}" + "".join(f"{t * 1e6:12.2f}us" for t in ts) + speed)
    if not args.skip_scenario:
        runs = [scenario(True)] + ([scenario(False)] if _ckernels else [])
        line = "".join(f"{r['wall']:13.2f}s" for r in runs)
        speed = f"{runs[0]['wall'] / runs[-1]['wall']:9.1f}x" if len(runs) > 1 else ""
        print(f"{'scenario':<14}{line}{speed}   ({runs[0]['steps']} steps)")


if __name__ == "__main__":
    main()
