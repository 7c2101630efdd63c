"""Time the hot kernels on the numba and the pure-numpy backend.

Each backend runs in its own interpreter because the choice is fixed at
import time (``LWVC_BACKEND``). Numba timings exclude compilation: every
kernel is called once before the clock starts.

    python3 benchmarks/bench_kernels.py [--size 64] [--repeat 3]
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from lwvc import codec, entropy, motion
from lwvc.synthetic import natural_clip

size, repeat = int(sys.argv[1]), int(sys.argv[2])
clip = natural_clip(size, size, 4, seed=1)
ref = clip.frames[0].luma.astype(np.int64)
cur = clip.frames[1].luma.astype(np.int64)
fld = motion.estimate_motion(ref, cur, 16, 2.0, 8)
hp = cur - motion.motion_compensate(ref, fld)
band = np.random.default_rng(0).laplace(0, 3, (size, size)).astype(np.int64)
cfg = codec.CodecConfig(gop=4, search_range=16)

cases = {
    "estimate_motion (range 16)": lambda: motion.estimate_motion(ref, cur, 16, 2.0, 8),
    "estimate_motion (range 4, full)": lambda: motion.estimate_motion(ref, cur, 4, 2.0, 8),
    "motion_compensate": lambda: motion.motion_compensate(ref, fld),
    "scatter_sums": lambda: motion.scatter_sums(hp, fld),
    "code_subband": lambda: entropy.code_subband(band),
    "encode GOP 4": lambda: codec.encode_sequence(clip, cfg),
}
out = {}
for name, fn in cases.items():
    fn()  # warm-up (numba compile / cache load)
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    out[name] = best
print(json.dumps(out))
"""


def run(backend, size, repeat):
    env = {**os.environ, "LWVC_BACKEND": backend}
    proc = subprocess.run(
        [sys.executable, "-c", WORKER, str(size), str(repeat)], capture_output=True, text=True, env=env
    )
    if proc.returncode:
        sys.exit(f"{backend} worker failed:\n{proc.stderr}")
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=64, help="square frame size in pixels (default 64)")
    ap.add_argument("--repeat", type=int, default=3, help="timed repetitions per kernel; best is kept (default 3)")
    args = ap.parse_args()
    nb = run("numba", args.size, args.repeat)
    npy = run("numpy", args.size, args.repeat)
    print(f"{'kernel':<34}{'numba ms':>12}{'numpy ms':>12}{'speedup':>10}")
    for name in nb:
        a, b = nb[name] * 1e3, npy[name] * 1e3
        print(f"{name:<34}{a:>12.2f}{b:>12.2f}{b / a:>9.1f}x")


if __name__ == "__main__":
    main()
