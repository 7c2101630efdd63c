"""The numba kernels and the pure-numpy fallback must agree bit for bit."""

import hashlib
import json
import os
import subprocess
import sys

import pytest

from lwvc import _accel

PROBE = r"""
import hashlib, json
import numpy as np
from lwvc import codec, entropy, motion
from lwvc.synthetic import natural_clip

def h(x):
    return hashlib.sha256(np.ascontiguousarray(x).tobytes() if isinstance(x, np.ndarray) else bytes(x)).hexdigest()

rng = np.random.default_rng(0)
big = natural_clip(48, 48, 2, seed=5)
ref, cur = big.frames[0].luma.astype(np.int64), big.frames[1].luma.astype(np.int64)
out = {}
out["me_full"] = h(motion.estimate_motion(ref, cur, 6, 2.0, 8).vectors)
fld = motion.estimate_motion(ref, cur, 20, 3.0, 8)
out["me_coarse"] = h(fld.vectors)
out["mc_int"] = h(motion.motion_compensate(ref, fld))
out["mc_float"] = h(motion.motion_compensate(ref.astype(float), fld))
num, den = motion.scatter_sums(cur - ref, fld)
out["scatter"] = h(num) + h(den)
bits = (rng.random(3000) < 0.8).astype(np.int64)
out["bits"] = h(entropy.encode_bits(bits))
band = rng.integers(-40, 40, (12, 12))
out["band"] = h(entropy.code_subband(band))
out["mv"] = h(entropy.code_motion_field(fld))
clip = natural_clip(16, 16, 4, seed=2)
out["stream"] = h(codec.encode_sequence(clip, codec.CodecConfig(gop=4, search_range=12)))
print(json.dumps(out))
"""


def _probe(backend):
    env = {**os.environ, "LWVC_BACKEND": backend}
    proc = subprocess.run([sys.executable, "-c", PROBE], capture_output=True, text=True, env=env, timeout=600)
    assert proc.returncode == 0, proc.stderr
    return json.loads(proc.stdout.strip().splitlines()[-1])


@pytest.mark.slow
def test_backends_agree():
    a = _probe("numba")
    b = _probe("numpy")
    assert a == b


def test_backend_flag_parsed():
    assert _accel.BACKEND in ("numba", "numpy")
    assert _accel.USE_NUMBA == (_accel.BACKEND == "numba")
