import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from lwvc import synthetic
from lwvc.media_io import Frame, VideoSequence

settings.register_profile(
    "default",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def random_clip(seed, width=64, height=64, frames=16, bit_depth=8):
    rng = np.random.default_rng(seed)
    top = (1 << bit_depth) - 1
    cw, ch = (width + 1) // 2, (height + 1) // 2
    fr = [
        Frame(
            rng.integers(0, top + 1, (height, width)),
            rng.integers(0, top + 1, (ch, cw)),
            rng.integers(0, top + 1, (ch, cw)),
            bit_depth,
        )
        for _ in range(frames)
    ]
    return VideoSequence(tuple(fr))


@pytest.fixture(scope="session")
def natural16():
    return synthetic.natural_clip(64, 64, 16, seed=7)


@pytest.fixture(scope="session")
def pan16():
    return synthetic.pan_clip(64, 64, 16, dx=1, dy=0, seed=3)


ACCEPTANCE_LINES = []


def record_acceptance(number, title, passed, detail=""):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {title}"
    if detail:
        line += f" ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
