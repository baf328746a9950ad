import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


def make_soft_mask(rng, h=16, w=16):
    """Random soft mask quantized to the 8-bit grid (like a loaded PNG)."""
    return rng.integers(0, 256, (h, w)).astype(np.float64) / 255.0


def make_binary_mask(rng, h=16, w=16, density=0.5, non_degenerate=True):
    m = (rng.random((h, w)) < density).astype(np.float64)
    if non_degenerate:
        if not m.any():
            m[h // 2, w // 2] = 1.0
        if m.all():
            m[0, 0] = 0.0
    return m


def disk_mask(h, w, cy=None, cx=None, r=None):
    cy = h // 2 if cy is None else cy
    cx = w // 2 if cx is None else cx
    r = min(h, w) // 3 if r is None else r
    yy, xx = np.ogrid[:h, :w]
    return (((yy - cy) ** 2 + (xx - cx) ** 2) <= r * r).astype(np.float64)


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)


def pytest_runtest_logreport(report):
    # acceptance tests double as the sign-off checklist: one visible line each
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        print(f"\n[{report.outcome.upper()}] {name}", flush=True)
