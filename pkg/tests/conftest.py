import sys

import numpy as np
import pytest

from wci.measures import DiscreteMeasure


def random_measure(rng, k, d, uniform=False, scale=1.0):
    pts = rng.normal(scale=scale, size=(k, d))
    if uniform:
        w = np.full(k, 1.0 / k)
    else:
        w = rng.random(k) + 0.05
        w /= w.sum()
    return DiscreteMeasure(pts, w)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
