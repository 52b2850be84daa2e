import numpy as np
import pytest

from crowdflow.mvfield import MotionField
from crowdflow.synth import generate, ring_scene, two_lane_scene


def field_from_angles(angles, magnitude=4.0):
    """Field whose cells point along ``angles`` (degrees) with a common magnitude."""
    t = np.radians(np.asarray(angles, dtype=float))
    mv = np.stack([magnitude * np.cos(t), magnitude * np.sin(t)], axis=-1)
    return MotionField.from_array(mv)


@pytest.fixture(scope="session")
def two_lane():
    return generate(two_lane_scene(seed=0))


@pytest.fixture(scope="session")
def ring():
    return generate(ring_scene(seed=0))


ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line per acceptance criterion for the terminal summary."""
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, [])

    def record(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(lines):
        terminalreporter.write_line(line)
