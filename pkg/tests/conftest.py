import numpy as np
import pytest
from hypothesis import settings

from biomaudit.ingest import KP_INDEX, KeypointSet
from biomaudit.synthetic import make_dataset

settings.register_profile("biomaudit", max_examples=60, deadline=None)
settings.load_profile("biomaudit")


def make_kp(conf=0.5, **points):
    """KeypointSet with every keypoint at the origin except ``points``:
    ``name=(x, y)`` or ``name=(x, y, conf)``."""
    arr = np.zeros((17, 3))
    arr[:, 2] = conf
    for name, p in points.items():
        arr[KP_INDEX[name], : len(p)] = p
    return KeypointSet(arr)


@pytest.fixture(scope="session")
def synthetic_data(tmp_path_factory):
    root = tmp_path_factory.mktemp("synthetic")
    return make_dataset(root / "data", n=50, seed=3)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
