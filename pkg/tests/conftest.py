import sys

import numpy as np
import pytest

from psdyn.models import model_from_dict


@pytest.fixture(scope="session")
def linear_1d():
    # x' = p x
    return model_from_dict({"name": "lin", "dim": 1, "g": [[]], "B": [[1.0]],
                            "default_p": 1.0, "x0": [1.0]})


@pytest.fixture(scope="session")
def oscillator():
    # x1' = x2, x2' = -p x1 ; exact solution cos/sin for p = 1
    return model_from_dict({"name": "osc", "dim": 2, "g": [[[1.0, [0, 1]]], []],
                            "B": [[0.0, 0.0], [-1.0, 0.0]], "default_p": 1.0,
                            "x0": [1.0, 0.0]})


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
