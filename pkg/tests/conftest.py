import sys

import numpy as np
import pytest

from pmlcorner.assembly import build_operators
from pmlcorner.damping import make_profile


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def reference_profile():
    """Constant sigma=25 PML of thickness 2 around [0, 18]^2."""
    return make_profile("constant", 25.0, (0.0, 18.0, 0.0, 18.0), 2.0)


@pytest.fixture(scope="session")
def reference_ops(reference_profile):
    p = reference_profile
    return build_operators(p.computational_domain, 0.5, 1, sigma_x=p.sigma_x, sigma_y=p.sigma_y)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
