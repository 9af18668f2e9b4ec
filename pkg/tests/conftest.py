import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from temporder.dd_model import DDParams, generate
from temporder.graph_core import Graph, erdos_renyi_seed

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def small_dd(seed: int, n: int = 8, n0: int = 3, p: float = 0.4, r: float = 1.0, p0: float = 0.7) -> Graph:
    rng = np.random.default_rng(seed)
    g, _ = generate(DDParams(p, r, n, n0), erdos_renyi_seed(n0, p0, rng), rng)
    return g


@pytest.fixture
def fig3a():
    # seed triangle 0-1-2; node 3 hangs off 1, node 4 is isolated
    return Graph(5, [(0, 1), (0, 2), (1, 2), (1, 3)], n0=3)


# PASS/FAIL lines from the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
