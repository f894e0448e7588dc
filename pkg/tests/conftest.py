import sys
import numpy as np
import pytest
from hypothesis import settings

from regtrace.ensemble import EnsembleSpec, sample_regular
from regtrace.graph_model import complete_graph, petersen_graph

settings.register_profile("default", deadline=None, max_examples=25)
settings.load_profile("default")


@pytest.fixture(scope="session")
def k4():
    return complete_graph(4)


@pytest.fixture(scope="session")
def petersen():
    return petersen_graph()


@pytest.fixture(scope="session")
def random_graphs():
    """A few non-bipartite connected regular graphs of mixed size and degree."""
    out = []
    for i, (V, d) in enumerate([(8, 3), (10, 4), (12, 3), (9, 4), (12, 5)]):
        out.append(sample_regular(EnsembleSpec(V, d, 1, seed=100 + i)))
    return out


def random_graph(V, d, seed):
    return sample_regular(EnsembleSpec(V, d, 1, seed=seed))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
