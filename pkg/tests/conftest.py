import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from memesim import _accel  # noqa: E402
from memesim.graph import Graph  # noqa: E402

BACKENDS = [b for b in _accel.BACKENDS if b != "numba" or _accel.HAVE_NUMBA]

# filled by test_acceptance, printed at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


def clique(n, offset=0):
    return [(offset + i, offset + j) for i in range(n) for j in range(i + 1, n)]


def make_graph(n, edges, directed=False):
    src = [u for u, _ in edges]
    dst = [v for _, v in edges]
    return Graph.from_edges(n, src, dst, directed=directed)


@pytest.fixture
def two_k4_bridge():
    edges = clique(4) + clique(4, 4) + [(3, 4)]
    return make_graph(8, edges), edges


@pytest.fixture
def two_triangles():
    edges = clique(3) + clique(3, 3)
    return make_graph(6, edges), edges


def random_small_graph(rng, max_nodes=8):
    n = int(rng.integers(1, max_nodes + 1))
    p = rng.uniform(0.1, 0.9)
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    return n, edges


@pytest.fixture(scope="session")
def desk_sccp():
    """The ~4000-node configuration used throughout the desk-scale experiments."""
    from memesim.generate import SccpParams, generate_sccp

    return generate_sccp(SccpParams(k=11, s=8, t=355, f=0.7, r1=2, r2=10, rng_seed=1))


@pytest.fixture(scope="session")
def desk_er(desk_sccp):
    from memesim.generate import er_baseline
    from memesim.structure import analyze

    g = er_baseline(desk_sccp.graph, rng_seed=1)
    return g, analyze(g)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
