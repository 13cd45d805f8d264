import numpy as np
import pytest

from robustlab import build_graph, gen_gnp, gen_paley


def complete_graph(n):
    return build_graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def cycle_graph(n):
    return build_graph(n, [(i, (i + 1) % n) for i in range(n)])


def path_graph(n):
    return build_graph(n, [(i, i + 1) for i in range(n - 1)])


def petersen_graph():
    outer = [(i, (i + 1) % 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    return build_graph(10, outer + inner + spokes)


@pytest.fixture(scope="session")
def petersen():
    return petersen_graph()


@pytest.fixture(scope="session")
def paley13():
    return gen_paley(13)


@pytest.fixture(scope="session")
def k5():
    return complete_graph(5)


@pytest.fixture(scope="session")
def k6():
    return complete_graph(6)


def random_small_graphs(count, n_max=12, seed=0, n_min=2):
    """Deterministic corpus of small G(n,p) instances for oracle suites."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        n = int(rng.integers(n_min, n_max + 1))
        p = float(rng.uniform(0.1, 0.9))
        out.append(gen_gnp(n, p, seed=int(rng.integers(2**63))))
    return out
