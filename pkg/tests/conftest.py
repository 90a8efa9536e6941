import itertools
import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from graphlay.graph import Graph

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def path_graph(n):
    return Graph(n, tuple((i, i + 1) for i in range(n - 1)))


def cycle_graph(n):
    return Graph(n, tuple((i, (i + 1) % n) for i in range(n)))


def complete_graph(n):
    return Graph(n, tuple(itertools.combinations(range(n), 2)))


def star_graph(leaves):
    return Graph(leaves + 1, tuple((0, i) for i in range(1, leaves + 1)))


def grid_graph(rows, cols):
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return Graph(rows * cols, tuple(edges))


def barbell():
    """Two triangles joined by the bridge 2-3."""
    return Graph(6, ((0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (3, 5), (4, 5)))


def random_connected(n, rng, extra=0.3):
    edges = {(int(rng.integers(v)), v) for v in range(1, n)}
    for _ in range(int(extra * n)):
        i, j = sorted(rng.choice(n, size=2, replace=False).tolist())
        edges.add((i, j))
    return Graph(n, tuple(edges))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
