"""Builders shared by unit and integration tests."""

import numpy as np

from src.graphs.graph import Graph


def make_graph(n, edges, directed=False, **kwargs):
    return Graph.from_edges(n, np.asarray(edges, dtype=np.int64).reshape(-1, 2), directed=directed, **kwargs)


def cycle(n, **kwargs):
    return make_graph(n, [[i, (i + 1) % n] for i in range(n)], **kwargs)


def complete(n, **kwargs):
    return make_graph(n, [[i, j] for i in range(n) for j in range(i + 1, n)], **kwargs)


def path(n, **kwargs):
    return make_graph(n, [[i, i + 1] for i in range(n - 1)], **kwargs)
