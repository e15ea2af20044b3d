import numpy as np
import pytest

from secl.graphs import Graph


@pytest.fixture
def two_node_graph():
    return Graph(n=2, edges=np.array([[0, 1]]), attributes=np.eye(2))


@pytest.fixture
def triangle():
    return Graph(n=3, edges=np.array([[0, 1], [1, 2], [0, 2]]), attributes=np.eye(3))


@pytest.fixture
def path3():
    return Graph(n=3, edges=np.array([[0, 1], [1, 2]]), attributes=np.eye(3))


@pytest.fixture
def two_triangles():
    edges = np.array([[0, 1], [1, 2], [0, 2], [3, 4], [4, 5], [3, 5]])
    return Graph(n=6, edges=edges, attributes=np.eye(6),
                 labels=np.array([0, 0, 0, 1, 1, 1]))
