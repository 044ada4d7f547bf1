import pytest

from expander_cs import BipartiteGraph


@pytest.fixture
def disjoint_graph() -> BipartiteGraph:
    """n=4, m=8, d=2, row i = {2i, 2i+1}: disjoint neighborhoods, a
    perfect expander (worst ratio exactly 1)."""
    return BipartiteGraph(4, 8, 2, tuple((2 * i, 2 * i + 1) for i in range(4)), right_degree=1)


@pytest.fixture
def colliding_graph() -> BipartiteGraph:
    """Two identical columns: the canonical non-expander."""
    return BipartiteGraph(2, 2, 2, ((0, 1), (0, 1)))
