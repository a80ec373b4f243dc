import networkx as nx
import pytest

from tests.instances import grid_graph, line_metric, random_euclidean_metric
from tree_cover_toolkit.domain import FiniteMetric, WeightedGraph, metric_from_graph


@pytest.fixture
def line16() -> FiniteMetric:
    return line_metric(16)


@pytest.fixture
def cycle6() -> FiniteMetric:
    return metric_from_graph(WeightedGraph.from_networkx(nx.cycle_graph(6)))


@pytest.fixture
def grid4() -> WeightedGraph:
    return grid_graph(4, 4)


@pytest.fixture
def grid4_metric(grid4: WeightedGraph) -> FiniteMetric:
    return metric_from_graph(grid4)


@pytest.fixture
def plane20() -> FiniteMetric:
    return random_euclidean_metric(20, seed=7)
