import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tests.instances import line_metric, random_euclidean_metric
from tree_cover_toolkit.domain import (
    DegenerateMetricError,
    DisconnectedGraphError,
    FiniteMetric,
    MetricInvariantError,
    WeightedGraph,
    aspect_ratio,
    doubling_constant_estimate,
    doubling_constant_exact,
    is_ultrametric,
    metric_from_graph,
)
from tree_cover_toolkit.domain.metric import EXHAUSTIVE_RADII_LIMIT, candidate_radii


def test_matrix_is_frozen_and_symmetrized():
    d = np.array([[0.0, 1.0], [1.0 + 1e-12, 0.0]])
    m = FiniteMetric(d)
    assert m.dist[0, 1] == m.dist[1, 0]
    with pytest.raises(ValueError):
        m.dist[0, 1] = 5.0


@pytest.mark.parametrize(
    "matrix",
    [
        [[0.0, 1.0, 2.0], [1.0, 0.0, 1.0]],
        [[1.0, 1.0], [1.0, 0.0]],
        [[0.0, 1.0], [2.0, 0.0]],
        [[0.0, 0.0], [0.0, 0.0]],
        [[0.0, np.inf], [np.inf, 0.0]],
    ],
    ids=["not-square", "diagonal", "asymmetric", "coincident", "infinite"],
)
def test_invalid_matrices_rejected(matrix):
    with pytest.raises(MetricInvariantError):
        FiniteMetric(np.array(matrix))


def test_validate_finds_triangle_violation():
    m = FiniteMetric(np.array([[0.0, 1.0, 5.0], [1.0, 0.0, 1.0], [5.0, 1.0, 0.0]]))
    assert m.triangle_violations() == 2
    with pytest.raises(MetricInvariantError):
        m.validate()


def test_single_point_is_degenerate():
    m = FiniteMetric(np.zeros((1, 1)))
    assert m.d_max == 0.0
    with pytest.raises(DegenerateMetricError):
        _ = m.d_min
    with pytest.raises(DegenerateMetricError):
        aspect_ratio(m)
    assert doubling_constant_estimate(m) == 1
    assert doubling_constant_exact(m) == 1


def test_cycle_metric_from_graph(cycle6):
    assert cycle6.n == 6
    assert cycle6.dist[0, 3] == 3.0
    assert cycle6.dist[1, 5] == 2.0
    assert aspect_ratio(cycle6) == 3.0
    cycle6.validate()


def test_disconnected_graph_rejected():
    g = WeightedGraph(4, ((0, 1, 1.0), (2, 3, 1.0)))
    assert g.unreachable_vertex() == 2
    with pytest.raises(DisconnectedGraphError) as excinfo:
        metric_from_graph(g)
    assert excinfo.value.vertex == 2


@pytest.mark.parametrize(
    "edges",
    [((0, 0, 1.0),), ((0, 1, 1.0), (1, 0, 2.0)), ((0, 1, -1.0),), ((0, 3, 1.0),)],
    ids=["self-loop", "duplicate", "negative", "out-of-range"],
)
def test_bad_graph_edges_rejected(edges):
    with pytest.raises(MetricInvariantError):
        WeightedGraph(3, edges)


def test_networkx_round_trip_keeps_weights():
    g = nx.Graph()
    g.add_edge("a", "b", weight=2.5)
    g.add_edge("b", "c", weight=1.0)
    wg = WeightedGraph.from_networkx(g)
    assert wg.n == 3
    assert metric_from_graph(wg).dist[0, 2] == 3.5
    assert sorted(wg.to_networkx().edges(data="weight")) == [(0, 1, 2.5), (1, 2, 1.0)]


def test_induced_subgraph_relabels():
    g = WeightedGraph(4, ((0, 1, 1.0), (1, 2, 2.0), (2, 3, 3.0)))
    sub = g.induced_subgraph([2, 1])
    assert sub.n == 2
    assert sub.edges == ((1, 0, 2.0),)


def test_restrict_and_scale():
    m = line_metric(5)
    sub = m.restrict([0, 4])
    assert sub.dist[0, 1] == 4.0
    assert m.scaled(2.0).d_max == 8.0
    with pytest.raises(ValueError):
        m.scaled(0.0)


def test_ultrametric_detection():
    ultra = FiniteMetric(np.array([[0.0, 1.0, 4.0], [1.0, 0.0, 4.0], [4.0, 4.0, 0.0]]))
    assert is_ultrametric(ultra)
    assert not is_ultrametric(line_metric(3))


def test_line_doubling_constant():
    m = line_metric(5)
    assert doubling_constant_exact(m) == 3
    assert doubling_constant_estimate(m) >= 3


def test_exact_doubling_size_limit():
    with pytest.raises(ValueError):
        doubling_constant_exact(line_metric(17))


@settings(max_examples=15, deadline=None)
@given(n=st.integers(min_value=2, max_value=9), seed=st.integers(min_value=0, max_value=2**16))
def test_estimate_never_below_exact(n, seed):
    m = random_euclidean_metric(n, seed)
    assert doubling_constant_estimate(m) >= doubling_constant_exact(m)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**16))
def test_subsampled_radii_come_from_the_row(seed):
    m = random_euclidean_metric(EXHAUSTIVE_RADII_LIMIT + 16, seed)
    row = m.dist[0]
    distances = np.unique(row[row > 0])
    radii = candidate_radii(row, exhaustive=False)
    assert set(radii) <= set(distances)
    assert radii[0] == distances[0]
    assert radii[-1] == distances[-1]
    assert radii.size <= 4 * np.log2(distances[-1] / distances[0]) + 3


def test_exhaustive_radii_keep_every_distance():
    row = line_metric(6).dist[2]
    assert list(candidate_radii(row, exhaustive=True)) == [1.0, 2.0, 3.0]
