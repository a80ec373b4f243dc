import itertools

import numpy as np
import pytest

from tests.instances import line_metric
from tree_cover_toolkit.domain import (
    ConstructionInvariantError,
    FiniteMetric,
    ParameterError,
    build_ladder,
    greedy_net,
    subnet_partition,
)
from tree_cover_toolkit.domain.nets import NetLadder


def test_greedy_net_on_line():
    m = line_metric(5)
    assert greedy_net(m, 1.0) == [0, 2, 4]
    assert greedy_net(m, 1.0, order=[4, 3, 2, 1, 0]) == [4, 2, 0]
    assert greedy_net(m, 10.0, seed=[3]) == [3]
    with pytest.raises(ParameterError):
        greedy_net(m, 0.0)


def test_ladder_levels_are_nested_nets(line16):
    ladder = build_ladder(line16, 0.1)
    assert (ladder.low, ladder.high) == (-3, 4)
    assert ladder.net(-3) == tuple(range(16))
    assert len(ladder.net(4)) == 1
    for i in ladder.scales:
        if i < ladder.high:
            assert set(ladder.net(i + 1)) <= set(ladder.net(i))
    ladder.check(line16)


def test_ladder_check_catches_bad_nets(line16):
    with pytest.raises(ConstructionInvariantError, match="separated"):
        NetLadder(0, 0, ((0, 1),)).check(line16)
    with pytest.raises(ConstructionInvariantError, match="cover"):
        NetLadder(0, 0, ((0,),)).check(line16)


def test_ladder_runs_and_dict(line16):
    ladder = build_ladder(line16, 0.1)
    data = ladder.to_dict()
    assert data["low"] == -3 and data["high"] == 4
    assert set(data["levels"]) == {str(i) for i in range(-3, 5)}
    runs = data["runs"]
    assert runs[0]["start"] == -3 and runs[-1]["end"] == 4
    assert sum(run["end"] - run["start"] + 1 for run in runs) == 8


@pytest.mark.parametrize("eps", [0.0, 0.125, 0.5])
def test_ladder_eps_range(line16, eps):
    with pytest.raises(ParameterError):
        build_ladder(line16, eps)


def test_single_point_ladder():
    ladder = build_ladder(FiniteMetric(np.zeros((1, 1))), 0.1)
    assert ladder.nets == ((0,),)


def test_subnet_classes_are_sparse(line16):
    eps = 0.1
    ladder = build_ladder(line16, eps)
    parts = subnet_partition(ladder, line16, eps, doubling_constant=3)
    assert parts.t >= 1
    for i in ladder.scales:
        separation = 6.0 / eps * 2.0**i
        for j in range(1, parts.t + 1):
            for x, y in itertools.combinations(parts.members(i, j), 2):
                assert line16.dist[x, y] >= separation * (1 - 1e-9)
    assert set(parts.point_class) == set(ladder.net(ladder.low))


def test_subnet_class_is_stable_across_levels(line16):
    ladder = build_ladder(line16, 0.1)
    parts = subnet_partition(ladder, line16, 0.1)
    for i in ladder.scales:
        for x in ladder.net(i):
            assert parts.class_of(i, x) == parts.point_class[x]
    with pytest.raises(KeyError):
        parts.class_of(ladder.high, 15)
    data = parts.to_dict()
    assert data["t"] == parts.t
