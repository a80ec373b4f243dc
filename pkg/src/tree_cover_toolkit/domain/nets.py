"""
Greedy nets, hierarchical net ladders and separated sub-net partitions.
"""
import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from .errors import ConstructionInvariantError, ParameterError
from .metric import REL_TOL, FiniteMetric

logger = logging.getLogger(__name__)

ASSERT_LIMIT = 500


def greedy_net(
    m: FiniteMetric,
    r: float,
    order: Iterable[int] | None = None,
    seed: Sequence[int] = (),
) -> list[int]:
    """
    Greedy r-net: scan points in order and keep a point iff it is farther than r
    from every point kept so far.

    Args:
        m: Metric
        r: Net radius (> 0)
        order: Scan order, ascending index by default
        seed: Points kept before the scan starts (assumed r-separated)

    Returns:
        Net points, seed first, then in scan order
    """
    if r <= 0:
        raise ParameterError(f"net radius must be positive, got {r}")
    net = list(seed)
    if m.n == 0:
        return net
    nearest = np.full(m.n, np.inf)
    for s in net:
        nearest = np.minimum(nearest, m.dist[s])
    threshold = r * (1.0 + REL_TOL)
    for x in order if order is not None else range(m.n):
        if nearest[x] > threshold:
            net.append(int(x))
            nearest = np.minimum(nearest, m.dist[x])
    return net


@dataclass(frozen=True)
class NetLadder:
    """Nested 2^i-nets for i in low..high; nets[i - low] is sorted."""
    low: int
    high: int
    nets: tuple[tuple[int, ...], ...]

    @property
    def scales(self) -> range:
        return range(self.low, self.high + 1)

    def net(self, i: int) -> tuple[int, ...]:
        return self.nets[i - self.low]

    def run_lengths(self) -> list[dict]:
        """Runs of consecutive levels with identical nets."""
        runs: list[dict] = []
        for i in self.scales:
            if runs and self.net(i) == self.net(runs[-1]["end"]):
                runs[-1]["end"] = i
            else:
                runs.append({"start": i, "end": i, "size": len(self.net(i))})
        return runs

    def check(self, m: FiniteMetric) -> None:
        """
        Enumerate packing, covering and nesting at every level.

        Raises:
            ConstructionInvariantError: On the first violated property
        """
        for i in self.scales:
            members = np.asarray(self.net(i), dtype=np.intp)
            r = 2.0**i
            sub = m.dist[np.ix_(members, members)]
            off = ~np.eye(members.size, dtype=bool)
            if np.any(sub[off] <= r * (1.0 + REL_TOL)):
                raise ConstructionInvariantError(f"net at level {i} is not {r}-separated")
            if np.any(m.dist[:, members].min(axis=1) > r * (1.0 + REL_TOL)):
                raise ConstructionInvariantError(f"net at level {i} does not {r}-cover the metric")
            if i < self.high and not set(self.net(i + 1)) <= set(self.net(i)):
                raise ConstructionInvariantError(f"net at level {i + 1} is not inside level {i}")

    def to_dict(self) -> dict:
        return {
            "low": self.low,
            "high": self.high,
            "levels": {str(i): list(self.net(i)) for i in self.scales},
            "runs": self.run_lengths(),
        }


def ladder_range(m: FiniteMetric, eps: float) -> tuple[int, int]:
    if m.n < 2:
        return 0, 0
    low = math.ceil(math.log2(eps * m.d_min))
    high = math.ceil(math.log2(m.d_max))
    return low, high


def build_ladder(m: FiniteMetric, eps: float) -> NetLadder:
    """
    Hierarchical net ladder over scales ceil(log2(eps*d_min))..ceil(log2(d_max)).

    Each level is seeded with the level above, which makes the nets nested.

    Raises:
        ParameterError: If eps is outside (0, 1/8)
    """
    if not 0 < eps < 1 / 8:
        raise ParameterError(f"ladder eps must lie in (0, 1/8), got {eps}")
    low, high = ladder_range(m, eps)
    if m.n == 1:
        return NetLadder(0, 0, ((0,),))
    levels: dict[int, tuple[int, ...]] = {}
    above: list[int] = []
    for i in range(high, low - 1, -1):
        above = greedy_net(m, 2.0**i, seed=above)
        levels[i] = tuple(sorted(above))
    ladder = NetLadder(low, high, tuple(levels[i] for i in range(low, high + 1)))
    if m.n <= ASSERT_LIMIT:
        ladder.check(m)
    logger.debug(f"Net ladder over levels {low}..{high} with {len(ladder.run_lengths())} distinct runs")
    return ladder


@dataclass(frozen=True)
class SubnetPartition:
    """
    Classes 1..t of the ladder's net points; a point keeps its class at every
    level where it is a net member.
    """
    t: int
    point_class: dict[int, int]
    ladder: NetLadder

    def class_of(self, i: int, x: int) -> int:
        if x not in self.ladder.net(i):
            raise KeyError(f"point {x} is not a net point at level {i}")
        return self.point_class[x]

    def members(self, i: int, j: int) -> list[int]:
        """Level-i net points of class j, ascending."""
        return [x for x in self.ladder.net(i) if self.point_class[x] == j]

    def check(self, m: FiniteMetric, eps: float) -> None:
        for i in self.ladder.scales:
            separation = 6.0 / eps * 2.0**i
            for j in range(1, self.t + 1):
                cls = np.asarray(self.members(i, j), dtype=np.intp)
                if cls.size < 2:
                    continue
                sub = m.dist[np.ix_(cls, cls)]
                off = ~np.eye(cls.size, dtype=bool)
                if np.any(sub[off] < separation * (1.0 - REL_TOL)):
                    raise ConstructionInvariantError(
                        f"class {j} at level {i} has two points closer than {separation}"
                    )

    def to_dict(self) -> dict:
        return {"t": self.t, "classes": {str(x): j for x, j in sorted(self.point_class.items())}}


def subnet_partition(
    ladder: NetLadder,
    m: FiniteMetric,
    eps: float,
    doubling_constant: int | None = None,
) -> SubnetPartition:
    """
    Split every net level into classes whose members are 6/eps*2^i apart.

    Levels are processed top-down; points inherit the class they received at
    a coarser level, and the remaining points fill classes 1, 2, ... greedily
    in ascending index order.

    Args:
        ladder: Nested net ladder of m
        m: Metric
        eps: Same eps the ladder was built with
        doubling_constant: When given, the observed class count is logged against it

    Returns:
        SubnetPartition with t = largest class index used
    """
    point_class: dict[int, int] = {}
    for i in reversed(ladder.scales):
        threshold = 6.0 / eps * 2.0**i * (1.0 - REL_TOL)
        by_class: dict[int, list[int]] = {}
        unassigned = []
        for x in ladder.net(i):
            if x in point_class:
                by_class.setdefault(point_class[x], []).append(x)
            else:
                unassigned.append(x)
        j = 1
        while unassigned:
            cls = by_class.setdefault(j, [])
            remaining = []
            for x in unassigned:
                if not cls or np.all(m.dist[x, cls] >= threshold):
                    cls.append(x)
                    point_class[x] = j
                else:
                    remaining.append(x)
            unassigned = remaining
            j += 1
    t = max(point_class.values(), default=1)
    parts = SubnetPartition(t, point_class, ladder)
    if m.n <= ASSERT_LIMIT:
        parts.check(m, eps)
    if doubling_constant is not None and doubling_constant > 1:
        exponent = math.log(t, doubling_constant) / max(1.0, math.log2(1 / eps))
        logger.info(f"Sub-net classes t={t}; log_lambda(t)/log2(1/eps) = {exponent:.3f}")
    else:
        logger.info(f"Sub-net classes t={t}")
    return parts
