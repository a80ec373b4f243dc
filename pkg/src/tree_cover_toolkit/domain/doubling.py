"""
(1+eps)-distortion tree covers of doubling metrics.

Tree (j, p) scans the net levels i with i = p (mod L), L = ceil(log2(1/eps)),
ascending; each class-j net point x at level i clusters every unclustered
point closer than 3/eps * 2^i with an edge of weight d(x, y). Points that are
clustered never cluster again, so each tree is a forest, completed with true
metric distances at the end.
"""
import logging
import math
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConstructionInvariantError, ParameterError
from .metric import REL_TOL, FiniteMetric, leq
from .nets import ASSERT_LIMIT, NetLadder, SubnetPartition, build_ladder, subnet_partition
from .tree import CoverKind, Edge, TreeCover, TreeEmbedding, complete_forest

logger = logging.getLogger(__name__)

MIN_RESCALE = 8.0
CERTIFIED_RESCALE = 68.0


@dataclass
class ClusterState:
    """
    Per-tree clustering state.

    component[z] is the single unclustered point of z's component; members
    holds the component of every such representative.
    """
    clustered: np.ndarray
    component: list[int]
    members: dict[int, list[int]]
    adjacency: list[list[tuple[int, float]]]
    edges: list[Edge] = field(default_factory=list)

    @classmethod
    def create(cls, n: int) -> "ClusterState":
        return cls(
            clustered=np.zeros(n, dtype=bool),
            component=list(range(n)),
            members={x: [x] for x in range(n)},
            adjacency=[[] for _ in range(n)],
        )

    def attach(self, x: int, y: int, weight: float) -> None:
        if self.clustered[y]:
            raise ConstructionInvariantError(f"point {y} would be clustered a second time")
        if self.component[x] != x or self.component[y] != y:
            raise ConstructionInvariantError(f"edge ({x}, {y}) would close a cycle")
        self.clustered[y] = True
        for z in self.members[y]:
            self.component[z] = x
        self.members[x].extend(self.members.pop(y))
        self.adjacency[x].append((y, weight))
        self.adjacency[y].append((x, weight))
        self.edges.append((x, y, weight))

    def path_lengths_from(self, x: int) -> dict[int, float]:
        lengths = {x: 0.0}
        queue = deque([x])
        while queue:
            u = queue.popleft()
            for v, w in self.adjacency[u]:
                if v not in lengths:
                    lengths[v] = lengths[u] + w
                    queue.append(v)
        return lengths


def _check_component(state: ClusterState, m: FiniteMetric, x: int, i: int, eps: float) -> None:
    scale = 2.0**i
    members = np.asarray(state.members[x], dtype=np.intp)
    diameter = float(m.dist[np.ix_(members, members)].max())
    if not leq(diameter, 8.0 / eps * scale):
        raise ConstructionInvariantError(
            f"component of {x} at level {i} has diameter {diameter} > 8/eps*2^i"
        )
    lengths = state.path_lengths_from(x)
    for y in members:
        d = float(m.dist[x, y])
        if leq(d, 2.0 / eps * scale) and not leq(lengths[int(y)], d + 16.0 * scale):
            raise ConstructionInvariantError(
                f"component path {x}->{y} at level {i} is {lengths[int(y)]}, exceeding d + 2^(i+4)"
            )


def _build_tree(
    m: FiniteMetric,
    eps: float,
    ladder: NetLadder,
    parts: SubnetPartition,
    j: int,
    p: int,
    residues: int,
) -> TreeEmbedding:
    state = ClusterState.create(m.n)
    check = m.n <= ASSERT_LIMIT
    for i in ladder.scales:
        if i % residues != p:
            continue
        centers = parts.members(i, j)
        attach_below = 3.0 / eps * 2.0**i * (1.0 - REL_TOL)
        for x in centers:
            if state.clustered[x]:
                raise ConstructionInvariantError(f"net point {x} of class {j} was clustered before level {i}")
            targets = np.flatnonzero((m.dist[x] < attach_below) & ~state.clustered)
            attached = False
            for y in targets:
                if y != x:
                    state.attach(x, int(y), float(m.dist[x, y]))
                    attached = True
            if attached and check:
                _check_component(state, m, x, i, eps)
        if any(state.clustered[x] for x in centers):
            raise ConstructionInvariantError(f"a class-{j} net point was clustered at level {i}")
    return complete_forest(m, state.edges)


def build_doubling_cover(
    m: FiniteMetric,
    eps: float,
    ladder: NetLadder,
    parts: SubnetPartition,
    claimed_distortion: float | None = None,
    threads: int = 1,
) -> TreeCover:
    """
    Build the t * ceil(log2(1/eps)) trees of the doubling construction.

    Args:
        m: Metric
        eps: Internal eps in (0, 1/8), the one ladder and parts were built with
        ladder: Net ladder of m
        parts: Sub-net partition of the ladder
        claimed_distortion: Defaults to 1 + eps
        threads: Workers building independent trees

    Returns:
        Plain TreeCover with trees ordered by (j, p)
    """
    if not 0 < eps < 1 / 8:
        raise ParameterError(f"internal eps must lie in (0, 1/8), got {eps}")
    residues = max(1, math.ceil(math.log2(1 / eps)))
    slots = [(j, p) for j in range(1, parts.t + 1) for p in range(residues)]
    logger.info(f"Building {len(slots)} doubling trees (t={parts.t}, residues={residues})")

    def build(slot: tuple[int, int]) -> TreeEmbedding:
        return _build_tree(m, eps, ladder, parts, slot[0], slot[1], residues)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            trees = list(pool.map(build, slots))
    else:
        trees = [build(slot) for slot in slots]
    claimed = claimed_distortion if claimed_distortion is not None else 1.0 + eps
    return TreeCover(tuple(trees), CoverKind.PLAIN, claimed)


@dataclass(frozen=True)
class DoublingBuild:
    cover: TreeCover
    eps: float
    eps_internal: float
    rescale: float
    ladder: NetLadder
    parts: SubnetPartition

    @property
    def residues(self) -> int:
        return max(1, math.ceil(math.log2(1 / self.eps_internal)))

    def to_dict(self) -> dict:
        return {
            "eps": self.eps,
            "eps_internal": self.eps_internal,
            "rescale": self.rescale,
            "t": self.parts.t,
            "residues": self.residues,
            "num_trees": self.cover.num_trees,
            "ladder_runs": self.ladder.run_lengths(),
        }


def doubling_tree_cover(
    m: FiniteMetric,
    eps: float,
    rescale: float = MIN_RESCALE,
    threads: int = 1,
) -> DoublingBuild:
    """
    Public entry point: eps in (0, 1) is divided by `rescale` before building.

    At rescale 68 the construction provably stays within 1 + eps.

    Raises:
        ParameterError: If eps is outside (0, 1) or rescale is below 8
    """
    if not 0 < eps < 1:
        raise ParameterError(f"eps must lie in (0, 1), got {eps}")
    if rescale < MIN_RESCALE:
        raise ParameterError(f"rescale must be at least {MIN_RESCALE}, got {rescale}")
    eps_internal = eps / rescale
    ladder = build_ladder(m, eps_internal)
    parts = subnet_partition(ladder, m, eps_internal)
    cover = build_doubling_cover(m, eps_internal, ladder, parts, 1.0 + eps, threads)
    return DoublingBuild(cover, eps, eps_internal, rescale, ladder, parts)
