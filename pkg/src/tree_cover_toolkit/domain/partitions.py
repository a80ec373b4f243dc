"""
Padded partitions, hierarchical partition families and their tree covers.

A family of partition hierarchies is padded at (x, level i) when at least one
hierarchy keeps the ball B(x, eta * Delta_i) inside x's level-i cluster. Every
padded family yields a tree cover: one HST per hierarchy, distortion <= mu/eta.
"""
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
import numpy.typing as npt

from .errors import ParameterError, PartitionInvariantError, ResamplingDidNotConvergeError
from .metric import REL_TOL, FiniteMetric, aspect_ratio
from .nets import greedy_net
from .tree import CoverKind, HstTree, TreeCover, hst_to_tree

logger = logging.getLogger(__name__)

IntArray = npt.NDArray[np.intp]


@dataclass(frozen=True)
class PartitionParams:
    """
    Constants of the padded family construction.

    Attributes:
        alpha: Target distortion parameter
        doubling_constant: Doubling constant (estimate) of the metric
        padding_constant: Block-family padding constant c'
        size_factor: Multiplier on the family size formula
    """
    alpha: float
    doubling_constant: int
    padding_constant: float = 0.25
    size_factor: float = 1.0

    def __post_init__(self) -> None:
        if self.alpha < 1:
            raise ParameterError(f"alpha must be >= 1, got {self.alpha}")
        if self.doubling_constant < 1:
            raise ParameterError(f"doubling constant must be >= 1, got {self.doubling_constant}")
        if not 0 < self.padding_constant <= 1:
            raise ParameterError(f"padding constant must lie in (0, 1], got {self.padding_constant}")
        if self.size_factor <= 0:
            raise ParameterError(f"size factor must be positive, got {self.size_factor}")
        lam = self.lam
        if not lam ** (-(2.0**12)) <= self.delta <= 1:
            raise ParameterError(f"delta={self.delta} outside the padded-partition range")

    @property
    def lam(self) -> float:
        return float(max(2, self.doubling_constant))

    @property
    def delta(self) -> float:
        return self.lam ** (-1.0 / (2.0 * self.alpha))

    @property
    def eta(self) -> float:
        """Padding at probability delta: log(1/delta) / (2^6 log lambda) = 2^-7 / alpha."""
        return 2.0**-7 / self.alpha

    def eta_at(self, delta: float) -> float:
        return math.log(1.0 / delta) / (2.0**6 * math.log(self.lam))

    @property
    def block_length(self) -> int:
        return max(2, math.ceil(math.log2(2.0 * self.alpha / self.padding_constant)))

    @property
    def c(self) -> float:
        return 1.0 + 1.0 / (2.0 ** (self.block_length - 1) - 1.0)

    @property
    def block_eta(self) -> float:
        return self.padding_constant / self.alpha

    @property
    def family_eta(self) -> float:
        return self.padding_constant / (4.0 * self.alpha)

    @property
    def family_size(self) -> int:
        lam = self.lam
        k = self.size_factor * lam ** (1.0 / self.alpha) * max(1.0, math.log2(lam))
        return max(1, math.ceil(k * (math.log2(self.alpha) + self.block_length)))

    def rate(self, delta: float) -> float:
        return 2.0 * max(1.0, math.log(self.lam)) / delta

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "doubling_constant": self.doubling_constant,
            "padding_constant": self.padding_constant,
            "size_factor": self.size_factor,
            "block_length": self.block_length,
            "c": self.c,
            "block_eta": self.block_eta,
            "family_eta": self.family_eta,
            "family_size": self.family_size,
        }


@dataclass(frozen=True, eq=False)
class BoundedPartition:
    """
    Delta-bounded partition stored as a cluster label per point.

    Labels are numbered by first appearance in point order; centers[c] is the
    designated center point of cluster c.
    """
    delta: float
    assignment: IntArray
    centers: tuple[int, ...]

    @classmethod
    def from_assignment(cls, delta: float, labels: npt.ArrayLike, center_of: dict[int, int]) -> "BoundedPartition":
        raw = np.asarray(labels)
        relabel: dict[int, int] = {}
        for label in raw:
            relabel.setdefault(int(label), len(relabel))
        assignment = np.array([relabel[int(label)] for label in raw], dtype=np.intp)
        centers = [0] * len(relabel)
        for old, new in relabel.items():
            centers[new] = center_of[old]
        return cls(delta, assignment, tuple(centers))

    @classmethod
    def whole(cls, n: int, delta: float, center: int = 0) -> "BoundedPartition":
        return cls(delta, np.zeros(n, dtype=np.intp), (center,))

    @classmethod
    def singletons(cls, n: int, delta: float) -> "BoundedPartition":
        return cls(delta, np.arange(n, dtype=np.intp), tuple(range(n)))

    @property
    def num_clusters(self) -> int:
        return len(self.centers)

    @property
    def clusters(self) -> list[IntArray]:
        return [np.flatnonzero(self.assignment == c) for c in range(self.num_clusters)]

    def cluster_of(self, x: int) -> int:
        return int(self.assignment[x])

    def with_delta(self, delta: float) -> "BoundedPartition":
        return replace(self, delta=delta)

    def padded_mask(self, m: FiniteMetric, radius: float) -> npt.NDArray[np.bool_]:
        """padded[x] iff every point of B(x, radius) shares x's cluster."""
        within = m.dist <= radius * (1.0 + REL_TOL)
        split = self.assignment[:, None] != self.assignment[None, :]
        return ~np.any(within & split, axis=1)

    def check(self, m: FiniteMetric) -> None:
        if self.assignment.shape != (m.n,):
            raise PartitionInvariantError("partition does not cover every point exactly once")
        for c, members in enumerate(self.clusters):
            if members.size == 0:
                raise PartitionInvariantError(f"cluster {c} is empty")
            diameter = float(m.dist[np.ix_(members, members)].max())
            if diameter > self.delta * (1.0 + REL_TOL):
                raise PartitionInvariantError(
                    f"cluster {c} has diameter {diameter} above the bound {self.delta}"
                )


@dataclass(frozen=True, eq=False)
class BallCarving:
    """
    Random ball carving over a (delta/8)-net of centers.

    Every center draws a uniform priority and a radius from the exponential
    distribution truncated to [delta/4, delta/2); a point joins the first
    center, by priority, whose ball contains it.
    """
    delta: float
    rate: float
    centers: IntArray
    priorities: npt.NDArray[np.float64]
    radii: npt.NDArray[np.float64]

    @staticmethod
    def draw_radii(delta: float, rate: float, size: int, rng: np.random.Generator) -> npt.NDArray[np.float64]:
        quarter = delta / 4.0
        u = rng.random(size)
        return quarter - np.log1p(u * np.expm1(-rate * quarter)) / rate

    @classmethod
    def sample(cls, m: FiniteMetric, delta: float, rate: float, rng: np.random.Generator) -> "BallCarving":
        centers = np.asarray(sorted(greedy_net(m, delta / 8.0)), dtype=np.intp)
        return cls(delta, rate, centers, rng.random(centers.size), cls.draw_radii(delta, rate, centers.size, rng))

    def resample(self, mask: npt.NDArray[np.bool_], rng: np.random.Generator) -> "BallCarving":
        """Fresh draws for the masked centers, the rest untouched."""
        count = int(mask.sum())
        if count == 0:
            return self
        priorities = self.priorities.copy()
        radii = self.radii.copy()
        priorities[mask] = rng.random(count)
        radii[mask] = self.draw_radii(self.delta, self.rate, count, rng)
        return replace(self, priorities=priorities, radii=radii)

    def assign(self, m: FiniteMetric) -> IntArray:
        """Index into `centers` of the center carving each point."""
        order = np.argsort(self.priorities, kind="stable")
        inside = m.dist[:, self.centers[order]] <= self.radii[order] * (1.0 + REL_TOL)
        return order[np.argmax(inside, axis=1)]

    def partition(self, m: FiniteMetric) -> BoundedPartition:
        owner = self.assign(m)
        return BoundedPartition.from_assignment(
            self.delta, owner, {int(i): int(self.centers[i]) for i in np.unique(owner)}
        )


def padded_partition(
    m: FiniteMetric,
    delta: float,
    params: PartitionParams,
    rng: np.random.Generator,
) -> BoundedPartition:
    """Sample one delta-bounded partition by ball carving."""
    if delta <= 0:
        raise ParameterError(f"partition bound must be positive, got {delta}")
    return BallCarving.sample(m, delta, params.rate(delta), rng).partition(m)


def padding_profile(
    m: FiniteMetric,
    delta: float,
    params: PartitionParams,
    deltas: list[float],
    samples: int,
    rng: np.random.Generator,
) -> dict[float, float]:
    """
    Monte-Carlo estimate of min over x of Pr[B(x, eta(d) * delta) inside P(x)].

    Returns:
        Mapping from each probability level d to the worst point's padding frequency
    """
    hits = np.zeros((len(deltas), m.n))
    radii = [params.eta_at(d) * delta for d in deltas]
    for _ in range(samples):
        partition = padded_partition(m, delta, params, rng)
        for row, radius in enumerate(radii):
            hits[row] += partition.padded_mask(m, radius)
    return {d: float(hits[row].min() / samples) for row, d in enumerate(deltas)}


@dataclass(frozen=True, eq=False)
class PartitionHierarchy:
    """Partitions P_0 (coarsest) .. P_L, each refining the previous one."""
    mu: float
    levels: tuple[BoundedPartition, ...]

    @property
    def delta_0(self) -> float:
        return self.levels[0].delta

    def parent_labels(self, i: int) -> IntArray:
        """Level-(i-1) cluster of every level-i cluster."""
        level, above = self.levels[i], self.levels[i - 1]
        parents = np.full(level.num_clusters, -1, dtype=np.intp)
        parents[level.assignment] = above.assignment
        return parents

    def check(self, m: FiniteMetric) -> None:
        """
        Raises:
            PartitionInvariantError: If a level is not bounded or does not refine its parent
        """
        for i, level in enumerate(self.levels):
            level.check(m)
            if i == 0:
                continue
            parents = self.parent_labels(i)
            if np.any(parents[level.assignment] != self.levels[i - 1].assignment):
                raise PartitionInvariantError(f"level {i} does not refine level {i - 1}")


def cut_hierarchy(partitions: list[BoundedPartition], mu: float = 2.0) -> PartitionHierarchy:
    """
    Turn independent partitions (coarsest first) into a hierarchy by
    intersecting every level with all levels above it.
    """
    if not partitions:
        raise ParameterError("cut_hierarchy needs at least one partition")
    levels = [partitions[0]]
    for partition in partitions[1:]:
        previous = levels[-1]
        keys = previous.assignment * partition.num_clusters + partition.assignment
        center_of = {int(key): partition.centers[int(key) % partition.num_clusters] for key in np.unique(keys)}
        levels.append(BoundedPartition.from_assignment(partition.delta, keys, center_of))
    return PartitionHierarchy(mu, tuple(levels))


def hierarchy_to_hst(h: PartitionHierarchy) -> HstTree:
    """
    Associated HST: one node per cluster labeled with its level's bound.

    A cluster repeated unchanged across levels becomes a single node carrying
    the bound of its deepest level; a root labeled mu * Delta_0 is added when
    level 0 has several clusters.
    """
    n = h.levels[0].assignment.size
    labels: list[float] = []
    parent: list[int] = []

    def new_node(label: float, up: int) -> int:
        labels.append(label)
        parent.append(up)
        return len(labels) - 1

    top = h.levels[0]
    root = new_node(h.mu * top.delta, -1) if top.num_clusters > 1 else -1
    node_of = [new_node(top.delta, root) for _ in range(top.num_clusters)]
    if root == -1:
        root = node_of[0]
    sizes = np.bincount(top.assignment, minlength=top.num_clusters)
    for i in range(1, len(h.levels)):
        level = h.levels[i]
        parents = h.parent_labels(i)
        level_sizes = np.bincount(level.assignment, minlength=level.num_clusters)
        current = []
        for c in range(level.num_clusters):
            up = node_of[parents[c]]
            if level_sizes[c] == sizes[parents[c]]:
                labels[up] = level.delta
                current.append(up)
            else:
                current.append(new_node(level.delta, up))
        node_of, sizes = current, level_sizes
    bottom = h.levels[-1]
    leaf_of = []
    for x in range(n):
        c = int(bottom.assignment[x])
        node = node_of[c]
        if sizes[c] == 1:
            labels[node] = 0.0
            leaf_of.append(node)
        else:
            leaf_of.append(new_node(0.0, node))
    return HstTree(tuple(labels), tuple(parent), tuple(leaf_of), h.mu)


@dataclass(frozen=True, eq=False)
class PaddedFamily:
    hierarchies: tuple[PartitionHierarchy, ...]
    eta: float
    mu: float = 2.0
    rounds: int = 0

    @property
    def size(self) -> int:
        return len(self.hierarchies)


def padding_witnesses(family: PaddedFamily, m: FiniteMetric) -> list[tuple[int, int]]:
    """Every (x, level) whose eta-ball is cut in all hierarchies."""
    depth = len(family.hierarchies[0].levels)
    padded = np.zeros((depth, m.n), dtype=bool)
    for h in family.hierarchies:
        for i, level in enumerate(h.levels):
            padded[i] |= level.padded_mask(m, family.eta * level.delta)
    return [(int(x), i) for i in range(depth) for x in np.flatnonzero(~padded[i])]


@dataclass
class _BlockState:
    m: FiniteMetric
    net: IntArray
    net_metric: FiniteMetric
    nearest: IntArray
    bounds: list[float]
    carvings: list[list[BallCarving]] = field(default_factory=list)

    def level_partition(self, carving: BallCarving, delta: float) -> BoundedPartition:
        owner = carving.assign(self.net_metric)[self.nearest]
        center_of = {int(i): int(self.net[carving.centers[i]]) for i in np.unique(owner)}
        return BoundedPartition.from_assignment(delta, owner, center_of)

    def hierarchy(self, h: int, deltas: list[float]) -> PartitionHierarchy:
        return cut_hierarchy(
            [self.level_partition(carving, deltas[i]) for i, carving in enumerate(self.carvings[h])]
        )

    def variables(self, x: int, level: int) -> set[tuple[int, int]]:
        """Carving draws (level, center) that can decide whether (x, level) is padded."""
        keys = set()
        for l in range(level + 1):
            centers = self.carvings[0][l].centers
            near = self.m.dist[x, self.net[centers]] <= self.bounds[l] * (1.0 + REL_TOL)
            keys.update((l, int(i)) for i in np.flatnonzero(near))
        return keys


def block_family(
    m: FiniteMetric,
    delta: float,
    block_length: int,
    params: PartitionParams,
    rng: np.random.Generator,
    max_rounds: int | None = None,
    eta: float | None = None,
) -> PaddedFamily:
    """
    Padded family of k hierarchies over the scales delta / 2^l, l = 0..block_length.

    Partitions are carved on an (eta * Delta_B / 4)-net and extended to every
    point through its nearest net point. While some (x, l) is cut in every
    hierarchy, a maximal set of such events with disjoint carving draws is
    resampled in all hierarchies (Moser-Tardos).

    Raises:
        ResamplingDidNotConvergeError: If events remain after the round cap
    """
    if block_length < 1:
        raise ParameterError(f"block length must be >= 1, got {block_length}")
    eta = eta if eta is not None else params.block_eta
    deltas = [delta / 2.0**l for l in range(block_length + 1)]
    if m.n == 1:
        single = PartitionHierarchy(2.0, tuple(BoundedPartition.whole(1, d) for d in deltas))
        return PaddedFamily((single,), eta, 2.0, 0)
    k = params.family_size
    net_radius = eta * deltas[-1] / 4.0
    net = np.asarray(sorted(greedy_net(m, net_radius)), dtype=np.intp)
    net_metric = m.restrict(net)
    nearest = np.argmin(m.dist[:, net], axis=1)
    bounds = [d - 2.0 * net_radius for d in deltas]
    state = _BlockState(m, net, net_metric, nearest, bounds)
    state.carvings = [
        [BallCarving.sample(net_metric, bound, params.rate(bound), rng) for bound in bounds] for _ in range(k)
    ]
    cap = max_rounds if max_rounds is not None else 1000 * k * block_length
    rounds = 0
    while True:
        family = PaddedFamily(tuple(state.hierarchy(h, deltas) for h in range(k)), eta, 2.0, rounds)
        witnesses = padding_witnesses(family, m)
        if not witnesses:
            break
        if rounds >= cap:
            raise ResamplingDidNotConvergeError(rounds, witnesses)
        chosen: set[tuple[int, int]] = set()
        for x, level in witnesses:
            keys = state.variables(x, level)
            if not keys & chosen:
                chosen |= keys
        for h in range(k):
            for l in range(block_length + 1):
                mask = np.zeros(state.carvings[h][l].centers.size, dtype=bool)
                mask[[i for lvl, i in chosen if lvl == l]] = True
                state.carvings[h][l] = state.carvings[h][l].resample(mask, rng)
        rounds += 1
        logger.debug(f"Resampling round {rounds}: {len(witnesses)} unpadded events")
    logger.info(f"Block family at scale {delta:.6g}: k={k}, {rounds} resampling rounds")
    return family


def _glue_by_centers(below: BoundedPartition, block_level: BoundedPartition, delta: float) -> BoundedPartition:
    """Union of `below` clusters whose centers fall in the same block cluster."""
    label_of_cluster = np.array([block_level.assignment[z] for z in below.centers], dtype=np.intp)
    labels = label_of_cluster[below.assignment]
    center_of = {int(c): block_level.centers[int(c)] for c in np.unique(labels)}
    return BoundedPartition.from_assignment(delta, labels, center_of)


def _glue_collection(
    m: FiniteMetric,
    deltas: list[float],
    block_length: int,
    blocks: dict[int, PartitionHierarchy],
) -> PartitionHierarchy:
    bottom = len(deltas) - 1
    levels: list[BoundedPartition | None] = [None] * (bottom + 1)
    levels[bottom] = BoundedPartition.singletons(m.n, deltas[bottom])
    for j in range(bottom - 1, -1, -1):
        b = j // block_length
        if b in blocks:
            below = levels[min((b + 2) * block_length, bottom)]
            block_level = blocks[b].levels[j - b * block_length]
            assert below is not None
            levels[j] = _glue_by_centers(below, block_level, deltas[j])
        else:
            following = levels[j + 1]
            assert following is not None
            levels[j] = following.with_delta(deltas[j])
    levels[0] = BoundedPartition.whole(m.n, deltas[0])
    return PartitionHierarchy(2.0, tuple(level for level in levels if level is not None))


@dataclass(frozen=True, eq=False)
class AssembledFamily:
    family: PaddedFamily
    params: PartitionParams
    depth: int
    padding_levels: int
    num_blocks: int
    rounds: int

    def to_dict(self) -> dict:
        return {
            **self.params.to_dict(),
            "levels": self.depth,
            "padding_levels": self.padding_levels,
            "blocks": self.num_blocks,
            "hierarchies": self.family.size,
            "resampling_rounds": self.rounds,
        }


def assemble_family(
    m: FiniteMetric,
    params: PartitionParams,
    rng: np.random.Generator,
    max_rounds: int | None = None,
) -> AssembledFamily:
    """
    Full-range padded family built from interleaved block families.

    Levels run 0..I with Delta_0 = d_max * 2^pad and Delta_j = Delta_0 / 2^j,
    I being the least multiple of B with eta * Delta_I < d_min. Blocks of B
    levels alternate between two collections; inside a collection each block
    is carved at Delta/c and glued onto the collection's partition two blocks
    below by cluster centers.

    Raises:
        ParameterError: If alpha < 2
        PartitionInvariantError: If a hierarchy or the final padding check fails
        ResamplingDidNotConvergeError: Propagated from the block families
    """
    if params.alpha < 2:
        raise ParameterError(f"assemble_family needs alpha >= 2, got {params.alpha}")
    eta = params.family_eta
    if m.n == 1:
        single = PartitionHierarchy(2.0, (BoundedPartition.whole(1, 1.0),))
        return AssembledFamily(PaddedFamily((single,), eta), params, 0, 0, 0, 0)
    block_length = params.block_length
    minimum = max(0, math.floor(math.log2(eta * aspect_ratio(m))) + 1)
    depth = block_length * math.ceil(minimum / block_length)
    padding_levels = depth - minimum
    delta_0 = m.d_max * 2.0**padding_levels
    deltas = [delta_0 / 2.0**j for j in range(depth + 1)]
    num_blocks = depth // block_length
    if num_blocks == 0:
        single = PartitionHierarchy(2.0, (BoundedPartition.whole(m.n, delta_0),))
        family = PaddedFamily((single,), eta)
        return AssembledFamily(family, params, 0, padding_levels, 0, 0)

    block_rngs = rng.spawn(num_blocks)
    families = {
        b: block_family(m, deltas[b * block_length] / params.c, block_length, params, block_rngs[b], max_rounds)
        for b in range(num_blocks)
    }
    rounds = sum(f.rounds for f in families.values())
    hierarchies = []
    for parity in (0, 1):
        own = [b for b in range(num_blocks) if b % 2 == parity]
        if not own:
            continue
        for t in range(params.family_size):
            blocks = {b: families[b].hierarchies[t] for b in own}
            hierarchies.append(_glue_collection(m, deltas, block_length, blocks))
    for h in hierarchies:
        h.check(m)
    family = PaddedFamily(tuple(hierarchies), eta, 2.0, rounds)
    witnesses = padding_witnesses(family, m)
    if witnesses:
        raise PartitionInvariantError(
            f"assembled family leaves {len(witnesses)} (point, level) pairs unpadded, e.g. {witnesses[0]}"
        )
    logger.info(
        f"Assembled family: {family.size} hierarchies, {depth} levels, {num_blocks} blocks, "
        f"{rounds} resampling rounds"
    )
    return AssembledFamily(family, params, depth, padding_levels, num_blocks, rounds)


def cover_from_family(fam: PaddedFamily, m: FiniteMetric) -> TreeCover:
    """One HST per hierarchy; claimed distortion mu/eta."""
    trees = tuple(hst_to_tree(hierarchy_to_hst(h)) for h in fam.hierarchies)
    for t in trees:
        if t.num_points != m.n:
            raise PartitionInvariantError("family hierarchies do not cover the metric")
    return TreeCover(trees, CoverKind.PLAIN, fam.mu / fam.eta)
