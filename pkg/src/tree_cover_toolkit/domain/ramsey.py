"""
Ramsey tree covers by iterated extraction.

Each step embeds the whole metric into an ultrametric and extracts the points
of the surviving set that are padded at every scale; those points get that
tree as their home. The points never extracted share one last tree: an
ultrametric over them with the remaining points hung off their nearest member.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from scipy.cluster.hierarchy import linkage
from scipy.spatial.distance import squareform
from tenacity import Retrying, before_sleep_log, retry_if_exception_type, stop_after_attempt

from .errors import ConstructionInvariantError, ParameterError, RamseyExtractionError
from .metric import REL_TOL, FiniteMetric, doubling_constant_estimate
from .partitions import PartitionParams, cut_hierarchy, hierarchy_to_hst, padded_partition
from .tree import CoverKind, HstTree, TreeCover, TreeEmbedding, hst_from_ultrametric, hst_to_tree
from .verification import verify_cover

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RamseyStep:
    survivors: tuple[int, ...]
    extracted: tuple[int, ...]
    hst: HstTree
    tree: TreeEmbedding
    alpha: float
    alpha_actual: float
    eta: float
    attempts: int
    eta_halvings: int = 0

    def to_dict(self) -> dict:
        return {
            "survivors": len(self.survivors),
            "extracted": len(self.extracted),
            "alpha": self.alpha,
            "alpha_actual": self.alpha_actual,
            "eta": self.eta,
            "eta_halvings": self.eta_halvings,
            "attempts": self.attempts,
        }


class _TooFewPadded(Exception):
    def __init__(self, step: RamseyStep, required: int):
        super().__init__(f"only {len(step.extracted)} of the required {required} points padded")
        self.step = step


def required_extraction(size: int, alpha: float) -> int:
    return math.ceil(size ** (1.0 - 1.0 / alpha) - 1e-9)


def ramsey_alpha(n: int, k: int) -> float:
    """n^(1/k) * (ln n)^(1 - 1/k), clamped to >= 1."""
    if n <= 1:
        return 1.0
    return max(1.0, n ** (1.0 / k) * math.log(n) ** (1.0 - 1.0 / k))


def measured_distortion(m: FiniteMetric, tree: TreeEmbedding, points: npt.ArrayLike) -> float:
    """Max over x in points and y != x of d_T(x, y) / d(x, y)."""
    idx = np.asarray(points, dtype=np.intp)
    if m.n < 2 or idx.size == 0:
        return 1.0
    tree_dist = tree.point_distances()[idx]
    ratio = np.divide(tree_dist, m.dist[idx], out=np.zeros_like(tree_dist), where=m.dist[idx] > 0)
    return float(ratio.max())


def ramsey_ultrametric(
    m: FiniteMetric,
    survivors: list[int],
    alpha: float,
    rng: np.random.Generator,
    doubling_constant: int | None = None,
    attempts_per_eta: int = 3,
    eta_fallback: bool = True,
) -> RamseyStep:
    """
    Embed X into an HST and extract survivors padded at every scale.

    Scales are d_max / 2^i down to the first one below d_min; each level is an
    independent padded partition and the levels are cut into a hierarchy. A
    survivor is extracted when its ball of radius eta * Delta_i stays inside
    its cluster at every level, with eta = 1/(8 alpha).

    Every attempt draws from its own generator spawned off `rng`. The first
    `attempts_per_eta` attempts keep eta fixed. With `eta_fallback`, eta then
    halves every `attempts_per_eta` further failures (logged, and counted in
    the step); once eta < 1 / aspect ratio every survivor is padded, which
    bounds the number of attempts.

    Raises:
        ParameterError: If alpha < 1 or survivors is empty
        RamseyExtractionError: If no attempt extracts enough points
    """
    if alpha < 1:
        raise ParameterError(f"alpha must be >= 1, got {alpha}")
    if not survivors:
        raise ParameterError("ramsey_ultrametric needs a nonempty survivor set")
    survivors = sorted(survivors)
    required = required_extraction(len(survivors), alpha)
    if m.n == 1:
        hst = HstTree((0.0,), (-1,), (0,))
        return RamseyStep(tuple(survivors), tuple(survivors), hst, hst_to_tree(hst), alpha, 1.0, 1.0, 1)

    lam = doubling_constant if doubling_constant is not None else doubling_constant_estimate(m)
    params = PartitionParams(alpha=alpha, doubling_constant=lam)
    deltas = [m.d_max]
    while deltas[-1] >= m.d_min:
        deltas.append(deltas[-1] / 2.0)
    eta_start = 1.0 / (8.0 * alpha)
    halvings = max(0, math.floor(math.log2(eta_start * m.d_max / m.d_min)) + 1) if eta_fallback else 0
    max_attempts = attempts_per_eta * (halvings + 1)
    best: list[RamseyStep] = []

    def attempt(number: int) -> RamseyStep:
        halved = (number - 1) // attempts_per_eta
        if halved and (number - 1) % attempts_per_eta == 0:
            logger.warning(
                f"Ramsey extraction on {len(survivors)} survivors: {number - 1} attempts failed at "
                f"eta={eta_start / 2.0 ** (halved - 1):.6g}, halving the padding radius"
            )
        eta = eta_start / 2.0**halved
        attempt_rng = rng.spawn(1)[0]
        hierarchy = cut_hierarchy([padded_partition(m, delta, params, attempt_rng) for delta in deltas])
        padded = np.ones(m.n, dtype=bool)
        for level in hierarchy.levels:
            padded &= level.padded_mask(m, eta * level.delta)
        extracted = tuple(x for x in survivors if padded[x])
        hst = hierarchy_to_hst(hierarchy)
        tree = hst_to_tree(hst)
        actual = measured_distortion(m, tree, extracted)
        step = RamseyStep(tuple(survivors), extracted, hst, tree, alpha, actual, eta, number, halved)
        if not best or len(extracted) > len(best[0].extracted):
            best[:] = [step]
        if len(extracted) < required:
            raise _TooFewPadded(step, required)
        return step

    try:
        for trial in Retrying(
            stop=stop_after_attempt(max_attempts),
            retry=retry_if_exception_type(_TooFewPadded),
            before_sleep=before_sleep_log(logger, logging.DEBUG),
            reraise=True,
        ):
            with trial:
                step = attempt(trial.retry_state.attempt_number)
    except _TooFewPadded as e:
        raise RamseyExtractionError(
            f"ramsey extraction failed: {max_attempts} attempts, best extracted "
            f"{len(best[0].extracted)} of {required} required points",
            best_attempt=best[0],
        ) from e
    logger.debug(
        f"Ramsey step: |S|={len(survivors)}, |Z|={len(step.extracted)}, "
        f"alpha_actual={step.alpha_actual:.3f}, eta={step.eta:.6g}, attempts={step.attempts}"
    )
    return step


def ultrametric_from_tree_split(m: FiniteMetric, points: list[int]) -> npt.NDArray[np.float64]:
    """
    Ultrametric on `points` with distortion at most |points| - 1.

    Single linkage merges along the minimum spanning tree; a merged cluster is
    labeled with its metric diameter, which dominates every pair it joins and
    is at most (size - 1) times the heaviest spanning-tree edge inside it.
    """
    idx = np.asarray(points, dtype=np.intp)
    size = idx.size
    result = np.zeros((size, size))
    if size < 2:
        return result
    sub = m.dist[np.ix_(idx, idx)]
    merges = linkage(squareform(sub, checks=False), method="single")
    members: dict[int, list[int]] = {i: [i] for i in range(size)}
    diameter: dict[int, float] = {i: 0.0 for i in range(size)}
    for step, row in enumerate(merges):
        a, b = int(row[0]), int(row[1])
        left, right = members.pop(a), members.pop(b)
        label = max(diameter.pop(a), diameter.pop(b), float(sub[np.ix_(left, right)].max()))
        result[np.ix_(left, right)] = label
        result[np.ix_(right, left)] = label
        members[size + step] = left + right
        diameter[size + step] = label
    return result


def attach_to_nearest(m: FiniteMetric, points: list[int], base: TreeEmbedding) -> TreeEmbedding:
    """
    Extend a tree over `points` (point i of `base` is points[i]) to all of X.

    Every other point x hangs off the node of its nearest point s_x of
    `points` (lowest index on ties) through an edge of weight d(x, s_x), which
    keeps the tree dominating.
    """
    idx = np.asarray(points, dtype=np.intp)
    position = {int(p): i for i, p in enumerate(idx)}
    nearest = np.argmin(m.dist[:, idx], axis=1)
    edges = list(base.edges)
    point_nodes = []
    next_node = base.num_nodes
    for x in range(m.n):
        if x in position:
            point_nodes.append(base.point_nodes[position[x]])
            continue
        edges.append((base.point_nodes[int(nearest[x])], next_node, float(m.dist[x, idx[nearest[x]]])))
        point_nodes.append(next_node)
        next_node += 1
    return TreeEmbedding(next_node, tuple(edges), tuple(point_nodes), base.root)


def split_tree(m: FiniteMetric, points: list[int]) -> tuple[TreeEmbedding, float]:
    """
    Tree over all of X from the split ultrametric on `points`, with its
    distortion on points x points.

    Raises:
        ConstructionInvariantError: If that distortion exceeds |points| - 1
    """
    base = ultrametric_from_tree_split(m, points)
    distortion = 1.0
    if len(points) > 1:
        idx = np.asarray(points)
        sub = m.dist[np.ix_(idx, idx)]
        off = ~np.eye(idx.size, dtype=bool)
        distortion = float((base[off] / sub[off]).max())
        if distortion > (len(points) - 1) * (1.0 + REL_TOL):
            raise ConstructionInvariantError(f"split ultrametric has distortion {distortion} on {len(points)} points")
    return attach_to_nearest(m, points, hst_to_tree(hst_from_ultrametric(base, check=False))), distortion


@dataclass(frozen=True)
class RamseyBuild:
    cover: TreeCover
    alpha: float
    steps: tuple[RamseyStep, ...]
    last_size: int
    last_distortion: float
    single_tree_distortion: float | None = None
    rehomed: bool = False

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "steps": [s.to_dict() for s in self.steps],
            "last_tree_points": self.last_size,
            "last_tree_distortion": self.last_distortion,
            "single_tree_distortion": self.single_tree_distortion,
            "rehomed": self.rehomed,
            "num_trees": self.cover.num_trees,
            "ramsey_distortion": self.cover.claimed_distortion,
        }


def build_ramsey_cover(
    m: FiniteMetric,
    k: int,
    rng: np.random.Generator,
    doubling_constant: int | None = None,
    attempts_per_eta: int = 3,
    eta_fallback: bool = True,
) -> RamseyBuild:
    """
    Ramsey tree cover with k trees.

    With k >= 2 the extracted cover is compared with the single split tree
    over all of X, which is what k = 1 builds. When the cover's home-tree
    distortion is worse, the last tree slot takes the split tree and every
    point moves home to its best tree, so adding trees never raises the
    distortion above the one-tree cover.

    Args:
        m: Metric
        k: Number of trees (>= 1)
        rng: Source of all random draws
        doubling_constant: Reused instead of re-estimating when given
        attempts_per_eta: Fresh-seed attempts at each padding radius
        eta_fallback: Halve the padding radius once the attempts at it fail

    Returns:
        RamseyBuild whose cover claims its own verified home-tree distortion

    Raises:
        ParameterError: If k <= 0
        RamseyExtractionError: Propagated from an extraction step
    """
    if k <= 0:
        raise ParameterError(f"number of trees must be positive, got {k}")
    n = m.n
    alpha = ramsey_alpha(n, k)
    if n > 1 and k > 1:
        exact = n * (1.0 - n ** (-1.0 / alpha)) ** (k - 1)
        relaxed = n * (math.log(n) / alpha) ** (k - 1)
        logger.info(f"Ramsey alpha={alpha:.4f}: survivor bound {exact:.2f} <= {relaxed:.2f}")
    lam = doubling_constant if doubling_constant is not None or n < 2 else doubling_constant_estimate(m)

    survivors = list(range(n))
    home = [k - 1] * n
    steps: list[RamseyStep] = []
    for index in range(k - 1):
        if not survivors:
            break
        step = ramsey_ultrametric(m, survivors, alpha, rng, lam, attempts_per_eta, eta_fallback)
        if len(step.extracted) < required_extraction(len(survivors), alpha):
            raise ConstructionInvariantError("extraction step returned fewer points than required")
        for x in step.extracted:
            home[x] = index
        taken = set(step.extracted)
        survivors = [x for x in survivors if x not in taken]
        steps.append(step)

    if len(steps) == k - 1:
        bound = n * (1.0 - n ** (-1.0 / alpha)) ** (k - 1) if n > 1 else 1.0
        if len(survivors) > bound * (1.0 + REL_TOL) + 1e-9:
            raise ConstructionInvariantError(f"{len(survivors)} survivors exceed the bound {bound:.3f}")

    trees = [step.tree for step in steps]
    last_distortion = 1.0
    if survivors:
        last, last_distortion = split_tree(m, survivors)
        trees.append(last)
        for x in survivors:
            home[x] = len(trees) - 1
    while len(trees) < k:
        trees.append(trees[-1])

    draft = TreeCover(tuple(trees), CoverKind.RAMSEY, math.inf, tuple(home))
    report = verify_cover(draft, m)
    claimed = report.home_tree_distortion if report.home_tree_distortion is not None else 1.0
    single_distortion: float | None = None
    rehomed = False
    if k > 1 and n > 1:
        single, _ = split_tree(m, list(range(n)))
        single_distortion = measured_distortion(m, single, range(n))
        if claimed > single_distortion * (1.0 + REL_TOL):
            logger.warning(
                f"Ramsey cover with {k} trees has home-tree distortion {claimed:.4f}, above the single split "
                f"tree's {single_distortion:.4f}; moving the last slot to the split tree and rehoming points"
            )
            trees[-1] = single
            report = verify_cover(TreeCover(tuple(trees), CoverKind.RAMSEY, math.inf, tuple(home)), m)
            if report.home_tree is None or report.ramsey_distortion is None:
                raise ConstructionInvariantError("ramsey verification returned no optimal home trees")
            home = [int(h) for h in report.home_tree]
            claimed = report.ramsey_distortion
            rehomed = True
    cover = TreeCover(tuple(trees), CoverKind.RAMSEY, max(1.0, claimed), tuple(home))
    logger.info(
        f"Ramsey cover: {k} trees, {len(steps)} extraction steps, {len(survivors)} points in the last tree, "
        f"home-tree distortion {claimed:.4f}"
    )
    return RamseyBuild(cover, alpha, tuple(steps), len(survivors), last_distortion, single_distortion, rehomed)
