"""
Exhaustive distortion verification of tree covers.
"""
import logging
from collections.abc import Iterator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

from .errors import CoverMetricMismatchError
from .metric import REL_TOL, FiniteMetric
from .tree import CoverKind, TreeCover, TreeEmbedding

logger = logging.getLogger(__name__)

WORST_PAIRS = 10


@dataclass(frozen=True)
class PairDistortion:
    x: int
    y: int
    distortion: float
    best_tree: int
    metric_distance: float

    def to_dict(self) -> dict:
        return {
            "x": self.x,
            "y": self.y,
            "distortion": self.distortion,
            "best_tree": self.best_tree,
            "metric_distance": self.metric_distance,
        }


@dataclass(frozen=True)
class DistortionReport:
    """Outcome of verify_cover."""
    num_points: int
    num_trees: int
    kind: CoverKind
    plain_distortion: float
    domination_violations: int
    claimed_distortion: float
    claimed_met: bool
    worst_pairs: list[PairDistortion]
    pair_distortions: npt.NDArray[np.float64] = field(repr=False)
    ramsey_distortion: float | None = None
    home_tree: tuple[int, ...] | None = None
    home_tree_distortion: float | None = None
    domination_examples: list[tuple[int, int, int]] = field(default_factory=list)

    @property
    def domination_ok(self) -> bool:
        return self.domination_violations == 0

    def to_dict(self) -> dict:
        data = {
            "kind": self.kind.value,
            "num_points": self.num_points,
            "num_trees": self.num_trees,
            "plain_distortion": self.plain_distortion,
            "domination_ok": self.domination_ok,
            "domination_violations": self.domination_violations,
            "claimed_distortion": self.claimed_distortion,
            "claimed_met": self.claimed_met,
            "worst_pairs": [p.to_dict() for p in self.worst_pairs],
        }
        if self.kind == CoverKind.RAMSEY:
            data["ramsey_distortion"] = self.ramsey_distortion
            data["home_tree_distortion"] = self.home_tree_distortion
            data["optimal_home_tree"] = list(self.home_tree or ())
        return data


def _tree_distances(trees: tuple[TreeEmbedding, ...], threads: int) -> Iterator[npt.NDArray[np.float64]]:
    if threads <= 1:
        for t in trees:
            yield t.point_distances()
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for start in range(0, len(trees), threads):
            yield from pool.map(TreeEmbedding.point_distances, trees[start : start + threads])


def verify_cover(
    cover: TreeCover,
    m: FiniteMetric,
    tolerance: float = REL_TOL,
    threads: int = 1,
) -> DistortionReport:
    """
    Certify a cover against its metric by checking every pair in every tree.

    Args:
        cover: Cover to check
        m: Source metric
        tolerance: Relative slack for domination and the claimed bound
        threads: Workers computing per-tree distance tables

    Returns:
        DistortionReport with domination, plain and (for Ramsey covers) home-tree distortion

    Raises:
        CoverMetricMismatchError: If a tree does not embed exactly the metric's points
    """
    n = m.n
    for index, t in enumerate(cover.trees):
        if t.num_points != n:
            raise CoverMetricMismatchError(
                f"cover/metric mismatch: tree {index} embeds {t.num_points} points, metric has {n}"
            )
    ramsey = cover.kind == CoverKind.RAMSEY
    rows, cols = np.triu_indices(n, 1)
    pair_dist = m.dist[rows, cols]
    best = np.full(rows.size, np.inf)
    best_tree = np.zeros(rows.size, dtype=np.intp)
    row_max = np.zeros((cover.num_trees, n))
    violations = 0
    examples: list[tuple[int, int, int]] = []

    for index, tree_dist in enumerate(_tree_distances(cover.trees, threads)):
        ratio = tree_dist[rows, cols] / pair_dist
        short = np.flatnonzero(tree_dist[rows, cols] < pair_dist * (1.0 - tolerance))
        violations += int(short.size)
        examples.extend((int(rows[p]), int(cols[p]), index) for p in short[: max(0, WORST_PAIRS - len(examples))])
        better = ratio < best
        best = np.where(better, ratio, best)
        best_tree = np.where(better, index, best_tree)
        if ramsey and n > 1:
            full = np.zeros((n, n))
            full[rows, cols] = ratio
            full[cols, rows] = ratio
            row_max[index] = full.max(axis=1)

    plain = float(best.max()) if best.size else 1.0
    ramsey_distortion = home_distortion = None
    optimal_home: tuple[int, ...] | None = None
    if ramsey:
        if n > 1:
            optimal = np.argmin(row_max, axis=0)
            optimal_home = tuple(int(i) for i in optimal)
            ramsey_distortion = float(row_max[optimal, np.arange(n)].max())
            assigned = np.asarray(cover.home_tree, dtype=np.intp)
            home_distortion = float(row_max[assigned, np.arange(n)].max())
        else:
            optimal_home, ramsey_distortion, home_distortion = (0,), 1.0, 1.0

    achieved = ramsey_distortion if ramsey_distortion is not None else plain
    claimed_met = violations == 0 and achieved <= cover.claimed_distortion * (1.0 + tolerance)
    order = np.argsort(-best, kind="stable")[:WORST_PAIRS]
    worst = [
        PairDistortion(
            int(rows[p]), int(cols[p]), float(best[p]), int(best_tree[p]), float(pair_dist[p])
        )
        for p in order
    ]
    if violations:
        logger.warning(f"Domination violated by {violations} (pair, tree) combinations")
    logger.info(
        f"Verified {cover.num_trees} trees over {n} points: plain distortion {plain:.6f}"
        + (f", ramsey distortion {ramsey_distortion:.6f}" if ramsey_distortion is not None else "")
    )
    return DistortionReport(
        num_points=n,
        num_trees=cover.num_trees,
        kind=cover.kind,
        plain_distortion=plain,
        domination_violations=violations,
        claimed_distortion=cover.claimed_distortion,
        claimed_met=claimed_met,
        worst_pairs=worst,
        pair_distortions=best,
        ramsey_distortion=ramsey_distortion,
        home_tree=optimal_home,
        home_tree_distortion=home_distortion,
        domination_examples=examples,
    )
