"""
Finite metrics and weighted graphs.

FiniteMetric is the universal input of every builder; WeightedGraph is the
input of the planar construction and a source of shortest-path metrics.
"""
import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property

import networkx as nx
import numpy as np
import numpy.typing as npt
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra

from .errors import DegenerateMetricError, DisconnectedGraphError, MetricInvariantError

logger = logging.getLogger(__name__)

REL_TOL = 1e-9
EXHAUSTIVE_RADII_LIMIT = 64
EXACT_DOUBLING_LIMIT = 16

FloatMatrix = npt.NDArray[np.float64]


def leq(a: float, b: float, tol: float = REL_TOL) -> bool:
    """a <= b up to a relative tolerance."""
    return a <= b * (1.0 + tol)


def strictly_less(a: float, b: float, tol: float = REL_TOL) -> bool:
    """a < b with ties (up to tolerance) excluded."""
    return a < b * (1.0 - tol)


@dataclass(frozen=True, eq=False)
class FiniteMetric:
    """
    Symmetric distance matrix over n labeled points.

    The matrix is copied and frozen on construction. Symmetry, zero diagonal and
    positive off-diagonal entries are checked here; the O(n^3) triangle
    inequality is checked by validate().
    """
    dist: FloatMatrix
    labels: tuple[str, ...] | None = field(default=None)

    def __post_init__(self) -> None:
        d = np.array(self.dist, dtype=np.float64)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise MetricInvariantError(f"distance matrix must be square, got shape {d.shape}")
        if not np.all(np.isfinite(d)):
            raise MetricInvariantError("distance matrix contains non-finite entries")
        if np.any(np.diag(d) != 0.0):
            raise MetricInvariantError("distance matrix must have a zero diagonal")
        if not np.allclose(d, d.T, rtol=REL_TOL, atol=0.0):
            i, j = np.argwhere(~np.isclose(d, d.T, rtol=REL_TOL, atol=0.0))[0]
            raise MetricInvariantError(f"distance matrix is not symmetric at ({i}, {j})")
        d = np.triu(d) + np.triu(d, 1).T
        off_diagonal = ~np.eye(d.shape[0], dtype=bool)
        if np.any(d[off_diagonal] <= 0.0):
            i, j = np.argwhere((d <= 0.0) & off_diagonal)[0]
            raise MetricInvariantError(f"distinct points {i} and {j} are at distance {d[i, j]}")
        d.setflags(write=False)
        object.__setattr__(self, "dist", d)
        if self.labels is not None and len(self.labels) != d.shape[0]:
            raise MetricInvariantError(
                f"got {len(self.labels)} labels for {d.shape[0]} points"
            )

    @property
    def n(self) -> int:
        return int(self.dist.shape[0])

    @cached_property
    def d_min(self) -> float:
        if self.n < 2:
            raise DegenerateMetricError("degenerate metric: fewer than two points")
        return float(self.dist[~np.eye(self.n, dtype=bool)].min())

    @cached_property
    def d_max(self) -> float:
        if self.n < 2:
            return 0.0
        return float(self.dist.max())

    def label(self, x: int) -> str:
        return self.labels[x] if self.labels is not None else str(x)

    def ball(self, x: int, radius: float) -> npt.NDArray[np.intp]:
        """Indices of the closed ball B(x, radius)."""
        return np.flatnonzero(self.dist[x] <= radius * (1.0 + REL_TOL))

    def restrict(self, points: npt.ArrayLike) -> "FiniteMetric":
        idx = np.asarray(points, dtype=np.intp)
        labels = tuple(self.label(int(p)) for p in idx) if self.labels is not None else None
        return FiniteMetric(self.dist[np.ix_(idx, idx)], labels)

    def scaled(self, factor: float) -> "FiniteMetric":
        if factor <= 0:
            raise ValueError(f"scale factor must be positive, got {factor}")
        return FiniteMetric(self.dist * factor, self.labels)

    def triangle_violations(self, tol: float = REL_TOL) -> int:
        """Number of ordered triples (i, j, k) with d(i,k) > d(i,j) + d(j,k)."""
        d = self.dist
        count = 0
        for j in range(self.n):
            through_j = d[:, j : j + 1] + d[j : j + 1, :]
            count += int(np.count_nonzero(d > through_j * (1.0 + tol)))
        return count

    def validate(self) -> None:
        """
        Check the triangle inequality over all triples.

        Raises:
            MetricInvariantError: If any triple violates it
        """
        violations = self.triangle_violations()
        if violations:
            raise MetricInvariantError(f"triangle inequality violated by {violations} triples")

    def to_dict(self) -> dict:
        return {"n": self.n, "dist": self.dist.tolist(), "labels": list(self.labels or [])}


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Undirected graph on vertices 0..n-1 with positive edge weights."""
    n: int
    edges: tuple[tuple[int, int, float], ...]
    planarity_hint: bool = False

    def __post_init__(self) -> None:
        if self.n < 0:
            raise MetricInvariantError(f"vertex count must be non-negative, got {self.n}")
        seen: set[tuple[int, int]] = set()
        normalized = []
        for u, v, w in self.edges:
            u, v, w = int(u), int(v), float(w)
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise MetricInvariantError(f"edge ({u}, {v}) references a vertex outside 0..{self.n - 1}")
            if u == v:
                raise MetricInvariantError(f"self-loop at vertex {u}")
            if not (w > 0 and np.isfinite(w)):
                raise MetricInvariantError(f"edge ({u}, {v}) has non-positive weight {w}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise MetricInvariantError(f"duplicate edge {key}")
            seen.add(key)
            normalized.append((u, v, w))
        object.__setattr__(self, "edges", tuple(normalized))

    @property
    def m(self) -> int:
        return len(self.edges)

    @classmethod
    def from_networkx(cls, g: nx.Graph, weight: str = "weight", planar: bool = False) -> "WeightedGraph":
        """Relabel a networkx graph to 0..n-1 (sorted node order) and copy its weights."""
        nodes = sorted(g.nodes)
        index = {v: i for i, v in enumerate(nodes)}
        edges = tuple(
            (index[u], index[v], float(data.get(weight, 1.0))) for u, v, data in g.edges(data=True)
        )
        return cls(len(nodes), edges, planarity_hint=planar)

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_weighted_edges_from(self.edges)
        return g

    def to_csgraph(self) -> csr_matrix:
        if not self.edges:
            return csr_matrix((self.n, self.n), dtype=np.float64)
        rows, cols, weights = zip(*self.edges)
        return csr_matrix(
            (np.concatenate([weights, weights]), (np.concatenate([rows, cols]), np.concatenate([cols, rows]))),
            shape=(self.n, self.n),
        )

    def unreachable_vertex(self) -> int | None:
        """Lowest vertex with no path from vertex 0, or None when connected."""
        if self.n <= 1:
            return None
        _, labels = connected_components(self.to_csgraph(), directed=False)
        stray = np.flatnonzero(labels != labels[0])
        return int(stray[0]) if stray.size else None

    def induced_subgraph(self, vertices: npt.ArrayLike) -> "WeightedGraph":
        """Subgraph on the given vertices, relabeled to their position in `vertices`."""
        order = [int(v) for v in np.asarray(vertices)]
        local = {v: i for i, v in enumerate(order)}
        edges = tuple(
            (local[u], local[v], w) for u, v, w in self.edges if u in local and v in local
        )
        return WeightedGraph(len(order), edges, self.planarity_hint)


def shortest_path_matrix(g: WeightedGraph) -> FloatMatrix:
    """All-pairs shortest paths by per-source Dijkstra; unreachable pairs are inf."""
    if g.n == 0:
        return np.zeros((0, 0))
    return np.asarray(dijkstra(g.to_csgraph(), directed=False), dtype=np.float64)


def metric_from_graph(g: WeightedGraph) -> FiniteMetric:
    """
    Shortest-path metric of a connected weighted graph.

    Args:
        g: Connected graph with positive weights

    Returns:
        FiniteMetric with dist[u][v] = shortest path length

    Raises:
        DisconnectedGraphError: If some vertex has no path from vertex 0
    """
    dist = shortest_path_matrix(g)
    if not np.all(np.isfinite(dist)):
        stray = int(np.flatnonzero(~np.isfinite(dist[0]))[0])
        raise DisconnectedGraphError(stray)
    logger.debug(f"Shortest-path metric computed for {g.n} vertices, {g.m} edges")
    return FiniteMetric(dist)


def aspect_ratio(m: FiniteMetric) -> float:
    """
    Max pairwise distance over min pairwise distance.

    Raises:
        DegenerateMetricError: If the metric has fewer than two points
    """
    if m.n < 2:
        raise DegenerateMetricError("degenerate metric: aspect ratio needs at least two points")
    return m.d_max / m.d_min


def is_ultrametric(m: FiniteMetric, tol: float = REL_TOL) -> bool:
    d = m.dist
    for j in range(m.n):
        bound = np.maximum(d[:, j : j + 1], d[j : j + 1, :])
        if np.any(d > bound * (1.0 + tol)):
            return False
    return True


def _greedy_cover_count(dist: FloatMatrix, ball: npt.NDArray[np.intp], r: float) -> int:
    cover = dist[:, ball] <= r * (1.0 + REL_TOL)
    cover = cover[cover.any(axis=1)]
    uncovered = np.ones(ball.size, dtype=bool)
    count = 0
    while uncovered.any():
        gains = cover[:, uncovered].sum(axis=1)
        best = int(np.argmax(gains))
        uncovered &= ~cover[best]
        count += 1
    return count


def candidate_radii(row: FloatMatrix, exhaustive: bool) -> npt.NDArray[np.float64]:
    """
    Radii tried around one center: its distinct positive distances.

    Without `exhaustive` the distances are subsampled at quarter octaves: a
    grid of ratio 2^(1/4) from the smallest to the largest distance, each grid
    value snapped down to the largest row distance not above it. The result is
    a subset of the row distances that keeps both extremes.
    """
    radii = np.unique(row[row > 0])
    if exhaustive or radii.size <= 1:
        return radii
    grid = radii[0] * 2.0 ** (np.arange(0, 4 * np.log2(radii[-1] / radii[0]) + 2) / 4)
    snapped = radii[np.clip(np.searchsorted(radii, grid * (1 + REL_TOL), side="right") - 1, 0, None)]
    return np.unique(np.append(snapped, radii[-1]))


def doubling_constant_estimate(m: FiniteMetric) -> int:
    """
    Greedy upper estimate of the doubling constant.

    For every center x and radius 2r taken from the distances out of x, the ball
    B(x, 2r) is covered greedily by radius-r balls centered at metric points; the
    largest count wins. Up to 64 points every radius is tried, so the result is
    never below the exact constant; larger metrics try the quarter-octave
    subsample of each center's distances from `candidate_radii`.
    """
    if m.n <= 1:
        return 1
    exhaustive = m.n <= EXHAUSTIVE_RADII_LIMIT
    best = 1
    for x in range(m.n):
        row = m.dist[x]
        for radius in candidate_radii(row, exhaustive):
            ball = np.flatnonzero(row <= radius * (1.0 + REL_TOL))
            if ball.size <= best:
                continue
            best = max(best, _greedy_cover_count(m.dist, ball, radius / 2.0))
    logger.debug(f"Doubling constant estimate for n={m.n}: {best}")
    return best


def doubling_constant_exact(m: FiniteMetric) -> int:
    """
    Exact doubling constant by brute force over center subsets.

    Raises:
        ValueError: If the metric has more than 16 points
    """
    if m.n > EXACT_DOUBLING_LIMIT:
        raise ValueError(f"exact doubling constant is limited to {EXACT_DOUBLING_LIMIT} points, got {m.n}")
    if m.n <= 1:
        return 1
    best = 1
    for x in range(m.n):
        row = m.dist[x]
        for radius in np.unique(row[row > 0]):
            ball = np.flatnonzero(row <= radius * (1.0 + REL_TOL))
            if ball.size <= best:
                continue
            target = sum(1 << int(p) for p in ball)
            covers = m.dist[:, ball] <= (radius / 2.0) * (1.0 + REL_TOL)
            masks = sorted(
                {sum(1 << int(p) for p in ball[row_mask]) for row_mask in covers if row_mask.any()}
            )
            best = max(best, _min_cover_size(masks, target))
    return best


def _min_cover_size(masks: list[int], target: int) -> int:
    for size in range(1, len(masks) + 1):
        for combo in itertools.combinations(masks, size):
            union = 0
            for mask in combo:
                union |= mask
            if union & target == target:
                return size
    return len(masks)
