"""
Tree covers of planar graphs through shortest-path separators.

Each recursion level splits every component with a few root paths of a
shortest-path tree; every vertex then keeps a small landmark set on each path
and the trees for a path attach every vertex to one random landmark.
"""
import itertools
import logging
import math
from dataclasses import dataclass

import networkx as nx
import numpy as np
from networkx.algorithms.planar_drawing import triangulate_embedding
import numpy.typing as npt
from scipy.sparse.csgraph import connected_components, dijkstra

from .errors import (
    ConstructionInvariantError,
    InvalidSeparatorPathError,
    NonPlanarGraphError,
    ParameterError,
    RecursionDepthError,
)
from .metric import REL_TOL, FiniteMetric, WeightedGraph, metric_from_graph, shortest_path_matrix
from .randomness import derive_rng
from .tree import CoverKind, Edge, TreeCover, TreeEmbedding, complete_forest, dedupe_trees

logger = logging.getLogger(__name__)

COVERAGE_CHECK_LIMIT = 300
MAX_FACE_PAIRS = 20000


@dataclass(frozen=True)
class PathSeparator:
    """
    Shortest paths whose removal leaves components of at most n/2 vertices.

    Vertex ids refer to the graph the separator was extracted from.
    """
    paths: tuple[tuple[int, ...], ...]
    removed: frozenset[int]
    components: tuple[tuple[int, ...], ...]

    @property
    def largest_component(self) -> int:
        return max((len(c) for c in self.components), default=0)


@dataclass(frozen=True)
class LandmarkSets:
    """Landmarks of every vertex on one path, stored as positions along the path."""
    path: tuple[int, ...]
    prefix: tuple[float, ...]
    positions: tuple[tuple[int, ...], ...]

    def vertices(self, x: int) -> list[int]:
        return [self.path[i] for i in self.positions[x]]

    def path_distance(self, i: int, j: int) -> float:
        return abs(self.prefix[i] - self.prefix[j])

    @property
    def max_size(self) -> int:
        return max((len(p) for p in self.positions), default=0)


def _edge_weights(g: WeightedGraph) -> dict[tuple[int, int], float]:
    return {(min(u, v), max(u, v)): w for u, v, w in g.edges}


def path_prefix_lengths(g: WeightedGraph, path: tuple[int, ...]) -> list[float]:
    """
    Cumulative edge lengths along a vertex sequence.

    Raises:
        InvalidSeparatorPathError: If consecutive vertices are not adjacent
    """
    weights = _edge_weights(g)
    prefix = [0.0]
    for u, v in itertools.pairwise(path):
        w = weights.get((min(u, v), max(u, v)))
        if w is None:
            raise InvalidSeparatorPathError(f"path steps from {u} to {v} without an edge")
        prefix.append(prefix[-1] + w)
    return prefix


def check_shortest_path(g: WeightedGraph, path: tuple[int, ...], dist: npt.NDArray[np.float64]) -> list[float]:
    """
    Raises:
        InvalidSeparatorPathError: If the path is longer than the distance between its ends
    """
    prefix = path_prefix_lengths(g, path)
    expected = float(dist[path[0], path[-1]])
    if abs(prefix[-1] - expected) > REL_TOL * max(1.0, expected):
        raise InvalidSeparatorPathError(
            f"path {path[0]}->{path[-1]} has length {prefix[-1]} but the distance is {expected}"
        )
    return prefix


def _components_without(g: WeightedGraph, removed: set[int]) -> list[tuple[int, ...]]:
    keep = np.array([v for v in range(g.n) if v not in removed], dtype=np.intp)
    if keep.size == 0:
        return []
    sub = g.to_csgraph()[keep][:, keep]
    count, labels = connected_components(sub, directed=False)
    return [tuple(int(v) for v in keep[labels == c]) for c in range(count)]


def _faces(embedding: nx.PlanarEmbedding) -> list[list[int]]:
    visited: set[tuple[int, int]] = set()
    faces = []
    for v in sorted(embedding.nodes):
        for w in embedding.neighbors_cw_order(v):
            if (v, w) not in visited:
                faces.append(embedding.traverse_face(v, w, mark_half_edges=visited))
    return faces


def triangle_faces(embedding: nx.PlanarEmbedding) -> list[tuple[int, ...]]:
    """Corner triples of the faces of a full triangulation of the embedding."""
    if embedding.number_of_nodes() < 3:
        return []
    triangulated, _ = triangulate_embedding(embedding, fully_triangulate=True)
    return sorted({tuple(sorted(set(face))) for face in _faces(triangulated)})


def _drop_prefixes(paths: list[tuple[int, ...]]) -> tuple[tuple[int, ...], ...]:
    kept = []
    for path in paths:
        if any(other != path and other[: len(path)] == path for other in paths):
            continue
        if path not in kept:
            kept.append(path)
    return tuple(kept)


def planar_separator(g: WeightedGraph, dist: npt.NDArray[np.float64] | None = None) -> PathSeparator:
    """
    Find root paths of a shortest-path tree whose removal halves the graph.

    Candidates are tried in order: one root path, two root paths whose ends
    share an edge or a face of the planar embedding, then the three corners of
    each face of a full triangulation of the embedding. Some triangle always
    halves the graph, so at most three paths are returned.

    Args:
        g: Connected planar graph
        dist: All-pairs distances of g when already known

    Returns:
        PathSeparator with every component of size <= n/2

    Raises:
        NonPlanarGraphError: If g is not planar
        ConstructionInvariantError: If no triangle of the triangulation halves g
    """
    if g.n <= 1:
        return PathSeparator((), frozenset(), ())
    is_planar, embedding = nx.check_planarity(g.to_networkx())
    if not is_planar:
        raise NonPlanarGraphError(f"non-planar input: graph on {g.n} vertices has no planar embedding")
    dist = dist if dist is not None else shortest_path_matrix(g)
    root = int(np.argmin(dist.max(axis=1)))
    _, predecessors = dijkstra(g.to_csgraph(), directed=False, indices=root, return_predecessors=True)

    def root_path(v: int) -> tuple[int, ...]:
        path = [v]
        while path[-1] != root:
            path.append(int(predecessors[path[-1]]))
        return tuple(reversed(path))

    half = g.n / 2

    def evaluate(ends: tuple[int, ...]) -> tuple[int, list[tuple[int, ...]]]:
        removed = {v for end in ends for v in root_path(end)}
        components = _components_without(g, removed)
        return max((len(c) for c in components), default=0), components

    def accept(ends: tuple[int, ...]) -> PathSeparator:
        paths = _drop_prefixes([root_path(v) for v in ends])
        for path in paths:
            check_shortest_path(g, path, dist)
        _, components = evaluate(ends)
        removed = frozenset(v for path in paths for v in path)
        return PathSeparator(paths, removed, tuple(components))

    best_ends: tuple[int, ...] = (root,)
    best_size = g.n
    for v in range(g.n):
        size, _ = evaluate((v,))
        if size <= half:
            return accept((v,))
        if size < best_size:
            best_size, best_ends = size, (v,)

    tree_edges = {(min(v, int(predecessors[v])), max(v, int(predecessors[v]))) for v in range(g.n) if v != root}
    pairs = [(u, v) for u, v, _ in g.edges if (min(u, v), max(u, v)) not in tree_edges]
    for face in _faces(embedding):
        pairs.extend(itertools.combinations(sorted(set(face)), 2))
        if len(pairs) > MAX_FACE_PAIRS:
            break
    seen: set[tuple[int, int]] = set()
    for u, v in pairs:
        key = (min(u, v), max(u, v))
        if key in seen:
            continue
        seen.add(key)
        size, _ = evaluate(key)
        if size <= half:
            return accept(key)
        if size < best_size:
            best_size, best_ends = size, key

    for corners in triangle_faces(embedding):
        size, _ = evaluate(corners)
        if size <= half:
            return accept(corners)
        if size < best_size:
            best_size, best_ends = size, corners
    raise ConstructionInvariantError(
        f"no face of the triangulated embedding halves {g.n} vertices; best ends {best_ends} leave {best_size}"
    )


def landmarks(
    g: WeightedGraph,
    path: tuple[int, ...],
    eps: float,
    dist: npt.NDArray[np.float64] | None = None,
) -> LandmarkSets:
    """
    Landmark sets of every vertex on a shortest path.

    Starting from the nearest path vertex z0, each direction is scanned and a
    vertex z is kept when d(x, z) < (d(x, last) + d_P(z, last)) / (1 + eps),
    `last` being the previously kept landmark.

    Raises:
        ParameterError: If eps is outside (0, 1)
        InvalidSeparatorPathError: If the path is not a shortest path of g
    """
    if not 0 < eps < 1:
        raise ParameterError(f"landmark eps must lie in (0, 1), got {eps}")
    dist = dist if dist is not None else shortest_path_matrix(g)
    prefix = np.asarray(check_shortest_path(g, path, dist))
    on_path = dist[:, list(path)]
    bound = 8.0 / eps
    positions = []
    for x in range(g.n):
        dx = on_path[x]
        z0 = int(np.argmin(dx))
        chosen = [z0]
        for step in (1, -1):
            last = z0
            for z in range(z0 + step, len(path) if step == 1 else -1, step):
                if dx[z] < (dx[last] + abs(prefix[z] - prefix[last])) / (1.0 + eps) * (1.0 - REL_TOL):
                    chosen.append(z)
                    last = z
        if len(chosen) > bound:
            raise ConstructionInvariantError(f"vertex {x} has {len(chosen)} landmarks, above 8/eps = {bound}")
        positions.append(tuple(sorted(chosen)))
    return LandmarkSets(tuple(path), tuple(float(p) for p in prefix), tuple(positions))


def landmark_coverage_violations(
    dist: npt.NDArray[np.float64],
    sets: LandmarkSets,
    eps: float,
) -> list[tuple[int, int]]:
    """
    Crossing pairs (x, y) without landmarks u of x and v of y such that
    d(x,u) + d_P(u,v) + d(v,y) <= (1+eps) d(x,y).

    A pair crosses the path when some path vertex lies on one of its shortest paths.
    """
    n = dist.shape[0]
    path = list(sets.path)
    prefix = np.asarray(sets.prefix)
    along = np.abs(prefix[:, None] - prefix[None, :])
    via = np.full((n, len(path)), np.inf)
    for x in range(n):
        own = np.asarray(sets.positions[x], dtype=np.intp)
        via[x] = (dist[x, [path[i] for i in own]][:, None] + along[own]).min(axis=0)
    violations = []
    for y in range(n):
        own = np.asarray(sets.positions[y], dtype=np.intp)
        best = (via[:, own] + dist[[path[i] for i in own], y][None, :]).min(axis=1)
        through = (dist[:, path] + dist[path, y][None, :]).min(axis=1)
        crossing = through <= dist[:, y] * (1.0 + REL_TOL)
        # both halves of a witness carry their own rounding slack
        bad = crossing & (best > (1.0 + eps) * dist[:, y] * (1.0 + 4 * REL_TOL))
        violations.extend((int(x), y) for x in np.flatnonzero(bad) if x < y)
    return violations


@dataclass(frozen=True)
class SeparatorBuild:
    cover: TreeCover
    seed: int
    depth: int
    trees_per_path: int
    paths_per_level: tuple[int, ...]
    max_landmarks: int

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "recursion_depth": self.depth,
            "trees_per_path": self.trees_per_path,
            "paths_per_level": list(self.paths_per_level),
            "max_landmarks": self.max_landmarks,
            "num_trees": self.cover.num_trees,
        }


def build_separator_cover(
    g: WeightedGraph,
    eps: float,
    c: float,
    rng_seed: int,
    m: FiniteMetric | None = None,
) -> SeparatorBuild:
    """
    Build the randomized separator cover of a planar graph.

    Every separator path P gets ceil(c * ln n / eps^2) trees; a tree is P plus
    one edge from each other vertex of the component to a random landmark.
    Trees of the same (level, path index, tree index) slot are merged across
    sibling components and completed to spanning trees.

    Args:
        g: Connected planar graph
        eps: Target stretch slack in (0, 1)
        c: Tree-count constant (> 0)
        rng_seed: Seed of every random choice
        m: Shortest-path metric of g when already known

    Raises:
        ParameterError: On eps or c out of range
        NonPlanarGraphError: If g is not planar
        RecursionDepthError: If components stop halving
    """
    if not 0 < eps < 1:
        raise ParameterError(f"eps must lie in (0, 1), got {eps}")
    if c <= 0:
        raise ParameterError(f"tree-count constant must be positive, got {c}")
    m = m if m is not None else metric_from_graph(g)
    n = g.n
    per_path = max(1, math.ceil(c * math.log(max(n, 2)) / eps**2))
    max_depth = math.ceil(math.log2(max(n, 2))) + 1
    slots: dict[tuple[int, int, int], list[Edge]] = {}
    paths_per_level: list[int] = []
    max_landmarks = 0
    frontier: list[tuple[int, ...]] = [tuple(range(n))] if n > 1 else []
    depth = 0
    while frontier:
        if depth > max_depth:
            raise RecursionDepthError(f"separator recursion exceeded depth {max_depth} on {n} vertices")
        next_frontier: list[tuple[int, ...]] = []
        paths_here = 0
        for index, vertices in enumerate(frontier):
            sub = g.induced_subgraph(vertices)
            sub_dist = shortest_path_matrix(sub)
            separator = planar_separator(sub, sub_dist)
            if separator.largest_component > len(vertices) / 2:
                raise ConstructionInvariantError(
                    f"separator left a component of {separator.largest_component} out of {len(vertices)} vertices"
                )
            paths_here += len(separator.paths)
            weights = _edge_weights(sub)
            for path_index, path in enumerate(separator.paths):
                sets = landmarks(sub, path, eps, sub_dist)
                max_landmarks = max(max_landmarks, sets.max_size)
                if len(vertices) <= COVERAGE_CHECK_LIMIT:
                    missed = landmark_coverage_violations(sub_dist, sets, eps)
                    if missed:
                        raise ConstructionInvariantError(
                            f"{len(missed)} crossing pairs lack a landmark witness, e.g. {missed[0]}"
                        )
                on_path = set(path)
                path_edges = [
                    (vertices[u], vertices[v], weights[(min(u, v), max(u, v))])
                    for u, v in itertools.pairwise(path)
                ]
                for tree_index in range(per_path):
                    rng = derive_rng(rng_seed, "planar", depth, index, path_index, tree_index)
                    edges = list(path_edges)
                    for x in range(sub.n):
                        if x in on_path:
                            continue
                        options = sets.vertices(x)
                        u = options[int(rng.integers(len(options)))]
                        edges.append((vertices[x], vertices[u], float(sub_dist[x, u])))
                    slots.setdefault((depth, path_index, tree_index), []).extend(edges)
            next_frontier.extend(
                tuple(vertices[v] for v in component) for component in separator.components if len(component) > 1
            )
        logger.debug(f"Separator level {depth}: {len(frontier)} components, {paths_here} paths")
        paths_per_level.append(paths_here)
        frontier = next_frontier
        depth += 1

    trees: list[TreeEmbedding] = [complete_forest(m, slots[key]) for key in sorted(slots)]
    if not trees:
        trees = [complete_forest(m, [])]
    unique = dedupe_trees(trees)
    logger.info(
        f"Separator cover: {len(unique)} distinct trees ({len(trees)} slots), depth {depth}, "
        f"{per_path} trees per path"
    )
    cover = TreeCover(tuple(unique), CoverKind.PLAIN, 1.0 + eps)
    return SeparatorBuild(cover, rng_seed, depth, per_path, tuple(paths_per_level), max_landmarks)
