"""
Tree embeddings, hierarchically separated trees and tree covers.
"""
import logging
from collections import deque
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np
import numpy.typing as npt
from scipy.cluster.hierarchy import linkage
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra
from scipy.spatial.distance import squareform

from .errors import (
    ConstructionInvariantError,
    InvalidHstError,
    MetricInvariantError,
    ParameterError,
    UnmappedPointError,
)
from .metric import REL_TOL, FiniteMetric, is_ultrametric

logger = logging.getLogger(__name__)

Edge = tuple[int, int, float]


@dataclass(frozen=True, eq=False)
class TreeEmbedding:
    """
    Edge-weighted tree whose nodes include every metric point.

    Nodes are 0..num_nodes-1; point x lives at node point_nodes[x]. Nodes not
    listed in point_nodes are Steiner nodes.
    """
    num_nodes: int
    edges: tuple[Edge, ...]
    point_nodes: tuple[int, ...]
    root: int | None = None

    def __post_init__(self) -> None:
        if self.num_nodes < 1:
            raise MetricInvariantError("a tree needs at least one node")
        if len(self.edges) != self.num_nodes - 1:
            raise MetricInvariantError(
                f"a tree on {self.num_nodes} nodes needs {self.num_nodes - 1} edges, got {len(self.edges)}"
            )
        edges = []
        for u, v, w in self.edges:
            u, v, w = int(u), int(v), float(w)
            if not (0 <= u < self.num_nodes and 0 <= v < self.num_nodes) or u == v:
                raise MetricInvariantError(f"invalid tree edge ({u}, {v})")
            if not w > 0:
                raise MetricInvariantError(f"tree edge ({u}, {v}) has non-positive weight {w}")
            edges.append((u, v, w))
        object.__setattr__(self, "edges", tuple(edges))
        nodes = tuple(int(p) for p in self.point_nodes)
        if len(set(nodes)) != len(nodes):
            raise MetricInvariantError("two metric points share a tree node")
        if any(not 0 <= p < self.num_nodes for p in nodes):
            raise MetricInvariantError("a metric point maps outside the tree")
        object.__setattr__(self, "point_nodes", nodes)
        if self.num_nodes > 1:
            count, _ = connected_components(self.to_csgraph(), directed=False)
            if count != 1:
                raise MetricInvariantError(f"tree edges form {count} components")

    @property
    def num_points(self) -> int:
        return len(self.point_nodes)

    def to_csgraph(self) -> csr_matrix:
        if not self.edges:
            return csr_matrix((self.num_nodes, self.num_nodes), dtype=np.float64)
        rows, cols, weights = zip(*self.edges)
        return csr_matrix(
            (np.concatenate([weights, weights]), (np.concatenate([rows, cols]), np.concatenate([cols, rows]))),
            shape=(self.num_nodes, self.num_nodes),
        )

    def node_of(self, x: int) -> int:
        if not 0 <= x < len(self.point_nodes):
            raise UnmappedPointError(f"point {x} is not mapped into this tree")
        return self.point_nodes[x]

    @cached_property
    def _rooted(self) -> tuple[list[int], list[float], list[int]]:
        adjacency: list[list[tuple[int, float]]] = [[] for _ in range(self.num_nodes)]
        for u, v, w in self.edges:
            adjacency[u].append((v, w))
            adjacency[v].append((u, w))
        root = self.root if self.root is not None else 0
        parent = [-1] * self.num_nodes
        weight = [0.0] * self.num_nodes
        depth = [0] * self.num_nodes
        seen = [False] * self.num_nodes
        seen[root] = True
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v, w in adjacency[u]:
                if not seen[v]:
                    seen[v] = True
                    parent[v], weight[v], depth[v] = u, w, depth[u] + 1
                    queue.append(v)
        return parent, weight, depth

    def path_weights(self, x: int, y: int) -> list[float]:
        """Edge weights along the tree path from point x to point y, in walking order."""
        parent, weight, depth = self._rooted
        u, v = self.node_of(x), self.node_of(y)
        up: list[float] = []
        down: list[float] = []
        while depth[u] > depth[v]:
            up.append(weight[u])
            u = parent[u]
        while depth[v] > depth[u]:
            down.append(weight[v])
            v = parent[v]
        while u != v:
            up.append(weight[u])
            down.append(weight[v])
            u, v = parent[u], parent[v]
        return up + down[::-1]

    def point_distances(self) -> npt.NDArray[np.float64]:
        """
        Tree distances between all metric points.

        Entry (x, y) with x < y is accumulated from x along the path, the same
        order tree_distance uses; the lower triangle mirrors the upper one.
        """
        n = self.num_points
        if self.num_nodes == 1:
            return np.zeros((n, n))
        sources = np.asarray(self.point_nodes, dtype=np.intp)
        full = dijkstra(self.to_csgraph(), directed=False, indices=sources)
        dist = np.asarray(full[:, sources], dtype=np.float64)
        return np.triu(dist) + np.triu(dist, 1).T

    def edge_signature(self) -> frozenset[tuple[int, int, float]]:
        return frozenset((min(u, v), max(u, v), w) for u, v, w in self.edges)


def tree_distance(t: TreeEmbedding, x: int, y: int) -> float:
    """
    Length of the unique tree path between points x and y.

    Raises:
        UnmappedPointError: If x or y is not a point of the tree
    """
    total = 0.0
    for w in t.path_weights(x, y):
        total += w
    return total


@dataclass(frozen=True, eq=False)
class HstTree:
    """
    Labeled rooted tree; the distance between two points is the label of their
    lowest common ancestor.

    Attributes:
        labels: Label per node, leaves carry 0
        parent: Parent per node, -1 for the root
        leaf_of: Node holding each metric point
        mu: Separation factor between parent and child labels
    """
    labels: tuple[float, ...]
    parent: tuple[int, ...]
    leaf_of: tuple[int, ...]
    mu: float = 1.0

    def __post_init__(self) -> None:
        size = len(self.labels)
        if len(self.parent) != size:
            raise InvalidHstError("labels and parent arrays differ in length")
        roots = [v for v, p in enumerate(self.parent) if p == -1]
        if len(roots) != 1:
            raise InvalidHstError(f"an HST needs exactly one root, found {len(roots)}")
        if self.mu < 1:
            raise InvalidHstError(f"separation factor must be >= 1, got {self.mu}")
        has_child = [False] * size
        for v, p in enumerate(self.parent):
            if p == -1:
                continue
            if not 0 <= p < size:
                raise InvalidHstError(f"node {v} has parent {p} outside the tree")
            has_child[p] = True
            if self.labels[v] > self.labels[p]:
                raise InvalidHstError(
                    f"label of node {v} ({self.labels[v]}) exceeds its parent's ({self.labels[p]})"
                )
            if self.mu > 1 and self.labels[v] > 0 and self.labels[p] < self.mu * self.labels[v] * (1 - REL_TOL):
                raise InvalidHstError(f"labels of node {v} and its parent drop by less than {self.mu}")
        if len(set(self.leaf_of)) != len(self.leaf_of):
            raise InvalidHstError("two metric points share a leaf")
        for x, leaf in enumerate(self.leaf_of):
            if not 0 <= leaf < size or has_child[leaf] or self.labels[leaf] != 0:
                raise InvalidHstError(f"point {x} must sit on a childless node with label 0")
        self.top_down_order()

    @property
    def root(self) -> int:
        return self.parent.index(-1)

    def top_down_order(self) -> list[int]:
        children: list[list[int]] = [[] for _ in self.labels]
        for v, p in enumerate(self.parent):
            if p != -1:
                children[p].append(v)
        order = [self.root]
        for u in order:
            order.extend(children[u])
        if len(order) != len(self.labels):
            raise InvalidHstError("parent links contain a cycle")
        return order

    def distance(self, x: int, y: int) -> float:
        if x == y:
            return 0.0
        ancestors = set()
        u = self.leaf_of[x]
        while u != -1:
            ancestors.add(u)
            u = self.parent[u]
        v = self.leaf_of[y]
        while v not in ancestors:
            v = self.parent[v]
        return self.labels[v]

    def to_matrix(self) -> npt.NDArray[np.float64]:
        n = len(self.leaf_of)
        dist = np.zeros((n, n))
        for x in range(n):
            for y in range(x + 1, n):
                dist[x, y] = dist[y, x] = self.distance(x, y)
        return dist


def hst_to_tree(h: HstTree) -> TreeEmbedding:
    """
    Steiner realization of an HST.

    The edge from node u to child v weighs (label(u) - label(v)) / 2; chains of
    equal labels are contracted so no zero-weight edge appears.

    Raises:
        InvalidHstError: If the labels do not describe a valid ultrametric
    """
    order = h.top_down_order()
    rep = list(range(len(h.labels)))
    for v in order:
        p = h.parent[v]
        if p != -1 and h.labels[v] == h.labels[p]:
            rep[v] = rep[p]
    index: dict[int, int] = {}
    for v in order:
        if rep[v] == v:
            index[v] = len(index)
    edges = tuple(
        (index[v], index[rep[h.parent[v]]], (h.labels[h.parent[v]] - h.labels[v]) / 2.0)
        for v in order
        if rep[v] == v and h.parent[v] != -1
    )
    points = tuple(index[rep[leaf]] for leaf in h.leaf_of)
    try:
        return TreeEmbedding(len(index), edges, points, root=0)
    except MetricInvariantError as e:
        raise InvalidHstError(f"HST has no valid Steiner realization: {e}") from e


def hst_from_ultrametric(dist: npt.ArrayLike, check: bool = True) -> HstTree:
    """
    Build the HST of an ultrametric distance matrix by single linkage.

    Raises:
        InvalidHstError: If check is set and the matrix is not an ultrametric
    """
    matrix = np.asarray(dist, dtype=np.float64)
    n = matrix.shape[0]
    if n == 1:
        return HstTree((0.0,), (-1,), (0,))
    if check and not is_ultrametric(FiniteMetric(matrix)):
        raise InvalidHstError("matrix does not satisfy the ultrametric inequality")
    merges = linkage(squareform(matrix, checks=False), method="single")
    labels = [0.0] * n + [float(row[2]) for row in merges]
    parent = [-1] * (2 * n - 1)
    for i, row in enumerate(merges):
        parent[int(row[0])] = n + i
        parent[int(row[1])] = n + i
    return HstTree(tuple(labels), tuple(parent), tuple(range(n)))


class CoverKind(str, Enum):
    PLAIN = "plain"
    RAMSEY = "ramsey"


@dataclass(frozen=True, eq=False)
class TreeCover:
    trees: tuple[TreeEmbedding, ...]
    kind: CoverKind
    claimed_distortion: float
    home_tree: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if not self.trees:
            raise ParameterError("a tree cover needs at least one tree")
        sizes = {t.num_points for t in self.trees}
        if len(sizes) != 1:
            raise ParameterError(f"trees of one cover embed different point counts: {sorted(sizes)}")
        if self.claimed_distortion < 1 - REL_TOL:
            raise ParameterError(f"claimed distortion must be >= 1, got {self.claimed_distortion}")
        if self.kind == CoverKind.RAMSEY:
            if self.home_tree is None or len(self.home_tree) != self.num_points:
                raise ParameterError("a Ramsey cover needs a home tree for every point")
            if any(not 0 <= i < len(self.trees) for i in self.home_tree):
                raise ParameterError("home tree index out of range")

    @property
    def num_points(self) -> int:
        return self.trees[0].num_points

    @property
    def num_trees(self) -> int:
        return len(self.trees)


def complete_forest(m: FiniteMetric, edges: list[Edge]) -> TreeEmbedding:
    """
    Complete a forest on the metric points to a spanning tree.

    Components are joined Kruskal-style over the metric distances, so every
    added edge weighs a true distance and the result still dominates.

    Raises:
        ConstructionInvariantError: If the given edges contain a cycle
    """
    n = m.n
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    tree_edges: list[Edge] = []
    for u, v, w in edges:
        ru, rv = find(u), find(v)
        if ru == rv:
            raise ConstructionInvariantError(f"forest edge ({u}, {v}) closes a cycle")
        parent[ru] = rv
        tree_edges.append((u, v, w))
    missing = n - 1 - len(tree_edges)
    if missing > 0:
        rows, cols = np.triu_indices(n, 1)
        order = np.argsort(m.dist[rows, cols], kind="stable")
        for idx in order:
            u, v = int(rows[idx]), int(cols[idx])
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[ru] = rv
                tree_edges.append((u, v, float(m.dist[u, v])))
                missing -= 1
                if missing == 0:
                    break
        logger.debug(f"Forest completed with {n - 1 - len(edges)} extra edges")
    return TreeEmbedding(n, tuple(tree_edges), tuple(range(n)))


def dedupe_trees(trees: list[TreeEmbedding]) -> list[TreeEmbedding]:
    """Drop trees whose edge sets repeat an earlier tree, keeping first occurrences."""
    seen: set[frozenset[tuple[int, int, float]]] = set()
    unique = []
    for t in trees:
        signature = t.edge_signature()
        if signature not in seen:
            seen.add(signature)
            unique.append(t)
    return unique
