"""
Adversarial inputs: cycle metrics, beta-compositions, the iterated composition
Z_k(N) and the recursive N-cycle graph G_k.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import dijkstra

from .errors import ParameterError, SizeCapError
from .metric import REL_TOL, FiniteMetric, WeightedGraph
from .randomness import derive_rng
from .ramsey import build_ramsey_cover
from .verification import verify_cover

logger = logging.getLogger(__name__)

DEFAULT_SIZE_CAP = 20000
TRIANGLE_CHECK_LIMIT = 1000


def cycle_metric(n: int) -> FiniteMetric:
    """Shortest-path metric of the unweighted n-cycle."""
    if n < 3:
        raise ParameterError(f"a cycle needs at least 3 points, got {n}")
    idx = np.arange(n)
    gap = np.abs(idx[:, None] - idx[None, :])
    return FiniteMetric(np.minimum(gap, n - gap).astype(np.float64))


@dataclass(frozen=True, eq=False)
class CompositionSpec:
    """Outer metric S, inner metric T and the factor beta of S_beta[T]."""
    outer: FiniteMetric
    inner: FiniteMetric
    beta: float

    def __post_init__(self) -> None:
        if self.beta < 0.5:
            raise ParameterError(f"beta must be >= 1/2, got {self.beta}")
        if self.outer.n < 2:
            raise ParameterError("the outer metric needs at least two points")

    @property
    def gamma(self) -> float:
        if self.inner.n < 2:
            return 1.0
        return self.inner.d_max / self.outer.d_min


def beta_composition(spec: CompositionSpec) -> FiniteMetric:
    """
    S_beta[T]: point u*|T| + t is copy u of inner point t.

    Distances inside a copy are d_T / (beta * gamma); across copies u != v they
    are d_S(u, v).
    """
    outer, inner = spec.outer.dist, spec.inner.dist
    size = inner.shape[0]
    across = np.kron(outer, np.ones((size, size)))
    within = np.kron(np.eye(outer.shape[0]), inner / (spec.beta * spec.gamma))
    composed = FiniteMetric(across + within)
    if composed.n <= TRIANGLE_CHECK_LIMIT:
        composed.validate()
    return composed


def composition_power(n: int, k: int, beta: float, size_cap: int = DEFAULT_SIZE_CAP) -> FiniteMetric:
    """
    Z_k(n): the n-cycle composed with itself k times.

    Raises:
        ParameterError: If n < 3 or k < 1
        SizeCapError: If n^k exceeds size_cap
    """
    if k < 1:
        raise ParameterError(f"composition depth must be >= 1, got {k}")
    if n**k > size_cap:
        raise SizeCapError(f"Z_{k}({n}) has {n**k} points, above the cap {size_cap}")
    cycle = cycle_metric(n)
    result = cycle
    for _ in range(k - 1):
        result = beta_composition(CompositionSpec(cycle, result, beta))
    return result


def cycle_graph_vertex_count(n: int, k: int) -> int:
    count = 2 * n + 2
    for _ in range(k - 1):
        count = 2 * n * (count - 2) + 2 * n + 2
    return count


def cycle_graph_edge_count(n: int, k: int) -> int:
    count = 2 * n + 2
    for _ in range(k - 1):
        count = 2 * n * count + 2
    return count


@dataclass(frozen=True, eq=False)
class CycleGraph:
    """G_k with terminals s = 0, t = 1 and its inner vertices in composition order."""
    graph: WeightedGraph
    n: int
    k: int
    inner: tuple[int, ...]


def _emit_copy(n: int, level: int, s: int, t: int, next_id: int, edges: list) -> tuple[int, list[int]]:
    cycle = list(range(next_id, next_id + 2 * n))
    next_id += 2 * n
    side = float(n * (3 * n) ** (level - 1))
    edges.append((s, cycle[0], side))
    edges.append((t, cycle[n], side))
    if level == 1:
        edges.extend((cycle[i], cycle[(i + 1) % (2 * n)], 1.0) for i in range(2 * n))
        return next_id, cycle
    inner: list[int] = []
    for i in range(2 * n):
        next_id, copy_inner = _emit_copy(n, level - 1, cycle[i], cycle[(i + 1) % (2 * n)], next_id, edges)
        inner.extend(copy_inner)
    return next_id, inner


def recursive_cycle_graph(n: int, k: int, size_cap: int = DEFAULT_SIZE_CAP) -> CycleGraph:
    """
    G_1 is a 2n-cycle of unit edges plus terminals s, t joined to the antipodal
    cycle vertices 0 and n by edges of weight n. G_k replaces every cycle edge
    of G_1 by a copy of G_(k-1) (copy terminals glued to the edge ends) and
    weighs the side edges n * (3n)^(k-1). The s-t distance is (3n)^k.

    Raises:
        ParameterError: If n < 2 or k < 1
        SizeCapError: If the vertex count exceeds size_cap
    """
    if n < 2 or k < 1:
        raise ParameterError(f"recursive cycle graph needs n >= 2 and k >= 1, got n={n}, k={k}")
    vertices = cycle_graph_vertex_count(n, k)
    if vertices > size_cap:
        raise SizeCapError(f"G_{k} for n={n} has {vertices} vertices, above the cap {size_cap}")
    edges: list[tuple[int, int, float]] = []
    total, inner = _emit_copy(n, k, 0, 1, 2, edges)
    graph = WeightedGraph(total, tuple(edges), planarity_hint=True)
    logger.debug(f"G_{k}(n={n}): {graph.n} vertices, {graph.m} edges")
    return CycleGraph(graph, n, k, tuple(inner))


@dataclass(frozen=True)
class EmbeddingCheck:
    mapping: tuple[int, ...]
    expansion: float
    contraction: float

    @property
    def distortion(self) -> float:
        return self.expansion * self.contraction

    def to_dict(self) -> dict:
        return {"expansion": self.expansion, "contraction": self.contraction, "distortion": self.distortion}


def _inner_distances(g: CycleGraph) -> np.ndarray:
    inner = np.asarray(g.inner, dtype=np.intp)
    full = dijkstra(g.graph.to_csgraph(), directed=False, indices=inner)
    return np.asarray(full[:, inner], dtype=np.float64)


def embed_composition_in_cycle_graph(n: int, k: int, size_cap: int = DEFAULT_SIZE_CAP) -> EmbeddingCheck:
    """
    Measure the bi-Lipschitz distortion of mapping [C_2n]_3^k onto the inner
    vertices of G_k scaled by 1/(3n)^(k-1); copy i of the composition goes to
    the copy of G_(k-1) that replaced cycle edge i.
    """
    composed = composition_power(2 * n, k, 3.0, size_cap)
    g = recursive_cycle_graph(n, k, size_cap)
    mapped = _inner_distances(g) / float((3 * n) ** (k - 1))
    off = ~np.eye(composed.n, dtype=bool)
    ratio = mapped[off] / composed.dist[off]
    return EmbeddingCheck(g.inner, float(ratio.max()), float((1.0 / ratio).max()))


def cross_copy_extremes(n: int, k: int, size_cap: int = DEFAULT_SIZE_CAP) -> dict[int, tuple[float, float]]:
    """
    For every cycle distance C between top-level copies of G_(k-1) in G_k, the
    smallest and largest graph distance between inner vertices of such copies.
    """
    if k < 2:
        raise ParameterError("cross-copy distances need k >= 2")
    g = recursive_cycle_graph(n, k, size_cap)
    dist = _inner_distances(g)
    per_copy = (2 * n) ** (k - 1)
    copies = 2 * n
    extremes: dict[int, tuple[float, float]] = {}
    for i in range(copies):
        for j in range(i + 1, copies):
            c = min(j - i, copies - (j - i))
            block = dist[i * per_copy : (i + 1) * per_copy, j * per_copy : (j + 1) * per_copy]
            low, high = float(block.min()), float(block.max())
            if c in extremes:
                low, high = min(low, extremes[c][0]), max(high, extremes[c][1])
            extremes[c] = (low, high)
    return extremes


def cross_copy_bounds(n: int, k: int, c: int) -> tuple[float, float]:
    """Lower and upper distance bounds between inner vertices of copies at cycle distance c."""
    lower = 2.0 * c * n * (3 * n) ** (k - 2)
    return lower, lower * (1.0 + 3.0 / (2.0 * c))


@dataclass(frozen=True)
class HardnessWitness:
    n: int
    k: int
    points: int
    ramsey_distortion: float
    threshold: float

    @property
    def consistent(self) -> bool:
        return self.ramsey_distortion >= self.threshold * (1.0 - REL_TOL)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "points": self.points,
            "ramsey_distortion": self.ramsey_distortion,
            "threshold": self.threshold,
            "consistent": self.consistent,
        }


def ramsey_hardness_witness(
    n: int,
    k: int,
    seed: int,
    beta: float = 0.5,
    size_cap: int = DEFAULT_SIZE_CAP,
    attempts_per_eta: int = 3,
    eta_fallback: bool = True,
) -> HardnessWitness:
    """
    Run the Ramsey builder with k trees on Z_k(n) and compare its verified
    distortion with n/3 - 1. Falling below is logged, never raised.
    """
    metric = composition_power(n, k, beta, size_cap)
    rng = derive_rng(seed, "witness", n, k)
    build = build_ramsey_cover(metric, k, rng, attempts_per_eta=attempts_per_eta, eta_fallback=eta_fallback)
    report = verify_cover(build.cover, metric)
    distortion = report.ramsey_distortion if report.ramsey_distortion is not None else report.plain_distortion
    witness = HardnessWitness(n, k, metric.n, distortion, n / 3.0 - 1.0)
    if witness.consistent:
        logger.info(f"Hardness witness Z_{k}({n}): ramsey distortion {distortion:.4f} >= {witness.threshold:.4f}")
    else:
        logger.warning(
            f"Hardness witness Z_{k}({n}): ramsey distortion {distortion:.4f} below {witness.threshold:.4f}"
        )
    return witness
