"""
Plain-text metric, graph and tree files.

Metric: first line "n", then n rows of n reals.
Graph:  first line "n m", then m lines "u v w" (0-based ids, positive weights).
Tree:   first line "nodes edges", then one line per node "id point|steiner [label]",
        then one line per edge "u v w".

Blank lines and lines starting with '#' are ignored. Reals are written with
repr() so a file read back gives the same floats.
"""
import logging
from collections.abc import Iterator
from pathlib import Path
from typing import Literal

import numpy as np

from tree_cover_toolkit.domain import (
    DisconnectedGraphError,
    FiniteMetric,
    TreeCoverError,
    TreeEmbedding,
    WeightedGraph,
    metric_from_graph,
)

logger = logging.getLogger(__name__)

InputFormat = Literal["auto", "metric", "graph"]


class FormatError(TreeCoverError):
    def __init__(self, path: Path | str, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = str(path)
        self.line = line


def _content_lines(path: Path) -> Iterator[tuple[int, list[str]]]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise FormatError(path, 0, f"cannot read file: {e}") from e
    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if stripped and not stripped.startswith("#"):
            yield number, stripped.split()


class _Reader:
    def __init__(self, path: Path):
        self.path = path
        self._lines = _content_lines(path)
        self.line = 0

    def next_tokens(self, what: str) -> list[str]:
        try:
            self.line, tokens = next(self._lines)
        except StopIteration:
            raise FormatError(self.path, self.line + 1, f"unexpected end of file, expected {what}") from None
        return tokens

    def ints(self, tokens: list[str], count: int, what: str) -> list[int]:
        if len(tokens) != count:
            raise FormatError(self.path, self.line, f"expected {count} values for {what}, got {len(tokens)}")
        try:
            return [int(t) for t in tokens]
        except ValueError as e:
            raise FormatError(self.path, self.line, f"invalid integer in {what}: {e}") from e

    def floats(self, tokens: list[str], what: str) -> list[float]:
        try:
            return [float(t) for t in tokens]
        except ValueError as e:
            raise FormatError(self.path, self.line, f"invalid number in {what}: {e}") from e

    def finish(self) -> None:
        for number, _ in self._lines:
            raise FormatError(self.path, number, "unexpected trailing content")


def _fmt(value: float) -> str:
    return repr(float(value))


def read_metric(path: Path | str) -> FiniteMetric:
    """
    Read a distance-matrix file.

    Raises:
        FormatError: On malformed content
        MetricInvariantError: If the matrix is not a metric
    """
    path = Path(path)
    reader = _Reader(path)
    (n,) = reader.ints(reader.next_tokens("point count"), 1, "point count")
    if n < 1:
        raise FormatError(path, reader.line, f"point count must be positive, got {n}")
    rows = []
    for i in range(n):
        tokens = reader.next_tokens(f"row {i}")
        if len(tokens) != n:
            raise FormatError(path, reader.line, f"row {i} has {len(tokens)} entries, expected {n}")
        rows.append(reader.floats(tokens, f"row {i}"))
    reader.finish()
    return FiniteMetric(np.asarray(rows, dtype=np.float64))


def write_metric(m: FiniteMetric, path: Path | str) -> None:
    lines = [str(m.n)]
    lines.extend(" ".join(_fmt(v) for v in row) for row in m.dist)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_graph(path: Path | str, planar: bool = False) -> WeightedGraph:
    """
    Read an edge-list file; disconnected graphs are rejected.

    Raises:
        FormatError: On malformed content
        DisconnectedGraphError: If some vertex is unreachable from vertex 0
    """
    path = Path(path)
    reader = _Reader(path)
    n, m = reader.ints(reader.next_tokens("header 'n m'"), 2, "header 'n m'")
    if n < 1 or m < 0:
        raise FormatError(path, reader.line, f"invalid header n={n}, m={m}")
    edges = []
    for e in range(m):
        tokens = reader.next_tokens(f"edge {e}")
        if len(tokens) != 3:
            raise FormatError(path, reader.line, f"edge line needs 'u v w', got {len(tokens)} values")
        u, v = reader.ints(tokens[:2], 2, f"edge {e}")
        (w,) = reader.floats(tokens[2:], f"edge {e}")
        if not (0 <= u < n and 0 <= v < n):
            raise FormatError(path, reader.line, f"edge ({u}, {v}) references a vertex outside 0..{n - 1}")
        if not w > 0 or not np.isfinite(w):
            raise FormatError(path, reader.line, f"edge ({u}, {v}) needs a positive weight, got {w}")
        edges.append((u, v, w))
    reader.finish()
    try:
        graph = WeightedGraph(n, tuple(edges), planarity_hint=planar)
    except TreeCoverError as e:
        raise FormatError(path, reader.line, str(e)) from e
    unreachable = graph.unreachable_vertex()
    if unreachable is not None:
        raise DisconnectedGraphError(unreachable)
    return graph


def write_graph(g: WeightedGraph, path: Path | str) -> None:
    lines = [f"{g.n} {g.m}"]
    lines.extend(f"{u} {v} {_fmt(w)}" for u, v, w in g.edges)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def detect_format(path: Path | str) -> Literal["metric", "graph"]:
    """A one-value header means a distance matrix, two values an edge list."""
    path = Path(path)
    for number, tokens in _content_lines(path):
        if len(tokens) == 1:
            return "metric"
        if len(tokens) == 2:
            return "graph"
        raise FormatError(path, number, "header must be 'n' (metric) or 'n m' (graph)")
    raise FormatError(path, 1, "empty input file")


def read_input(
    path: Path | str,
    fmt: InputFormat = "auto",
    planar: bool = False,
) -> tuple[FiniteMetric, WeightedGraph | None]:
    """Load an input file as a metric, plus the graph when the file is a graph."""
    kind = detect_format(path) if fmt == "auto" else fmt
    if kind == "metric":
        return read_metric(path), None
    graph = read_graph(path, planar=planar)
    logger.debug(f"Loaded graph {path}: {graph.n} vertices, {graph.m} edges")
    return metric_from_graph(graph), graph


def read_tree(path: Path | str) -> TreeEmbedding:
    """
    Read a tree file. Point labels must be exactly 0..p-1.

    Raises:
        FormatError: On malformed content
    """
    path = Path(path)
    reader = _Reader(path)
    nodes, edge_count = reader.ints(reader.next_tokens("header 'nodes edges'"), 2, "header 'nodes edges'")
    if nodes < 1 or edge_count != nodes - 1:
        raise FormatError(
            path, reader.line, f"a tree on {nodes} nodes needs {nodes - 1} edges, header says {edge_count}"
        )
    labels: dict[int, int] = {}
    seen: set[int] = set()
    for _ in range(nodes):
        tokens = reader.next_tokens("node line")
        if len(tokens) < 2:
            raise FormatError(path, reader.line, "node line needs 'id kind [label]'")
        (node,) = reader.ints(tokens[:1], 1, "node id")
        if not 0 <= node < nodes or node in seen:
            raise FormatError(path, reader.line, f"invalid or repeated node id {node}")
        seen.add(node)
        kind = tokens[1]
        if kind == "point":
            (label,) = reader.ints(tokens[2:], 1, "point label")
            if label in labels:
                raise FormatError(path, reader.line, f"point {label} appears twice")
            labels[label] = node
        elif kind == "steiner":
            if len(tokens) != 2:
                raise FormatError(path, reader.line, "steiner nodes carry no label")
        else:
            raise FormatError(path, reader.line, f"node kind must be 'point' or 'steiner', got {kind!r}")
    if sorted(labels) != list(range(len(labels))):
        raise FormatError(path, reader.line, "point labels must be exactly 0..p-1")
    edges = []
    for e in range(edge_count):
        tokens = reader.next_tokens(f"edge {e}")
        if len(tokens) != 3:
            raise FormatError(path, reader.line, f"edge line needs 'u v w', got {len(tokens)} values")
        u, v = reader.ints(tokens[:2], 2, f"edge {e}")
        (w,) = reader.floats(tokens[2:], f"edge {e}")
        edges.append((u, v, w))
    reader.finish()
    try:
        return TreeEmbedding(nodes, tuple(edges), tuple(labels[x] for x in range(len(labels))))
    except TreeCoverError as e:
        raise FormatError(path, reader.line, str(e)) from e


def write_tree(t: TreeEmbedding, path: Path | str) -> None:
    label_of = {node: x for x, node in enumerate(t.point_nodes)}
    lines = [f"{t.num_nodes} {len(t.edges)}"]
    for node in range(t.num_nodes):
        lines.append(f"{node} point {label_of[node]}" if node in label_of else f"{node} steiner")
    lines.extend(f"{u} {v} {_fmt(w)}" for u, v, w in t.edges)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
