from typing import Any


class TreeCoverError(Exception):
    pass


class DegenerateMetricError(TreeCoverError):
    pass


class MetricInvariantError(TreeCoverError):
    pass


class DisconnectedGraphError(TreeCoverError):
    def __init__(self, vertex: int, source: int = 0):
        super().__init__(f"Graph is disconnected: no path from vertex {source} to vertex {vertex}")
        self.vertex = vertex
        self.source = source


class ParameterError(TreeCoverError):
    pass


class UnmappedPointError(TreeCoverError):
    pass


class InvalidHstError(TreeCoverError):
    pass


class CoverMetricMismatchError(TreeCoverError):
    pass


class NonPlanarGraphError(TreeCoverError):
    pass


class InvalidSeparatorPathError(TreeCoverError):
    pass


class RecursionDepthError(TreeCoverError):
    pass


class ConstructionInvariantError(TreeCoverError):
    pass


class PartitionInvariantError(TreeCoverError):
    pass


class SizeCapError(TreeCoverError):
    pass


class ResamplingDidNotConvergeError(TreeCoverError):
    """Moser-Tardos resampling hit its round cap with events still violated."""

    def __init__(self, rounds: int, witnesses: list[tuple[int, int]]):
        preview = ", ".join(f"(x={x}, level={i})" for x, i in witnesses[:5])
        super().__init__(
            f"LLL resampling did not converge after {rounds} rounds; "
            f"{len(witnesses)} unpadded (point, level) pairs, e.g. {preview}"
        )
        self.rounds = rounds
        self.witnesses = witnesses


class RamseyExtractionError(TreeCoverError):
    """No attempt reached the |Z| >= |S|^(1-1/alpha) size bound."""

    def __init__(self, message: str, best_attempt: Any = None):
        super().__init__(message)
        self.best_attempt = best_attempt
