from .formats import FormatError, read_input, read_metric, read_graph, read_tree
from .persistence import CoverStore, build_report, write_report

__all__ = [
    "FormatError",
    "read_input",
    "read_metric",
    "read_graph",
    "read_tree",
    "CoverStore",
    "build_report",
    "write_report",
]
