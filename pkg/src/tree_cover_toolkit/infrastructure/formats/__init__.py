from .text_formats import (
    FormatError,
    detect_format,
    read_graph,
    read_input,
    read_metric,
    read_tree,
    write_graph,
    write_metric,
    write_tree,
)

__all__ = [
    "FormatError",
    "detect_format",
    "read_graph",
    "read_input",
    "read_metric",
    "read_tree",
    "write_graph",
    "write_metric",
    "write_tree",
]
