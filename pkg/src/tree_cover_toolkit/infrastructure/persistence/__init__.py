from .cover_store import CoverStore
from .reports import build_report, distortion_histogram, dumps_report, write_histogram, write_report

__all__ = [
    "CoverStore",
    "build_report",
    "distortion_histogram",
    "dumps_report",
    "write_histogram",
    "write_report",
]
