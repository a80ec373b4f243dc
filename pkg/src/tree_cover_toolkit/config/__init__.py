from .settings import settings, get_settings, Settings
from .constants import (
    COVER_MANIFEST,
    HISTOGRAM_BINS,
    HISTOGRAM_FILE,
    REPORT_FILE,
    VERIFY_REPORT_FILE,
    SCHEMA_VERSION,
    tree_file_name,
)

__all__ = [
    "settings",
    "get_settings",
    "Settings",
    "COVER_MANIFEST",
    "HISTOGRAM_BINS",
    "HISTOGRAM_FILE",
    "REPORT_FILE",
    "VERIFY_REPORT_FILE",
    "SCHEMA_VERSION",
    "tree_file_name",
]
