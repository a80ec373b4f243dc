SCHEMA_VERSION = 1

COVER_MANIFEST = "cover.json"
REPORT_FILE = "report.json"
VERIFY_REPORT_FILE = "verification.json"
HISTOGRAM_FILE = "distortion_histogram.csv"
TREE_FILE_TEMPLATE = "tree_{index:03d}.txt"

HISTOGRAM_BINS = 20


def tree_file_name(index: int) -> str:
    """File name of the index-th tree inside a cover directory."""
    return TREE_FILE_TEMPLATE.format(index=index)
