import json
import logging
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from tree_cover_toolkit import __version__
from tree_cover_toolkit.config import HISTOGRAM_BINS, SCHEMA_VERSION
from tree_cover_toolkit.domain import DistortionReport

logger = logging.getLogger(__name__)


def _json_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def build_report(command: str, config: dict, seed: int | None, sections: dict) -> dict:
    """Versioned report envelope; no timestamps, so equal inputs give equal bytes."""
    return {
        "schema": SCHEMA_VERSION,
        "tool_version": __version__,
        "command": command,
        "seed": seed,
        "config": config,
        **sections,
    }


def dumps_report(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n"


def write_report(payload: dict, path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_report(payload), encoding="utf-8")
    logger.info(f"Report written to {path}")
    return path


def distortion_histogram(report: DistortionReport, bins: int = HISTOGRAM_BINS) -> pd.DataFrame:
    """Counts of per-pair best-tree distortions in equal-width bins."""
    values = pd.Series(report.pair_distortions, name="distortion")
    if values.empty:
        return pd.DataFrame({"bin_low": [], "bin_high": [], "pairs": []})
    low, high = float(values.min()), float(values.max())
    if high <= low:
        return pd.DataFrame({"bin_low": [low], "bin_high": [high], "pairs": [len(values)]})
    edges = np.linspace(low, high, bins + 1)
    counts = pd.cut(values, bins=edges, include_lowest=True).value_counts(sort=False)
    return pd.DataFrame({
        "bin_low": edges[:-1],
        "bin_high": edges[1:],
        "pairs": counts.to_numpy(),
    })


def write_histogram(report: DistortionReport, path: Path | str) -> Path:
    path = Path(path)
    distortion_histogram(report).to_csv(path, index=False)
    logger.info(f"Distortion histogram written to {path}")
    return path
