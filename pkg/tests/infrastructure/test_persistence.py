import json

import numpy as np
import pandas as pd
import pytest

from tests.instances import line_metric
from tree_cover_toolkit import __version__
from tree_cover_toolkit.domain import CoverKind, TreeCover, TreeEmbedding, verify_cover
from tree_cover_toolkit.infrastructure.formats import FormatError
from tree_cover_toolkit.infrastructure.persistence import (
    CoverStore,
    build_report,
    distortion_histogram,
    dumps_report,
    write_histogram,
    write_report,
)


def path_tree(n: int) -> TreeEmbedding:
    return TreeEmbedding(n, tuple((i, i + 1, 1.0) for i in range(n - 1)), tuple(range(n)))


def star_tree(n: int) -> TreeEmbedding:
    return TreeEmbedding(n + 1, tuple((n, i, 0.5 * (i + 1)) for i in range(n)), tuple(range(n)))


@pytest.fixture
def ramsey_cover():
    return TreeCover((path_tree(4), star_tree(4)), CoverKind.RAMSEY, 3.0, home_tree=(0, 1, 1, 0))


def test_cover_store_round_trip(tmp_path, ramsey_cover):
    store = CoverStore(tmp_path / "cover")
    manifest_path = store.save(ramsey_cover)
    manifest = json.loads(manifest_path.read_text())
    assert manifest["trees"] == ["tree_000.txt", "tree_001.txt"]
    assert manifest["home_tree"] == [0, 1, 1, 0]
    assert manifest["schema"] == 1
    loaded = store.load()
    assert loaded.kind == CoverKind.RAMSEY
    assert loaded.home_tree == (0, 1, 1, 0)
    assert loaded.claimed_distortion == 3.0
    assert [t.edges for t in loaded.trees] == [t.edges for t in ramsey_cover.trees]


def test_plain_cover_has_no_home_tree(tmp_path):
    store = CoverStore(tmp_path)
    store.save(TreeCover((path_tree(3),), CoverKind.PLAIN, 1.0))
    assert json.loads(store.manifest_path.read_text())["home_tree"] is None
    assert store.load().home_tree is None


def test_missing_manifest(tmp_path):
    with pytest.raises(FormatError, match="cannot read cover manifest"):
        CoverStore(tmp_path).load()


@pytest.mark.parametrize(
    "manifest, message",
    [
        ("{not json", "invalid JSON"),
        ('{"schema": 99}', "unsupported schema"),
        ('{"schema": 1, "kind": "fancy", "trees": [], "claimed_distortion": 1.0}', "malformed"),
        ('{"schema": 1, "kind": "plain"}', "malformed"),
    ],
)
def test_bad_manifests(tmp_path, manifest, message):
    (tmp_path / "cover.json").write_text(manifest)
    with pytest.raises(FormatError, match=message):
        CoverStore(tmp_path).load()


def test_report_envelope_is_deterministic(tmp_path):
    payload = build_report("cover", {"run": {"eps": 0.5}}, 4, {"value": np.float64(1.5), "path": tmp_path})
    assert payload["tool_version"] == __version__
    assert payload["schema"] == 1
    text = dumps_report(payload)
    assert text == dumps_report(dict(reversed(list(payload.items()))))
    assert json.loads(text)["value"] == 1.5
    path = write_report(payload, tmp_path / "nested" / "report.json")
    assert path.read_text() == text


def test_report_rejects_unknown_objects():
    with pytest.raises(TypeError):
        dumps_report(build_report("cover", {}, None, {"bad": object()}))


def test_histogram_counts_every_pair(tmp_path):
    report = verify_cover(TreeCover((path_tree(4),), CoverKind.PLAIN, 10.0), line_metric(4))
    frame = distortion_histogram(report)
    assert list(frame.columns) == ["bin_low", "bin_high", "pairs"]
    assert frame["pairs"].sum() == 6
    path = write_histogram(report, tmp_path / "h.csv")
    assert pd.read_csv(path)["pairs"].sum() == 6


def test_histogram_spread(tmp_path):
    m = line_metric(4)
    report = verify_cover(TreeCover((star_tree(4),), CoverKind.PLAIN, 10.0), m)
    frame = distortion_histogram(report, bins=4)
    assert len(frame) == 4
    assert frame["pairs"].sum() == 6
    assert frame["bin_low"].iloc[0] == report.pair_distortions.min()
    assert frame["bin_high"].iloc[-1] == report.pair_distortions.max()
