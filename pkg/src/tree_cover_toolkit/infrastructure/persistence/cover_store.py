import json
import logging
from pathlib import Path

from tree_cover_toolkit.config import COVER_MANIFEST, SCHEMA_VERSION, tree_file_name
from tree_cover_toolkit.domain import CoverKind, TreeCover
from tree_cover_toolkit.infrastructure.formats import FormatError, read_tree, write_tree

logger = logging.getLogger(__name__)


class CoverStore:
    """
    A cover directory: one tree file per tree plus a cover.json manifest
    holding the kind, claimed distortion and home-tree assignment.
    """

    def __init__(self, directory: Path | str):
        self.directory = Path(directory)

    @property
    def manifest_path(self) -> Path:
        return self.directory / COVER_MANIFEST

    def save(self, cover: TreeCover) -> Path:
        """
        Write every tree and the manifest.

        Returns:
            The manifest path
        """
        self.directory.mkdir(parents=True, exist_ok=True)
        files = []
        for index, tree in enumerate(cover.trees):
            name = tree_file_name(index)
            write_tree(tree, self.directory / name)
            files.append(name)
        manifest = {
            "schema": SCHEMA_VERSION,
            "kind": cover.kind.value,
            "claimed_distortion": cover.claimed_distortion,
            "num_points": cover.num_points,
            "num_trees": cover.num_trees,
            "home_tree": list(cover.home_tree) if cover.home_tree is not None else None,
            "trees": files,
        }
        self.manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        logger.info(f"Saved {cover.num_trees} trees to {self.directory}")
        return self.manifest_path

    def load(self) -> TreeCover:
        """
        Read a cover written by save().

        Raises:
            FormatError: If the manifest is missing or malformed
        """
        try:
            manifest = json.loads(self.manifest_path.read_text(encoding="utf-8"))
        except OSError as e:
            raise FormatError(self.manifest_path, 0, f"cannot read cover manifest: {e}") from e
        except json.JSONDecodeError as e:
            raise FormatError(self.manifest_path, e.lineno, f"invalid JSON: {e.msg}") from e
        if manifest.get("schema") != SCHEMA_VERSION:
            raise FormatError(self.manifest_path, 1, f"unsupported schema {manifest.get('schema')!r}")
        try:
            kind = CoverKind(manifest["kind"])
            trees = tuple(read_tree(self.directory / name) for name in manifest["trees"])
            home = manifest.get("home_tree")
            cover = TreeCover(trees, kind, float(manifest["claimed_distortion"]), tuple(home) if home else None)
        except (KeyError, ValueError, TypeError) as e:
            raise FormatError(self.manifest_path, 1, f"malformed cover manifest: {e}") from e
        logger.info(f"Loaded {cover.num_trees} trees from {self.directory}")
        return cover
