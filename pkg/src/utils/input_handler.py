"""Input handling and validation for corpus manifests."""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, List, Optional

from loguru import logger

from ..graph.core import Graph, load_edge_list
from .errors import CorpusInputError


@dataclass(frozen=True)
class CorpusEntry:
    """One graph of a corpus: where to read it and how to label it."""

    path: Path
    graph_id: str
    family: Optional[str] = None

    def to_dict(self) -> dict:
        return {"path": str(self.path), "id": self.graph_id, "family": self.family}


class InputHandler:
    """Handles loading and validation of a corpus manifest.

    The manifest is a JSON list of ``{"path": ..., "id": ..., "family": ...}``
    objects. Relative paths are resolved against the manifest's directory;
    ``id`` defaults to the file stem and ``family`` is optional.
    """

    def __init__(self, manifest_path: str):
        """Initialize the input handler.

        Args:
            manifest_path: Path to the manifest JSON file
        """
        self.manifest_path = Path(manifest_path)
        self.base_dir = self.manifest_path.parent

    def validate_and_load(self) -> List[CorpusEntry]:
        """Validate the manifest and return its entries.

        Only the manifest itself is checked here; unreadable graph files are
        reported when they are loaded, so one bad input does not stop a run.

        Raises:
            CorpusInputError: If the manifest is missing, empty or malformed
        """
        data = self._load_json()
        if not isinstance(data, list):
            raise CorpusInputError(f"manifest must be a JSON list of entries: {self.manifest_path}")

        entries = []
        seen = set()
        for position, item in enumerate(data):
            entry = self._parse_entry(item, position)
            if entry.graph_id in seen:
                raise CorpusInputError(f"duplicate graph id '{entry.graph_id}' in {self.manifest_path}")
            seen.add(entry.graph_id)
            entries.append(entry)

        logger.info(f"Loaded corpus manifest with {len(entries)} graphs from {self.manifest_path}")
        return entries

    def _parse_entry(self, item: Any, position: int) -> CorpusEntry:
        if not isinstance(item, dict) or not isinstance(item.get("path"), str):
            raise CorpusInputError(f"manifest entry {position} needs a string 'path': {self.manifest_path}")
        path = Path(item["path"])
        if not path.is_absolute():
            path = self.base_dir / path
        family = item.get("family")
        return CorpusEntry(
            path=path,
            graph_id=str(item.get("id") or path.stem),
            family=str(family) if family is not None else None,
        )

    def _load_json(self) -> Any:
        """Load the manifest JSON.

        Raises:
            CorpusInputError: If the file doesn't exist, is empty or is invalid JSON
        """
        if not self.manifest_path.exists():
            raise CorpusInputError(f"corpus manifest not found: {self.manifest_path}")
        try:
            content = self.manifest_path.read_text(encoding="utf-8")
        except OSError as e:
            raise CorpusInputError(f"cannot read corpus manifest {self.manifest_path}: {e}") from e
        if not content.strip():
            raise CorpusInputError(f"corpus manifest is empty: {self.manifest_path}")
        try:
            return json.loads(content)
        except json.JSONDecodeError as e:
            raise CorpusInputError(f"invalid JSON in {self.manifest_path}: {e}") from e


def read_graph(path: Path) -> Graph:
    """Read an edge-list file.

    Raises:
        CorpusInputError: If the file cannot be read
        GraphParseError: If the contents are malformed
    """
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise CorpusInputError(f"cannot read graph file {path}: {e.strerror or e}") from e
    return load_edge_list(data)


def write_manifest(entries: List[CorpusEntry], manifest_path: Path) -> None:
    """Write a manifest whose paths are relative to its own directory when possible."""
    base = manifest_path.parent
    items = []
    for entry in entries:
        try:
            path = entry.path.relative_to(base)
        except ValueError:
            path = entry.path
        items.append({"path": path.as_posix(), "id": entry.graph_id, "family": entry.family})
    manifest_path.write_text(json.dumps(items, indent=2) + "\n", encoding="utf-8")
