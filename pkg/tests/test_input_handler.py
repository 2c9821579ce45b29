"""Tests for corpus manifests and graph file reading."""

import json

import pytest

from src.utils.errors import CorpusInputError, GraphParseError
from src.utils.input_handler import CorpusEntry, InputHandler, read_graph, write_manifest


def _manifest(tmp_path, data) -> str:
    path = tmp_path / "corpus.json"
    path.write_text(data if isinstance(data, str) else json.dumps(data))
    return str(path)


def test_entries_resolve_relative_to_the_manifest(tmp_path):
    path = _manifest(tmp_path, [{"path": "graphs/a.edges", "family": "ba"}, {"path": "/abs/b.edges", "id": "b2"}])
    entries = InputHandler(path).validate_and_load()
    assert entries[0] == CorpusEntry(tmp_path / "graphs" / "a.edges", "a", "ba")
    assert entries[1].graph_id == "b2"
    assert str(entries[1].path) == "/abs/b.edges"
    assert entries[1].family is None


def test_empty_list_is_a_valid_corpus(tmp_path):
    assert InputHandler(_manifest(tmp_path, [])).validate_and_load() == []


def test_missing_manifest_names_the_path(tmp_path):
    with pytest.raises(CorpusInputError) as info:
        InputHandler(str(tmp_path / "nope.json")).validate_and_load()
    assert "nope.json" in str(info.value)
    assert info.value.exit_code == 2


@pytest.mark.parametrize(
    "content",
    [
        "",
        "{broken",
        json.dumps({"path": "a.edges"}),
        json.dumps([{"id": "x"}]),
        json.dumps([{"path": "a.edges"}, {"path": "other/a.edges"}]),
    ],
)
def test_invalid_manifests(tmp_path, content):
    with pytest.raises(CorpusInputError):
        InputHandler(_manifest(tmp_path, content)).validate_and_load()


def test_read_graph(tmp_path):
    path = tmp_path / "g.edges"
    path.write_text("0 1\n1 2\n")
    assert read_graph(path).num_edges == 2


def test_read_graph_errors(tmp_path):
    with pytest.raises(CorpusInputError):
        read_graph(tmp_path / "missing.edges")
    bad = tmp_path / "bad.edges"
    bad.write_text("0 1\nx\n")
    with pytest.raises(GraphParseError):
        read_graph(bad)


def test_written_manifest_loads_back(tmp_path):
    entries = [
        CorpusEntry(tmp_path / "graphs" / "ba-000.edges", "ba-000", "ba"),
        CorpusEntry(tmp_path / "graphs" / "grid-000.edges", "grid-000", "grid"),
    ]
    manifest = tmp_path / "corpus.json"
    write_manifest(entries, manifest)
    assert json.loads(manifest.read_text())[0]["path"] == "graphs/ba-000.edges"
    assert InputHandler(str(manifest)).validate_and_load() == entries


def test_entry_to_dict(tmp_path):
    entry = CorpusEntry(tmp_path / "a.edges", "a", "ring")
    assert entry.to_dict() == {"path": str(tmp_path / "a.edges"), "id": "a", "family": "ring"}
