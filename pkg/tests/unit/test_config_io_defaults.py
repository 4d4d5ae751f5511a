"""Tests for shared config IO/default helper modules."""
from __future__ import annotations

import json
from pathlib import Path

from shared.config_defaults import build_default_scenario
from shared.config_io import cleanup_stale_tmp_files, dump_json_text, load_json_document, save_json_document
from shared.constants import OFFICE_N


class _Logger:
    def info(self, *_args, **_kwargs):
        return None

    def warning(self, *_args, **_kwargs):
        return None

    def error(self, *_args, **_kwargs):
        return None


def test_build_default_scenario_shape():
    document = build_default_scenario("demo")
    assert document["name"] == "demo"
    assert document["problem"]["n"] == OFFICE_N
    assert document["models"]["true"]["kind"] == "true-piecewise"
    assert document["models"]["misspecified"]["noise"] is None
    assert document["constants"] == {}


def test_default_documents_are_independent():
    first = build_default_scenario()
    first["algorithm"]["T_sweep"].append(1)
    assert build_default_scenario()["algorithm"]["T_sweep"] != first["algorithm"]["T_sweep"]


def test_cleanup_stale_tmp_files_removes_tmp(tmp_path):
    stale = tmp_path / "a.json.tmp"
    keep = tmp_path / "b.json"
    stale.write_text("x", encoding="utf-8")
    keep.write_text("y", encoding="utf-8")

    cleanup_stale_tmp_files(tmp_path, _Logger())
    assert not stale.exists()
    assert keep.exists()


def test_load_json_document_reads_primary_and_backup(tmp_path):
    scenario_file = tmp_path / "scenario.json"
    scenario_file.write_text('{"x": 1}', encoding="utf-8")

    payload, from_backup = load_json_document(scenario_file, _Logger())
    assert payload == {"x": 1}
    assert from_backup is False

    scenario_file.write_text("{bad", encoding="utf-8")
    bak_file = scenario_file.with_suffix(".json.bak")
    bak_file.write_text('{"y": 2}', encoding="utf-8")
    payload, from_backup = load_json_document(scenario_file, _Logger())
    assert payload == {"y": 2}
    assert from_backup is True


def test_load_json_document_missing(tmp_path):
    assert load_json_document(tmp_path / "nothing.json", _Logger()) == (None, False)


def test_save_json_document_writes_file_and_backup(tmp_path):
    scenario_file = tmp_path / "nested" / "scenario.json"
    assert save_json_document(scenario_file, {"seed": 1}, _Logger()) is True
    assert save_json_document(scenario_file, {"seed": 2}, _Logger()) is True
    assert json.loads(Path(scenario_file).read_text(encoding="utf-8")) == {"seed": 2}
    assert json.loads(scenario_file.with_suffix(".json.bak").read_text(encoding="utf-8")) == {"seed": 1}
    assert not scenario_file.with_suffix(".json.tmp").exists()


def test_save_json_document_falls_back_to_direct_write(tmp_path):
    scenario_file = tmp_path / "scenario.json"

    def refuse(*_args):
        raise PermissionError("locked")

    assert save_json_document(scenario_file, {"seed": 3}, _Logger(), replace_func=refuse) is True
    assert json.loads(scenario_file.read_text(encoding="utf-8")) == {"seed": 3}


def test_dump_json_text_is_deterministic():
    assert dump_json_text({"b": 0.1, "a": [1, 2]}) == dump_json_text({"a": [1, 2], "b": 0.1})
    assert json.loads(dump_json_text({"v": 0.1 + 0.2}))["v"] == 0.1 + 0.2
