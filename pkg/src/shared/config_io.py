"""File IO helpers for scenario persistence."""
from __future__ import annotations

import json
import os
import shutil
from pathlib import Path
from typing import Any, Optional


def backup_path(path: Path) -> Path:
    return path.with_suffix(".json.bak")


def cleanup_stale_tmp_files(directory: Path, logger) -> None:
    """Remove half-written ``*.tmp`` files left by an interrupted save."""
    try:
        stale = [entry for entry in directory.iterdir() if entry.suffix == ".tmp" and entry.is_file()]
    except OSError as error:
        logger.warning("Cannot list %s for stale tmp files: %s", directory, error)
        return
    for entry in stale:
        try:
            entry.unlink()
            logger.info("Removed stale tmp file %s", entry)
        except OSError as error:
            logger.warning("Cannot remove stale tmp file %s: %s", entry, error)


def _read_json(path: Path, logger) -> Optional[Any]:
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as error:
        logger.warning("Unreadable scenario file %s: %s", path, error)
        return None


def load_json_document(path: Path, logger) -> tuple[Optional[dict], bool]:
    """
    Read a scenario document, falling back to its ``.json.bak`` copy.

    Returns:
        (document, from_backup); (None, False) when neither file is usable.
    """
    if path.exists():
        document = _read_json(path, logger)
        if document is not None:
            return document, False
    backup = backup_path(path)
    if backup.exists():
        document = _read_json(backup, logger)
        if document is not None:
            return document, True
    return None, False


def dump_json_text(document: dict) -> str:
    """Serialize deterministically (sorted keys, shortest round-trip floats)."""
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


def save_json_document(path: Path, document: dict, logger, replace_func=os.replace) -> bool:
    """Write ``document`` through a temp file; the previous version is kept as ``.json.bak``."""
    text = dump_json_text(document)
    staging = path.with_suffix(".json.tmp")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        if path.exists():
            try:
                shutil.copy2(path, backup_path(path))
            except OSError as error:
                logger.warning("No backup for %s: %s", path, error)
        staging.write_text(text, encoding="utf-8")
        try:
            replace_func(str(staging), str(path))
        except PermissionError as error:
            # target locked for rename; overwrite in place
            logger.warning("Replace of %s refused (%s), writing directly", path, error)
            path.write_text(text, encoding="utf-8")
            staging.unlink(missing_ok=True)
    except OSError as error:
        logger.error("Cannot save scenario %s: %s", path, error)
        return False
    logger.info("Saved scenario %s", path)
    return True
