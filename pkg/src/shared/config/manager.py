"""ScenarioManager - Load/save JSON scenario documents."""
import copy
import logging
from pathlib import Path
from typing import Optional

from shared.config.schema import derive_seeds, normalize_scenario
from shared.config_defaults import build_default_scenario
from shared.config_io import cleanup_stale_tmp_files, load_json_document, save_json_document
from shared.utils import InvalidScenarioError

logger = logging.getLogger(__name__)


class ScenarioManager:
    """Manages one scenario document with JSON persistence and CLI overrides."""

    def __init__(self, path: Optional[Path] = None, document: Optional[dict] = None):
        self._path = Path(path) if path is not None else None
        self._document: dict = normalize_scenario(document if document is not None else build_default_scenario())
        self.from_backup = False

    @property
    def path(self) -> Optional[Path]:
        return self._path

    @property
    def document(self) -> dict:
        """Normalized document (a copy; edits go through the manager)."""
        return copy.deepcopy(self._document)

    def load(self) -> dict:
        """Load and validate the scenario file."""
        if self._path is None:
            raise InvalidScenarioError("no scenario path given")
        if self._path.parent.exists():
            cleanup_stale_tmp_files(self._path.parent, logger)
        loaded, from_backup = load_json_document(self._path, logger)
        if loaded is None:
            raise InvalidScenarioError(f"scenario file missing or unreadable: {self._path}")
        if from_backup:
            logger.warning("Scenario %s loaded from backup copy", self._path)
        self.from_backup = from_backup
        self._document = normalize_scenario(loaded)
        logger.info("Loaded scenario '%s' from %s", self._document["name"], self._path)
        return self.document

    def save(self, path: Optional[Path] = None) -> bool:
        """Write the current document (atomic, with backup)."""
        target = Path(path) if path is not None else self._path
        if target is None:
            raise InvalidScenarioError("no scenario path given")
        return save_json_document(target, self._document, logger)

    def apply_overrides(
        self,
        seed: Optional[int] = None,
        iters: Optional[int] = None,
        realizations: Optional[int] = None,
        T: Optional[int] = None,
        out_dir: Optional[str] = None,
    ) -> dict:
        """Apply command-line overrides and re-validate."""
        raw = copy.deepcopy(self._document)
        if seed is not None:
            # A new master seed re-derives every stream; explicit data arrays stay pinned.
            raw["seed"] = seed
            raw["seeds"] = derive_seeds(seed)
            logger.info("Seed override: %s", seed)
        if iters is not None:
            raw["algorithm"]["iters"] = iters
        if realizations is not None:
            raw["algorithm"]["realizations"] = realizations
        if T is not None:
            raw["algorithm"]["T"] = T
        if out_dir is not None:
            raw["output"]["dir"] = out_dir
        self._document = normalize_scenario(raw)
        return self.document
