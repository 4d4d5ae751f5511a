"""Config module exports."""
from shared.config.manager import ScenarioManager
from shared.config.schema import derive_seeds, normalize_model_spec, normalize_scenario

__all__ = ["ScenarioManager", "derive_seeds", "normalize_model_spec", "normalize_scenario"]
