"""Flex-O pipeline feature exports."""
from features.flexo_pipeline.models import FlexibleAssignment, PipelineConfig, UserInterval
from features.flexo_pipeline.service import certify, emit_user_sets, run_flexo

__all__ = [
    "FlexibleAssignment",
    "PipelineConfig",
    "UserInterval",
    "certify",
    "emit_user_sets",
    "run_flexo",
]
