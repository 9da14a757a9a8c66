"""
Config, provenance manifest and stage orchestration.
"""
from casecontext.pipeline.config import PipelineConfig, load_config, parse_config
from casecontext.pipeline.stages import STAGES, run_all, run_stage

__all__ = ["PipelineConfig", "STAGES", "load_config", "parse_config", "run_all", "run_stage"]
