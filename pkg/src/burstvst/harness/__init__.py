from .pipeline import PipelineConfig, PipelineResult, run_pipeline
from .synth import Motion, SynthConfig, synth_burst, textured_scene

__all__ = ["Motion", "PipelineConfig", "PipelineResult", "SynthConfig", "run_pipeline", "synth_burst", "textured_scene"]
