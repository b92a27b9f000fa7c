from .memory import MemoryRun, run_memory
from .pipeline import PipelineRun, run_pipeline
from .records import BenchConfig, TaskRecord
from .schedule import ideal_reduction, simulate_pipeline, simulate_pipeline_config
from .stream import StreamRun, run_stream

__all__ = [
    "BenchConfig",
    "MemoryRun",
    "PipelineRun",
    "StreamRun",
    "TaskRecord",
    "ideal_reduction",
    "run_memory",
    "run_pipeline",
    "run_stream",
    "simulate_pipeline",
    "simulate_pipeline_config",
]
