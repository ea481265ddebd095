from .cem import LinearPolicy, cem_train
from .harness import (
    BenchmarkReport,
    MethodResult,
    available_methods,
    episode_seeds,
    performance_ratio,
    run_benchmark,
)
from .report import CSV_HEADER, emit_report, parse_report

__all__ = [
    "BenchmarkReport",
    "CSV_HEADER",
    "LinearPolicy",
    "MethodResult",
    "available_methods",
    "cem_train",
    "emit_report",
    "episode_seeds",
    "parse_report",
    "performance_ratio",
    "run_benchmark",
]
