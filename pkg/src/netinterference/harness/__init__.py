"""Experiment orchestration: benchmark, DM sweep, export and the command line."""

from .benchmark import BenchmarkResult, run_benchmark
from .config import (
    BenchmarkConfig,
    CCVSpec,
    DesignSpec,
    GridSpec,
    SweepConfig,
    load_benchmark_config,
    load_sweep_config,
)
from .export import ResultTable, export, load_table, quantile_summary
from .sweep import bands_overlap, dm_sweep, error_metrics, nested_bootstrap

__all__ = [
    "BenchmarkConfig", "BenchmarkResult", "CCVSpec", "DesignSpec", "GridSpec", "ResultTable", "SweepConfig",
    "bands_overlap", "dm_sweep", "error_metrics", "export", "load_benchmark_config", "load_sweep_config",
    "load_table", "nested_bootstrap", "quantile_summary", "run_benchmark",
]
