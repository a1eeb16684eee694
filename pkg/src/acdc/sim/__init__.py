"""Agent-based evaluation of voucher tracing against ground-truth outbreaks.

A run has three stages: grow a transmission forest with a branching
process, replay the voucher protocol (or an app-adoption baseline) over it,
and score how much of the forest was detected. Everything is deterministic
given (config, seed), and per-agent random draws are derived from stable
hashes so that sweeping one parameter under common random numbers changes
only the decisions that parameter governs.
"""

from .config import GENERATION_INTERVAL_DAYS, SimConfig
from .experiment import (
    AggregateStat,
    ExperimentResult,
    RunMetrics,
    compute_metrics,
    render_replicates_table,
    render_sweep_table,
    run_experiment,
    sweep,
)
from .oracle import FixedOutbreak, exact_expected_coverage
from .outbreak import Person, TransmissionTree, generate_outbreak
from .tracing import TraceOutcome, TraceTotals, run_acdc_tracing, run_app_tracing

__all__ = [
    "AggregateStat",
    "ExperimentResult",
    "FixedOutbreak",
    "GENERATION_INTERVAL_DAYS",
    "Person",
    "RunMetrics",
    "SimConfig",
    "TraceOutcome",
    "TraceTotals",
    "TransmissionTree",
    "compute_metrics",
    "exact_expected_coverage",
    "generate_outbreak",
    "render_replicates_table",
    "render_sweep_table",
    "run_acdc_tracing",
    "run_app_tracing",
    "run_experiment",
    "sweep",
]
