"""Replicated runs, aggregation and parameter sweeps.

Replicate r runs on rng_seed + r, so a single replicate reproduces a single
tracing run exactly and a sweep reuses the same replicate seeds for every
parameter value (common random numbers). Aggregation is a plain reduction
over the replicate list in index order.

Per-run metrics leave ratios undefined (None) when their denominator is
empty — a forest with no non-seed infections has no coverage to speak of —
and aggregation skips undefined values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Callable

from .config import SimConfig, parameter_parser
from .outbreak import TransmissionTree, generate_outbreak
from .tracing import TraceOutcome, run_acdc_tracing, run_app_tracing

MODES: dict[str, Callable] = {"acdc": run_acdc_tracing, "app": run_app_tracing}


@dataclass
class RunMetrics:
    replicate: int
    n_agents: int
    n_non_seed: int
    n_detected: int
    detection_coverage: float | None
    mean_days_infection_to_detection: float | None
    tests_per_detection: float | None
    chain_depth_mean: float | None
    chain_depth_max: int
    tests_performed: int
    vouchers_issued: int
    redemptions: int
    wasted_uses: int


def compute_metrics(
    tree: TransmissionTree, outcome: TraceOutcome, config: SimConfig, replicate: int = 0
) -> RunMetrics:
    non_seeds = tree.non_seed_ids
    detected = [pid for pid in non_seeds if outcome.agents[pid].detected]
    coverage = len(detected) / len(non_seeds) if non_seeds else None
    delays = [
        outcome.agents[pid].tested_day
        + config.result_delay_days
        - tree.people[pid].infection_day
        for pid in detected
    ]
    depths = [tree.people[pid].generation for pid in detected]
    tests = outcome.totals.tests_performed
    return RunMetrics(
        replicate=replicate,
        n_agents=len(tree),
        n_non_seed=len(non_seeds),
        n_detected=len(detected),
        detection_coverage=coverage,
        mean_days_infection_to_detection=(sum(delays) / len(delays)) if delays else None,
        tests_per_detection=(tests / len(detected)) if detected else None,
        chain_depth_mean=(sum(depths) / len(depths)) if depths else None,
        chain_depth_max=max(depths, default=0),
        tests_performed=tests,
        vouchers_issued=outcome.totals.vouchers_issued,
        redemptions=outcome.totals.redemptions,
        wasted_uses=outcome.totals.wasted_uses,
    )


@dataclass(frozen=True)
class AggregateStat:
    mean: float
    std: float
    ci95_low: float
    ci95_high: float
    n: int

    @classmethod
    def over(cls, values: list[float]) -> "AggregateStat | None":
        if not values:
            return None
        n = len(values)
        mean = sum(values) / n
        var = sum((v - mean) ** 2 for v in values) / (n - 1) if n > 1 else 0.0
        std = math.sqrt(var)
        half = 1.96 * std / math.sqrt(n)
        return cls(mean=mean, std=std, ci95_low=mean - half, ci95_high=mean + half, n=n)


AGGREGATED_FIELDS = (
    "detection_coverage",
    "mean_days_infection_to_detection",
    "tests_per_detection",
    "chain_depth_mean",
    "chain_depth_max",
    "tests_performed",
    "vouchers_issued",
    "redemptions",
    "wasted_uses",
)


@dataclass
class ExperimentResult:
    config: SimConfig
    mode: str
    runs: list[RunMetrics]
    aggregate: dict[str, AggregateStat | None]

    @property
    def coverage(self) -> AggregateStat | None:
        return self.aggregate["detection_coverage"]


def run_replicate(config: SimConfig, replicate: int, mode: str = "acdc") -> RunMetrics:
    seed = config.rng_seed + replicate
    tree = generate_outbreak(config, seed)
    outcome = MODES[mode](tree, config, seed)
    return compute_metrics(tree, outcome, config, replicate=replicate)


def run_experiment(config: SimConfig, n_replicates: int, mode: str = "acdc") -> ExperimentResult:
    if n_replicates < 1:
        raise ValueError("n_replicates must be at least 1")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {sorted(MODES)}")
    config.validate()
    runs = [run_replicate(config, r, mode) for r in range(n_replicates)]
    runs.sort(key=lambda m: m.replicate)
    aggregate = {
        name: AggregateStat.over(
            [float(v) for m in runs if (v := getattr(m, name)) is not None]
        )
        for name in AGGREGATED_FIELDS
    }
    return ExperimentResult(config=config, mode=mode, runs=runs, aggregate=aggregate)


def sweep(
    parameter: str,
    values: list,
    base_config: SimConfig,
    n_replicates: int,
    mode: str = "acdc",
) -> list[tuple[object, ExperimentResult]]:
    """One experiment per value, all sharing replicate seeds (CRN)."""
    parameter_parser(parameter)  # raises UnknownParameter for bad names
    out = []
    for value in values:
        cfg = base_config.replace(**{parameter: value})
        out.append((value, run_experiment(cfg, n_replicates, mode)))
    return out


# -- tabular rendering --------------------------------------------------------

REPLICATE_COLUMNS = [f.name for f in fields(RunMetrics)]


def _cell(value) -> str:
    if value is None:
        return "NA"
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def render_replicates_table(result: ExperimentResult) -> str:
    """One row per replicate, tab-separated, plus mean/ci summary rows."""
    lines = ["\t".join(REPLICATE_COLUMNS)]
    for m in result.runs:
        lines.append("\t".join(_cell(getattr(m, name)) for name in REPLICATE_COLUMNS))
    for stat_name in ("mean", "ci95_low", "ci95_high"):
        row = [f"#{stat_name}", "", "", ""]
        for name in AGGREGATED_FIELDS:
            stat = result.aggregate[name]
            row.append(_cell(getattr(stat, stat_name)) if stat else "NA")
        lines.append("\t".join(row))
    return "\n".join(lines) + "\n"


def render_sweep_table(parameter: str, rows: list[tuple[object, ExperimentResult]]) -> str:
    """One row per sweep value with aggregate mean and coverage interval."""
    header = [parameter]
    for name in AGGREGATED_FIELDS:
        header.append(f"{name}_mean")
    header.extend(["coverage_ci95_low", "coverage_ci95_high", "replicates"])
    lines = ["\t".join(header)]
    for value, result in rows:
        cells = [_cell(value)]
        for name in AGGREGATED_FIELDS:
            stat = result.aggregate[name]
            cells.append(_cell(stat.mean) if stat else "NA")
        cov = result.coverage
        cells.append(_cell(cov.ci95_low) if cov else "NA")
        cells.append(_cell(cov.ci95_high) if cov else "NA")
        cells.append(str(len(result.runs)))
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"
