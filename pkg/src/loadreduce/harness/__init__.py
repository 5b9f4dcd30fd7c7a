"""Comparison harness: scenarios, full-vs-reduced runs, exports, and the CLI.

A scenario names a model, a variant, a solver, a time window, and a voltage
sag; run_comparison integrates the full and reduced variants of that scenario
on identical inputs and reports accuracy (MSE on a uniform output grid) and
cost (integration wall clock, accepted/rejected steps).
"""

from .scenarios import (
    MODEL_NAMES,
    SagParams,
    ScenarioConfig,
    prepare_scenario,
    sag_breakpoints,
    sag_voltage,
    scenario_config_from_mapping,
)
from .compare import (
    BenchResult,
    ComparisonReport,
    SimulationResult,
    bench_scenario,
    output_grid,
    run_comparison,
    simulate_scenario,
)
from .export import (
    export_report,
    export_trajectory,
    report_json_dict,
    trajectory_csv_lines,
    trajectory_json_dict,
)
from .cli import main as cli_main

__all__ = [
    "MODEL_NAMES",
    "SagParams",
    "ScenarioConfig",
    "prepare_scenario",
    "sag_breakpoints",
    "sag_voltage",
    "scenario_config_from_mapping",
    "BenchResult",
    "ComparisonReport",
    "SimulationResult",
    "bench_scenario",
    "output_grid",
    "run_comparison",
    "simulate_scenario",
    "export_report",
    "export_trajectory",
    "report_json_dict",
    "trajectory_csv_lines",
    "trajectory_json_dict",
    "cli_main",
]
