"""Trajectory and report serialization: CSV and JSON, round-trip exact.

Every float is written with 17 significant digits, which is enough to
reconstruct the double bit-for-bit, so exported trajectories can be diffed
and re-imported without loss.
"""

import dataclasses
import json

from .compare import ComparisonReport, SimulationResult
from .scenarios import ScenarioConfig


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def config_json_dict(cfg: ScenarioConfig) -> dict:
    """The scenario configuration as plain JSON-ready data."""
    data = dataclasses.asdict(cfg)
    data["t_span"] = list(cfg.t_span)
    data["overrides"] = dict(cfg.overrides)
    return data


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------

def trajectory_csv_lines(result: SimulationResult):
    """Yield CSV lines (no trailing newlines): header, then one row per
    grid time with the states first and the outputs (P, Q last) after."""
    out_names = list(result.outputs.keys())
    yield ",".join(["t", *result.state_names, *out_names])
    columns = [result.outputs[name] for name in out_names]
    for i, t in enumerate(result.times):
        row = [_fmt(t)]
        row.extend(_fmt(x) for x in result.states[i])
        row.extend(_fmt(col[i]) for col in columns)
        yield ",".join(row)


def trajectory_json_dict(result: SimulationResult) -> dict:
    """The same arrays as the CSV plus solver stats and the config echo."""
    data = {
        "model": result.model,
        "variant": result.variant,
        "state_names": list(result.state_names),
        "times": [float(t) for t in result.times],
        "states": [[float(x) for x in row] for row in result.states],
        "outputs": {name: [float(x) for x in col]
                    for name, col in result.outputs.items()},
        "stats": dataclasses.asdict(result.stats),
        "qss_residual_max": float(result.qss_residual_max),
    }
    if result.config is not None:
        data["config"] = config_json_dict(result.config)
    return data


def export_trajectory(result: SimulationResult, path, format: str = "csv") -> None:
    """Write the resampled run to path as CSV or JSON.

    CSV column order is t, the state columns, any extra output columns
    (iq, id for the distributed-generation model), then P and Q.  An empty
    trajectory produces just the header row.
    """
    if format == "csv":
        with open(path, "w", newline="") as fh:
            for line in trajectory_csv_lines(result):
                fh.write(line + "\n")
    elif format == "json":
        with open(path, "w") as fh:
            json.dump(trajectory_json_dict(result), fh, indent=1)
            fh.write("\n")
    else:
        raise ValueError(f"unknown export format '{format}' (csv or json)")


# ---------------------------------------------------------------------------
# comparison reports
# ---------------------------------------------------------------------------

def report_json_dict(report: ComparisonReport) -> dict:
    """Accuracy, timing, and stats of a comparison as JSON-ready data."""
    return {
        "config": config_json_dict(report.config),
        "mse_P": report.mse_P,
        "mse_Q": report.mse_Q,
        "state_mse": {name: float(v) for name, v in report.state_mse.items()},
        "timing_full": report.timing_full,
        "timing_reduced": report.timing_reduced,
        "speedup": report.speedup,
        "qss_residual_max": report.qss_residual_max,
        "stats_full": dataclasses.asdict(report.stats_full),
        "stats_reduced": dataclasses.asdict(report.stats_reduced),
    }


def export_report(report: ComparisonReport, path) -> None:
    """Write a comparison report to path as JSON."""
    with open(path, "w") as fh:
        json.dump(report_json_dict(report), fh, indent=1)
        fh.write("\n")
