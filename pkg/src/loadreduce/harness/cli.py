"""Command-line front end.

Subcommands:
  simulate   integrate one variant of a scenario and export the trajectory
  compare    run full vs reduced and report MSEs, timings, and speedup
  assess     print the reduction verdict and accuracy thresholds for a model
  bench      repeat a comparison and report median timings

Exit codes: 0 on success, 1 on usage or configuration errors, 2 when the
numerics fail (initialization infeasible, integration blow-up or stall).
"""

import argparse
import json
import sys

from ..dera import InitializationFailure
from ..odesolve import OdeError
from ..timescale import assess
from .compare import bench_scenario, run_comparison, simulate_scenario
from .export import (
    export_report,
    export_trajectory,
    report_json_dict,
    trajectory_csv_lines,
    trajectory_json_dict,
)
from .scenarios import MODEL_NAMES, prepare_scenario, scenario_config_from_mapping

# config-file keys that steer I/O rather than the scenario itself
_IO_KEYS = ("out", "format", "repeat")


def _parse_sag(text: str):
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(
            f"--sag takes four comma-separated numbers a,b,c,d (got '{text}')")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--sag values must be numbers (got '{text}')")


def _add_scenario_flags(sub, variants=None):
    sub.add_argument("--model", choices=MODEL_NAMES, help="which model to run")
    if variants is not None:
        sub.add_argument("--variant", choices=variants, help="which variant(s) to run")
    sub.add_argument("--solver", choices=("nonstiff", "stiff"), help="integration method")
    sub.add_argument("--t-end", type=float, dest="t_end", help="end of the window [s]")
    sub.add_argument("--grid", type=float, help="output grid step [s]")
    sub.add_argument("--sag", type=_parse_sag, metavar="a,b,c,d",
                     help="sag shape: retained pu, cycles, recovery s, ramp-start pu")
    sub.add_argument("--config", help="JSON file of flat dotted scenario keys")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="loadreduce",
        description="Reduced-order load model comparison harness.")
    commands = parser.add_subparsers(dest="command", required=True)

    sim = commands.add_parser("simulate", help="integrate one variant, export t/states/P/Q")
    _add_scenario_flags(sim, variants=("full", "reduced"))
    sim.add_argument("--out", help="output path (default: stdout)")
    sim.add_argument("--format", choices=("csv", "json"), default="csv",
                     help="trajectory format (default csv)")

    cmp_ = commands.add_parser("compare", help="full vs reduced accuracy and timing")
    _add_scenario_flags(cmp_, variants=("full", "reduced", "both"))
    cmp_.add_argument("--out", help="also write the report as JSON to this path")

    ass = commands.add_parser("assess", help="reduction verdict for a model")
    ass.add_argument("--model", choices=MODEL_NAMES, required=True)
    ass.add_argument("--config", help="JSON file of flat dotted scenario keys")

    ben = commands.add_parser("bench", help="repeat a comparison, median timings")
    _add_scenario_flags(ben)
    ben.add_argument("--repeat", type=int, help="number of repeats (default 5)")
    ben.add_argument("--out", help="also write the bench summary as JSON to this path")

    return parser


def _load_config_file(path: str) -> dict:
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"config file {path} must hold a JSON object")
    return data


def _resolve(ns: argparse.Namespace) -> tuple:
    """Merge the config file and the explicit flags into (ScenarioConfig, io).

    Precedence: built-in defaults, then the config file, then flags.
    """
    data = _load_config_file(ns.config) if getattr(ns, "config", None) else {}
    io = {key: data.pop(key) for key in _IO_KEYS if key in data}

    for key in ("model", "variant", "solver"):
        value = getattr(ns, key, None)
        if value is not None:
            data[key] = value
    if getattr(ns, "t_end", None) is not None:
        data["t_end"] = ns.t_end
    if getattr(ns, "grid", None) is not None:
        data["grid"] = ns.grid
    if getattr(ns, "sag", None) is not None:
        a, b, c, d = ns.sag
        data.update({"sag.a": a, "sag.b": b, "sag.c": c, "sag.d": d})

    if ns.command == "simulate" and data.get("variant", "full") == "both":
        raise ValueError("simulate runs a single variant; pick full or reduced")
    if ns.command == "simulate":
        data.setdefault("variant", "full")

    cfg = scenario_config_from_mapping(data)

    if getattr(ns, "out", None) is not None:
        io["out"] = ns.out
    if getattr(ns, "format", None) is not None:
        io["format"] = ns.format
    if getattr(ns, "repeat", None) is not None:
        io["repeat"] = ns.repeat
    return cfg, io


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_simulate(cfg, io) -> int:
    result = simulate_scenario(cfg)
    fmt = io.get("format", "csv")
    out = io.get("out")
    if out is None:
        if fmt == "csv":
            for line in trajectory_csv_lines(result):
                print(line)
        else:
            print(json.dumps(trajectory_json_dict(result), indent=1))
    else:
        export_trajectory(result, out, fmt)
        print(f"wrote {result.variant} {result.model} trajectory to {out}")
    return 0


def _cmd_compare(cfg, io) -> int:
    report = run_comparison(cfg)
    sf, sr = report.stats_full, report.stats_reduced
    print(f"model {cfg.model}  solver {cfg.solver}  t in [{cfg.t_span[0]:g}, {cfg.t_span[1]:g}] s")
    print(f"mse_P = {report.mse_P:.6e}")
    print(f"mse_Q = {report.mse_Q:.6e}")
    for name, value in report.state_mse.items():
        print(f"mse[{name}] = {value:.6e}")
    print(f"timing_full = {report.timing_full:.4f} s  "
          f"timing_reduced = {report.timing_reduced:.4f} s  "
          f"speedup = {report.speedup:.2f}x")
    print(f"steps accepted/rejected: full {sf.steps_accepted}/{sf.steps_rejected}, "
          f"reduced {sr.steps_accepted}/{sr.steps_rejected}")
    print(f"qss_residual_max = {report.qss_residual_max:.3e}")
    out = io.get("out")
    if out is not None:
        export_report(report, out)
        print(f"wrote report to {out}")
    return 0


def _cmd_assess(cfg, io) -> int:
    prep = prepare_scenario(cfg)
    sys_ = prep.system()
    decision = assess(sys_, prep.bounds, prep.settle_time)
    print(f"model: {cfg.model}")
    print(f"epsilon: {sys_.epsilon:.6g}")
    print(f"epsilon_star: {decision.eps_star:.6g}")
    if decision.eps_double_star is None:
        print("epsilon_double_star: none (settling requirement unreachable)")
    else:
        print(f"epsilon_double_star: {decision.eps_double_star:.6g}")
    print(f"settle_time: {decision.settle_time_T:.6g} s")
    print(f"verdict: {decision.verdict}")
    return 0


def _cmd_bench(cfg, io) -> int:
    repeats = int(io.get("repeat", 5))
    bench = bench_scenario(cfg, repeats)
    print(f"model {cfg.model}  solver {cfg.solver}  repeats {repeats}")
    for i, (tf, tr, sp) in enumerate(bench.runs):
        print(f"run {i}: full {tf:.4f} s, reduced {tr:.4f} s, speedup {sp:.2f}x")
    print(f"median timing_full = {bench.timing_full:.4f} s")
    print(f"median timing_reduced = {bench.timing_reduced:.4f} s")
    print(f"median speedup = {bench.speedup:.2f}x")
    out = io.get("out")
    if out is not None:
        data = {
            "config": report_json_dict(bench.report)["config"],
            "repeats": bench.repeats,
            "timing_full_median": bench.timing_full,
            "timing_reduced_median": bench.timing_reduced,
            "speedup_median": bench.speedup,
            "runs": [{"timing_full": tf, "timing_reduced": tr, "speedup": sp}
                     for tf, tr, sp in bench.runs],
            "report": report_json_dict(bench.report),
        }
        with open(out, "w") as fh:
            json.dump(data, fh, indent=1)
            fh.write("\n")
        print(f"wrote bench summary to {out}")
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "compare": _cmd_compare,
    "assess": _cmd_assess,
    "bench": _cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse already printed usage (or help); fold its exit codes into
        # ours: anything but a clean --help is a usage error
        return 0 if (exc.code or 0) == 0 else 1

    try:
        cfg, io = _resolve(ns)
        return _COMMANDS[ns.command](cfg, io)
    except (OdeError, InitializationFailure) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 2
    except (ValueError, TypeError, KeyError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
