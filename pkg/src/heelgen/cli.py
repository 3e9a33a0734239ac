"""Command-line front end.

Subcommands: simulate, pulse-source, sweep, optimize, calibrate. Outputs are
CSV waveforms plus key=value summary sidecars; the same summary block is
printed to stdout. Exit codes: 0 success, 1 validation/parse errors,
2 runtime (solver) errors. Repeated identical invocations produce
byte-identical output files.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import engine, model, optimize
from .circuit import SolverError
from .model import ConfigError

PULSE_DURATION = 120.0   # s, settling scenarios run long enough to stabilize
PULSE_STRIDE = 100
DEFAULT_PULSE_WIDTH = 0.001  # s


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as ConfigError (exit code 1)."""

    def error(self, message):
        raise ConfigError(message)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="heelgen",
                     description="Shoe-heel energy harvester simulation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="scenario config file (TOML); "
                                        "defaults to the reference design")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="override one config key")

    p = sub.add_parser("simulate", help="run the electromechanical scenario")
    common(p)
    p.add_argument("--out", required=True, help="output CSV path")

    p = sub.add_parser("pulse-source",
                       help="rectifier-only run driven by an ideal pulsed source")
    common(p)
    p.add_argument("--amplitude", type=float, required=True, help="pulse height, V")
    p.add_argument("--width", type=float, default=DEFAULT_PULSE_WIDTH,
                   help="pulse width, s")
    p.add_argument("--duration", type=float, default=PULSE_DURATION,
                   help="run length, s")
    p.add_argument("--stride", type=int, default=PULSE_STRIDE,
                   help="record stride, steps")
    p.add_argument("--out", required=True, help="output CSV path")

    p = sub.add_parser("sweep", help="1-D parameter sweep")
    common(p)
    p.add_argument("--variable", required=True, help="dotted parameter path")
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--out", required=True, help="output CSV path")

    p = sub.add_parser("optimize",
                       help="Nelder-Mead search over the optimize.* problem")
    common(p)
    p.add_argument("--out", required=True, help="report output path")

    p = sub.add_parser("calibrate",
                       help="bisect one parameter to hit a target peak EMF")
    common(p)
    p.add_argument("--target", type=float, default=12.1366, help="peak EMF, V")
    p.add_argument("--variable", default="design.magnet_moment")
    p.add_argument("--lo", type=float, default=0.01)
    p.add_argument("--hi", type=float, default=10.0)
    p.add_argument("--out", required=True, help="calibrated config output path")

    return parser


def _load_cfg(args) -> model.SimConfig:
    cfg = model.load_config(args.config) if args.config else model.reference_design()
    for item in args.overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, _, value = item.partition("=")
        cfg = model.set_path(cfg, key.strip(), value.strip())
    return cfg


def _print_summary(result: engine.SimResult):
    for key, value in engine.summary(result).items():
        print(f"{key}={value}")


def _cmd_simulate(args) -> int:
    cfg = _load_cfg(args)
    result = engine.run(cfg)
    engine.export_csv(result, args.out)
    _print_summary(result)
    return 0


def _cmd_pulse_source(args) -> int:
    cfg = _load_cfg(args)
    cfg = model.set_path(cfg, "sim.duration", args.duration)
    cfg = model.set_path(cfg, "sim.record_stride", args.stride)
    result = engine.run_pulse_source(cfg, args.amplitude, args.width)
    engine.export_csv(result, args.out)
    _print_summary(result)
    return 0


def _cmd_sweep(args) -> int:
    if args.steps < 2:
        raise ConfigError("--steps must be >= 2")
    if not args.lo < args.hi:
        raise ConfigError("--lo must be smaller than --hi")
    cfg = _load_cfg(args)
    values = np.linspace(args.lo, args.hi, args.steps)
    cfgs = [model.set_path(cfg, args.variable, float(v)) for v in values]
    results = engine.run_batch(cfgs)
    with open(args.out, "w", newline="\n") as f:
        f.write("value,peak_emf,dc_steady,load_delivered,efficiency\n")
        for value, res in zip(values, results):
            f.write(f"{_fmt(value)},{_fmt(res.peak_emf)},{_fmt(res.dc_steady)},"
                    f"{_fmt(res.ledger.load_delivered)},{_fmt(res.efficiency)}\n")
    print(f"rows={args.steps}")
    return 0


def _cmd_optimize(args) -> int:
    if not args.config:
        raise ConfigError("optimize requires --config with an optimize.* group")
    cfg = _load_cfg(args)
    spec = model.load_optimize_spec(args.config)
    problem = optimize.problem_from_spec(cfg, spec)
    start = [min(max(model.get_path(cfg, path), lo), hi)
             for path, lo, hi in problem.variables]
    report = optimize.nelder_mead(
        problem, start,
        max_evals=spec.get("optimize.max_evals", 200),
        tol=spec.get("optimize.tol", 1e-12))
    lines = [f"objective={problem.objective}",
             f"best_value={_fmt(report.best_value)}",
             f"best_value_full={_fmt(report.best_value_full)}",
             f"evaluations={report.evaluations}"]
    for (path, _lo, _hi), value in zip(problem.variables, report.best_point):
        lines.append(f"{path}={_fmt(value)}")
    for name, slack in report.constraint_status.items():
        lines.append(f"slack[{name}]={_fmt(slack)}")
    text = "\n".join(lines) + "\n"
    with open(args.out, "w", newline="\n") as f:
        f.write(text)
    print(text, end="")
    return 0


def _cmd_calibrate(args) -> int:
    base = _load_cfg(args)
    try:
        calibrated = optimize.calibrate(args.target, args.variable,
                                        (args.lo, args.hi), base=base)
    except optimize.CalibrationError as exc:
        raise ConfigError(str(exc)) from None
    model.save_config(calibrated, args.out)
    result = engine.run(calibrated)
    print(f"{args.variable}={_fmt(model.get_path(calibrated, args.variable))}")
    _print_summary(result)
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "pulse-source": _cmd_pulse_source,
    "sweep": _cmd_sweep,
    "optimize": _cmd_optimize,
    "calibrate": _cmd_calibrate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (SolverError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
