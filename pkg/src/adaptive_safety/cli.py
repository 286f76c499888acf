"""Command-line front end.

    adaptive-safety run CONFIG [-o DIR] [--set KEY=VALUE ...] [--force]
    adaptive-safety check CONFIG
    adaptive-safety compare CONFIG [-o DIR]
    adaptive-safety sweep CONFIG --param {beta,gamma,K} --values V1,V2,... [-o DIR]
    adaptive-safety show CONFIG

CONFIG is a preset name or a path to a scenario file. Exit status: 0 when
every check passes, 1 when a trajectory monitor fails, 2 when the pre-run
gain/start conditions fail, 3 when a run stops early (divergence, an
infeasible filter row, singular inertia), 64 for usage and parse errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import certify
from .controllers import ControllerKind
from .core import ConfigurationError
from .scenario import PRESETS, build, format_scenario, load_scenario, override
from .sim import DivergenceError, SimulationError, run

log = logging.getLogger("adaptive_safety")

EXIT_OK = 0
EXIT_MONITOR = 1
EXIT_GATE = 2
EXIT_RUN = 3
EXIT_USAGE = 64


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# output helpers

def write_trace(trace, path):
    """Write a trace as CSV with 17 significant digits."""
    np.savetxt(path, trace.table(), fmt="%.17g", delimiter=",",
               header=",".join(trace.header()), comments="")


def monitor(scn, trace):
    if scn.is_robot:
        return certify.monitor_robot(trace, scn.plant, scn.gains)
    return certify.monitor_affine(trace, scn.plant, scn.gains, scn.config.controller)


def _summary_text(summary):
    return "".join(f"{k} = {v:.10g}\n" if isinstance(v, float) else f"{k} = {v}\n"
                   for k, v in summary.items())


def _summary_line(name, status, summary):
    keys = ("min_h", "min_h_a", "min_B", "max_abs_x1", "max_abs_q", "l2_effort", "max_abs_u")
    parts = [f"{k}={summary[k]:.6g}" for k in keys if k in summary]
    return f"{name}: {status} " + " ".join(parts)


def _write_report(path, gate, mon=None, summary=None, note=None):
    lines = ["[conditions]\n", gate.text()]
    if mon is not None:
        lines += ["\n[monitors]\n", mon.text()]
    if summary:
        lines += ["\n[summary]\n", _summary_text(summary)]
    if note:
        lines += ["\n[error]\n", note + "\n"]
    Path(path).write_text("".join(lines))


def _outdir(path):
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


# --------------------------------------------------------------------------
# configuration

def load(source, sets=()):
    cfg = load_scenario(source)
    for item in sets:
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        cfg = override(cfg, key.strip(), value.strip())
    return cfg


def _gate_failed(gate):
    return ", ".join(e.name for e in gate.failed)


# --------------------------------------------------------------------------
# commands

def cmd_check(cfg, out=None):
    out = out or sys.stdout
    gate = certify.check_conditions(cfg)
    out.write(gate.text())
    return EXIT_OK if gate.passed else EXIT_GATE


def _simulate(cfg, outdir, trace_name="trace.csv", report_name="report.txt", force=False):
    """Gate, run and monitor one scenario; returns (status, trace or None, summary)."""
    scn = build(cfg)
    gate = certify.check_conditions(scn)
    report = outdir / report_name
    if not gate.passed and not force:
        _write_report(report, gate, note=f"start/gain conditions failed: {_gate_failed(gate)}")
        return EXIT_GATE, None, {}
    try:
        trace = run(scn)
    except SimulationError as exc:
        if exc.trace is not None:
            write_trace(exc.trace, outdir / trace_name)
        kind = "diverged" if isinstance(exc, DivergenceError) else "stopped"
        _write_report(report, gate, summary=exc.trace.summary if exc.trace else None,
                      note=f"run {kind}: {exc}")
        return EXIT_RUN, exc.trace, exc.trace.summary if exc.trace else {}
    write_trace(trace, outdir / trace_name)
    mon = monitor(scn, trace)
    _write_report(report, gate, mon, trace.summary)
    if not gate.passed:
        return EXIT_GATE, trace, trace.summary
    return (EXIT_OK if mon.passed else EXIT_MONITOR), trace, trace.summary


_STATUS = {EXIT_OK: "PASS", EXIT_MONITOR: "MONITOR FAIL", EXIT_GATE: "GATE FAIL",
           EXIT_RUN: "RUN STOPPED"}


def cmd_run(cfg, outdir, force=False, out=None):
    out = out or sys.stdout
    outdir = _outdir(outdir)
    code, _, summary = _simulate(cfg, outdir, force=force)
    if code == EXIT_GATE and not summary:
        out.write(certify.check_conditions(cfg).text())
    out.write(_summary_line(cfg.name, _STATUS[code], summary) + "\n")
    return code


def cmd_compare(cfg, outdir, out=None):
    """RaCBF against T-RaCBF with identical hyperparameters."""
    out = out or sys.stdout
    if not cfg.controller.is_affine:
        raise UsageError("compare needs a control-affine scenario")
    outdir = _outdir(outdir)
    cfgs = {"racbf": cfg.replace(controller=ControllerKind.RACBF, nu0=None),
            "tracbf": cfg.replace(controller=ControllerKind.TRACBF)}
    gates = {k: certify.check_conditions(c) for k, c in cfgs.items()}
    if not all(g.passed for g in gates.values()):
        for k, g in gates.items():
            out.write(f"[{k}]\n" + g.text())
        return EXIT_GATE
    results = {}
    for k, c in cfgs.items():
        results[k] = _simulate(c, outdir, f"trace_{k}.csv", f"report_{k}.txt")
    codes = [r[0] for r in results.values()]
    if EXIT_RUN in codes:
        out.write("compare: RUN STOPPED\n")
        return EXIT_RUN
    rows = ["metric,racbf,tracbf"]
    for m in ("min_h", "min_h_a", "l2_effort", "smoothness", "max_abs_u", "final_tracking_error"):
        rows.append(f"{m},{results['racbf'][2][m]:.17g},{results['tracbf'][2][m]:.17g}")
    (outdir / "compare.csv").write_text("\n".join(rows) + "\n")
    for row in rows:
        out.write(row.replace(",", "\t") + "\n")
    safe = all(c == EXIT_OK for c in codes)
    less = results["tracbf"][2]["l2_effort"] < results["racbf"][2]["l2_effort"]
    out.write(f"compare: both safe = {safe}, tracbf effort lower = {less}\n")
    return EXIT_OK if safe and less else EXIT_MONITOR


SWEEP_PARAMS = ("beta", "gamma", "K")


def sweep_config(cfg, param, value):
    """Scenario with one scalar gain replaced (uniform diagonal for gamma and K)."""
    if param == "beta":
        return cfg.replace(beta=value)
    if param == "gamma":
        return cfg.replace(Gamma=(value,) * len(cfg.Gamma))
    if param == "K":
        if cfg.K is None:
            raise UsageError("K sweep needs a manipulator scenario")
        return cfg.replace(K=(value,) * len(cfg.K))
    raise UsageError(f"unknown sweep parameter {param!r}")


def cmd_sweep(cfg, param, values, outdir, out=None):
    out = out or sys.stdout
    if not values:
        raise UsageError("empty values list")
    outdir = _outdir(outdir)
    rows = ["value,status,min_h,l2_effort,smoothness,max_abs_u"]
    worst = EXIT_OK
    for v in values:
        c = sweep_config(cfg, param, v)
        sub = _outdir(outdir / f"{param}_{v:g}")
        code, _, summ = _simulate(c, sub)
        status = {EXIT_OK: "pass", EXIT_MONITOR: "fail", EXIT_GATE: "gate_failed",
                  EXIT_RUN: "diverged"}[code]
        worst = max(worst, code)
        nums = [summ.get(k, float("nan")) for k in ("min_h", "l2_effort", "smoothness", "max_abs_u")]
        rows.append(f"{v:.17g},{status}," + ",".join(f"{x:.17g}" for x in nums))
        out.write(f"{param}={v:g}: {status}\n")
    (outdir / "sweep.csv").write_text("\n".join(rows) + "\n")
    return worst


# --------------------------------------------------------------------------
# entry point

def _values(text):
    items = [t for t in text.split(",") if t.strip()]
    try:
        return [float(t) for t in items]
    except ValueError as exc:
        raise UsageError(f"bad --values: {exc}") from exc


def make_parser():
    p = argparse.ArgumentParser(prog="adaptive-safety",
                                description="Adaptive safety filters with high-order tuners.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, outdir=True):
        sp.add_argument("config", help=f"scenario file or preset ({', '.join(PRESETS)})")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a dotted key, e.g. gains.Gamma=1,1")
        if outdir:
            sp.add_argument("-o", "--out", default="out", help="output directory")

    sp = sub.add_parser("run", help="gate, simulate and monitor one scenario")
    common(sp)
    sp.add_argument("--force", action="store_true",
                    help="simulate even when the start conditions fail (exit status still 2)")
    common(sub.add_parser("check", help="evaluate start and gain conditions only"), outdir=False)
    common(sub.add_parser("compare", help="RaCBF against T-RaCBF on one scenario"))
    sp = sub.add_parser("sweep", help="repeat a run over values of one gain")
    common(sp)
    sp.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    sp.add_argument("--values", required=True, help="comma separated list")
    common(sub.add_parser("show", help="print the parsed scenario"), outdir=False)
    return p


def main(argv=None):
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load(args.config, args.set)
        if args.command == "check":
            return cmd_check(cfg)
        if args.command == "show":
            sys.stdout.write(format_scenario(cfg))
            return EXIT_OK
        if args.command == "run":
            return cmd_run(cfg, args.out, force=args.force)
        if args.command == "compare":
            return cmd_compare(cfg, args.out)
        return cmd_sweep(cfg, args.param, _values(args.values), args.out)
    except (ConfigurationError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
