"""Command-line entry point.

Subcommands: run, audit, continuation, refine, mms, euler-export.  Exit
codes: 0 all graded audits pass, 1 configuration/structural/runtime error,
2 a graded audit (in particular a proven inequality) fails.

Output directory precedence: --out flag, then LAGFLOW_OUT, then the
config's output.dir.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import plots
from .audit import audit_trajectory
from .config import RunConfig, load_config
from .errors import ConfigError, LagflowError
from .euler import to_euler
from .reporting import (
    audit_report_dict,
    continuation_report_dict,
    order_report_dict,
    run_meta_dict,
    write_euler_csv,
    write_json,
    write_timeseries,
)
from .stepper import run
from .studies import eps_continuation, manufactured_dirichlet, manufactured_neumann, \
    mms_run, refinement_study

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_AUDIT_FAILED = 2


class _Parser(argparse.ArgumentParser):
    # Bad flags are user errors (exit 1), not audit failures (exit 2).
    def error(self, message):
        raise ConfigError(message)


def _say(quiet: bool, *parts) -> None:
    if not quiet:
        print(*parts)


def _resolve_out(args, cfg: RunConfig) -> Path:
    out = args.out or os.environ.get("LAGFLOW_OUT") or cfg.doc["output"]["dir"]
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _checked_bc(cfg: RunConfig):
    ms = cfg.manufactured()
    bc = cfg.bc()
    if ms is not None:
        if bc is not ms.bc:
            raise ConfigError(
                f"bc {bc.value!r} conflicts with manufactured variant "
                f"({ms.bc.value!r} required)")
        if cfg.params().eps != 0.0:
            raise ConfigError("manufactured forcing assumes eps = 0")
    return ms, bc


def _simulate(cfg: RunConfig):
    ms, bc = _checked_bc(cfg)
    grid = cfg.grid()
    data = cfg.initial_data(grid)
    traj = run(data, cfg.params(), cfg.scheme(ms), bc, cfg.t_end(),
               cfg.snapshot_times())
    return traj


def _audit_and_report(traj, cfg: RunConfig, out: Path, quiet: bool,
                      figures: bool) -> int:
    report = audit_trajectory(traj, cfg.thresholds())
    write_json(audit_report_dict(report, run_meta_dict(traj)), out / "audit.json")
    _say(quiet, f"wrote {out / 'audit.json'}")
    if figures:
        plots.plot_audit(report, out / "audit.png")
    names = []
    for snap in report.snapshots:
        for item in snap.graded:
            if item.name not in names:
                names.append(item.name)
    for name in names:
        items = [g for s in report.snapshots for g in s.graded if g.name == name]
        ok = all(g.passed for g in items)
        if items[0].kind == "inequality":
            worst = min(items, key=lambda g: g.value)
        else:
            worst = max(items, key=lambda g: abs(g.value))
        _say(quiet, f"{'PASS' if ok else 'FAIL'} {name}: worst={worst.value:.3e} "
                    f"tol={worst.threshold:.3e}")
    return EXIT_OK if report.all_passed else EXIT_AUDIT_FAILED


def _cmd_run(args, cfg: RunConfig) -> int:
    out = _resolve_out(args, cfg)
    (out / "config.echo.json").write_text(cfg.echo(), encoding="utf-8")
    traj = _simulate(cfg)
    write_timeseries(traj, out / "timeseries.csv")
    _say(args.quiet, f"wrote {out / 'timeseries.csv'} "
                     f"({traj.accepted} steps, {traj.rejected} rejected, "
                     f"min J = {traj.min_J:.6g})")
    if cfg.doc["output"]["figures"]:
        plots.plot_fields(traj, out / "fields.png")
    return _audit_and_report(traj, cfg, out, args.quiet,
                             cfg.doc["output"]["figures"])


def _cmd_audit(args, cfg: RunConfig) -> int:
    out = _resolve_out(args, cfg)
    traj = _simulate(cfg)
    return _audit_and_report(traj, cfg, out, args.quiet,
                             cfg.doc["output"]["figures"])


def _cmd_continuation(args, cfg: RunConfig) -> int:
    out = _resolve_out(args, cfg)
    grid = cfg.grid()
    data = cfg.initial_data(grid)
    report = eps_continuation(data, cfg.params(), cfg.scheme(), cfg.bc(),
                              cfg.t_end(), cfg.doc["study"]["eps_list"])
    write_json(continuation_report_dict(report), out / "continuation.json")
    _say(args.quiet, f"wrote {out / 'continuation.json'}")
    if cfg.doc["output"]["figures"] and report.eps_list:
        plots.plot_continuation(report, out / "continuation.png")
    for eps, msg in report.failed:
        _say(args.quiet, f"FAIL eps={eps:g}: {msg}")
    for msg in report.cap_violations:
        _say(args.quiet, f"FAIL cap: {msg}")
    _say(args.quiet,
         f"{'PASS' if report.diffs_strictly_decreasing else 'FAIL'} "
         f"successive differences strictly decreasing")
    if report.failed:
        return EXIT_ERROR
    return EXIT_OK if report.ok and report.diffs_strictly_decreasing \
        else EXIT_AUDIT_FAILED


def _cmd_refine(args, cfg: RunConfig) -> int:
    out = _resolve_out(args, cfg)
    study = cfg.doc["study"]
    report = refinement_study(cfg.profile_builder(), cfg.params(), cfg.scheme(),
                              cfg.bc(), cfg.t_end(), study["base_N"],
                              study["base_dt"], study["refine_levels"])
    write_json(order_report_dict(report), out / "refine.json")
    _say(args.quiet, f"wrote {out / 'refine.json'}")
    if cfg.doc["output"]["figures"]:
        plots.plot_convergence(report, out / "refine.png")
    for name, order in sorted(report.orders.items()):
        _say(args.quiet, f"observed order {name}: "
                         f"{order if isinstance(order, str) else f'{order:.2f}'}")
    return EXIT_OK


def _cmd_mms(args, cfg: RunConfig) -> int:
    out = _resolve_out(args, cfg)
    study = cfg.doc["study"]
    params = cfg.params()
    ms = (manufactured_neumann(params) if study["mms_variant"] == "neumann"
          else manufactured_dirichlet(params))
    spatial = mms_run(ms, params, cfg.scheme(), cfg.t_end(), study["base_N"],
                      study["base_dt"], study["levels"], mode="spatial")
    temporal = mms_run(ms, params, cfg.scheme(), cfg.t_end(), study["temporal_N"],
                       study["temporal_dt"], study["levels"], mode="temporal")
    write_json(order_report_dict(spatial), out / "mms_spatial.json")
    write_json(order_report_dict(temporal), out / "mms_temporal.json")
    _say(args.quiet, f"wrote {out / 'mms_spatial.json'} and {out / 'mms_temporal.json'}")
    if cfg.doc["output"]["figures"]:
        plots.plot_convergence(spatial, out / "mms_spatial.png")
        plots.plot_convergence(temporal, out / "mms_temporal.png")
    for rep in (spatial, temporal):
        for name, order in sorted(rep.orders.items()):
            _say(args.quiet, f"{rep.study} order {name}: "
                             f"{order if isinstance(order, str) else f'{order:.2f}'}")
    return EXIT_OK


def _cmd_euler_export(args, cfg: RunConfig) -> int:
    out = _resolve_out(args, cfg)
    traj = _simulate(cfg)
    x = np.linspace(0.0, cfg.params().L, cfg.doc["euler"]["x_count"])
    frames = [(s.t, to_euler(s, traj.data, traj.grid, x)) for s in traj.snapshots]
    write_euler_csv(frames, out / "euler.csv")
    _say(args.quiet, f"wrote {out / 'euler.csv'}")
    if cfg.doc["output"]["figures"]:
        plots.plot_euler(frames, out / "euler.png")
    return EXIT_OK


_COMMANDS = {
    "run": _cmd_run,
    "audit": _cmd_audit,
    "continuation": _cmd_continuation,
    "refine": _cmd_refine,
    "mms": _cmd_mms,
    "euler-export": _cmd_euler_export,
}


def main(argv=None) -> int:
    parser = _Parser(prog="lagflow",
                     description="Lagrangian flow-map gas solver and bound auditor")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "integrate and write the time series plus audits"),
        ("audit", "integrate and write the audit report"),
        ("continuation", "regularization ladder toward vacuum data"),
        ("refine", "simultaneous space/time refinement order study"),
        ("mms", "manufactured-solution order verification"),
        ("euler-export", "transport snapshots to the fixed frame and export"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to a JSON config")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--quiet", action="store_true", help="suppress stdout")
    try:
        args = parser.parse_args(argv)
        cfg = load_config(args.config)
        return _COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"lagflow: configuration error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except LagflowError as exc:
        print(f"lagflow: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"lagflow: i/o error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
