"""Bit-stable serialization of trajectories, audit reports and study reports.

CSV numbers are rendered with 17 significant digits (round-trippable);
JSON uses sorted keys and Python's shortest round-trip float repr, so a
re-run of the same configuration produces byte-identical files.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import numpy as np

from .audit import AuditReport, effective_flux_of_state
from .euler import EulerFrame
from .stepper import Trajectory
from .studies import ContinuationReport, OrderReport


def fmt(x: float) -> str:
    return f"{x:.17g}"


def jsonable(obj):
    """Recursively convert report objects to JSON-serializable data."""
    if isinstance(obj, (bool, int, str)) or obj is None:
        return obj
    if isinstance(obj, float):
        return obj
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_json(obj, path: Path | str) -> None:
    text = json.dumps(jsonable(obj), sort_keys=True, indent=2) + "\n"
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def write_timeseries(traj: Trajectory, path: Path | str) -> None:
    """Long-format CSV: one row per cell per snapshot.

    Node quantities (v, eta) are reported at cell centers by adjacent-node
    averaging so every row is a complete cell record.
    """
    grid = traj.grid
    lines = ["t,cell,y,J,v,theta,G,eta"]
    for state in traj.snapshots:
        G = effective_flux_of_state(state, traj.data, traj.params, grid)
        v_c = 0.5 * (state.v[:-1] + state.v[1:])
        eta = grid.nodes + state.acc_eta
        eta_c = 0.5 * (eta[:-1] + eta[1:])
        for i in range(grid.N):
            lines.append(",".join([
                fmt(state.t), str(i), fmt(grid.centers[i]), fmt(state.J[i]),
                fmt(v_c[i]), fmt(state.theta[i]), fmt(G[i]), fmt(eta_c[i]),
            ]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def write_euler_csv(frames: list[tuple[float, EulerFrame]], path: Path | str) -> None:
    lines = ["t,x,rho,u,theta"]
    for t, frame in frames:
        for i in range(frame.x.size):
            lines.append(",".join([
                fmt(t), fmt(frame.x[i]), fmt(frame.rho[i]),
                fmt(frame.u[i]), fmt(frame.theta[i]),
            ]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _constants_dict(constants) -> dict:
    out = {f.name: jsonable(getattr(constants, f.name))
           for f in dataclasses.fields(constants)
           if f.name not in ("g0", "h0")}
    out["g0_sup"] = float(np.nanmax(np.abs(constants.g0))) if constants.g0.size else 0.0
    out["h0_sup"] = float(np.nanmax(np.abs(constants.h0))) if constants.h0.size else 0.0
    return out


def audit_report_dict(report: AuditReport, run_meta: dict | None = None) -> dict:
    doc = {
        "thresholds": jsonable(report.thresholds),
        "constants": _constants_dict(report.constants),
        "snapshots": jsonable(report.snapshots),
        "overall": {
            "pass": report.all_passed,
            "failures": [{"t": t, "item": name} for t, name in report.failures],
            "inequality_failures": [
                {"t": t, "item": name} for t, name in report.inequality_failures],
        },
    }
    if run_meta is not None:
        doc["run"] = jsonable(run_meta)
    return doc


def run_meta_dict(traj: Trajectory) -> dict:
    return {
        "accepted_steps": traj.accepted,
        "rejected_steps": traj.rejected,
        "min_J": traj.min_J,
        "max_mass_err": traj.max_mass_err,
        "snapshot_times": traj.times,
    }


def order_report_dict(report: OrderReport) -> dict:
    return jsonable(report)


def continuation_report_dict(report: ContinuationReport) -> dict:
    doc = {f.name: jsonable(getattr(report, f.name))
           for f in dataclasses.fields(report) if f.name != "final_states"}
    doc["diffs_strictly_decreasing"] = report.diffs_strictly_decreasing
    doc["ok"] = report.ok
    return doc
