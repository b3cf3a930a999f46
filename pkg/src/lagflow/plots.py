"""Figure rendering for the report paths.

Every report writer can drop a PNG next to its delimited output.  Figures
are rendered off-screen and saved without software metadata so repeated
runs produce identical bytes.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .audit import AuditReport  # noqa: E402
from .euler import EulerFrame  # noqa: E402
from .stepper import Trajectory  # noqa: E402
from .studies import ContinuationReport, OrderReport  # noqa: E402


def _save(fig, path: Path | str) -> None:
    fig.savefig(path, dpi=130, metadata={"Software": None})
    plt.close(fig)


def plot_fields(traj: Trajectory, path: Path | str) -> None:
    """Profiles of J, v, theta at every snapshot."""
    grid = traj.grid
    fig, axes = plt.subplots(3, 1, figsize=(7, 8), sharex=True)
    for state in traj.snapshots:
        label = f"t={state.t:g}"
        axes[0].plot(grid.centers, state.J, label=label)
        axes[1].plot(grid.nodes, state.v, label=label)
        axes[2].plot(grid.centers, state.theta, label=label)
    axes[0].set_ylabel("J")
    axes[1].set_ylabel("v")
    axes[2].set_ylabel("theta")
    axes[2].set_xlabel("y")
    axes[0].legend(loc="best", fontsize=8)
    for ax in axes:
        ax.grid(alpha=0.3)
    fig.tight_layout()
    _save(fig, path)


def plot_audit(report: AuditReport, path: Path | str) -> None:
    """Identity defects (log scale) and inequality margins over time."""
    t = [s.t for s in report.snapshots]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 7), sharex=True)
    for name, series in (
        ("|mass error|", [abs(s.mass_error) for s in report.snapshots]),
        ("|energy error|", [abs(s.energy_error) for s in report.snapshots]),
        ("sup KS residual", [s.ks_residual_sup for s in report.snapshots]),
        ("h spread", [s.h_spread for s in report.snapshots]),
        ("flow-map error", [s.flow_map_error for s in report.snapshots]),
    ):
        ax1.semilogy(t, np.maximum(series, 1e-18), marker="o", ms=3, label=name)
    ax1.set_ylabel("identity defect")
    ax1.legend(fontsize=8)
    ax1.grid(alpha=0.3)

    for name, series in (
        ("J lower", [s.j_lower_margin for s in report.snapshots]),
        ("J upper", [s.j_upper_margin for s in report.snapshots]),
        ("B lower", [s.b_lower_margin for s in report.snapshots]),
        ("B upper", [s.b_upper_margin for s in report.snapshots]),
        ("H lower", [s.h_lower_margin for s in report.snapshots]),
        ("H upper", [s.h_upper_margin for s in report.snapshots]),
        ("embed sup", [s.emb_sup_margin for s in report.snapshots]),
    ):
        ax2.plot(t, series, marker="o", ms=3, label=name)
    ax2.axhline(0.0, color="k", lw=0.8)
    ax2.set_ylabel("bound margin (>= 0 passes)")
    ax2.set_xlabel("t")
    ax2.legend(fontsize=8, ncol=2)
    ax2.grid(alpha=0.3)
    fig.tight_layout()
    _save(fig, path)


def plot_convergence(report: OrderReport, path: Path | str) -> None:
    fig, ax = plt.subplots(figsize=(6, 5))
    h = np.asarray(report.resolutions)
    for name, series in sorted(report.errors.items()):
        e = np.asarray(series, dtype=float)
        if e.size == h.size:
            x = h
        else:
            x = h[: e.size]
        order = report.orders.get(name)
        tag = f"{name} (p={order:.2f})" if isinstance(order, float) else f"{name} ({order})"
        ax.loglog(x, np.maximum(e, 1e-18), marker="o", label=tag)
    ax.set_xlabel(report.axis)
    ax.set_ylabel("error")
    ax.set_title(report.study)
    ax.grid(which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def plot_continuation(report: ContinuationReport, path: Path | str) -> None:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4.5))
    pair_eps = report.eps_list[1:]
    for name, series in sorted(report.diffs.items()):
        ax1.loglog(pair_eps, np.maximum(series, 1e-18), marker="o",
                   label=f"sup |d{name}|")
    ax1.set_xlabel("eps (smaller of each pair)")
    ax1.set_ylabel("successive difference")
    ax1.grid(which="both", alpha=0.3)
    ax1.legend(fontsize=8)

    ax2.loglog(report.eps_list, report.min_J, marker="o", label="min J over run")
    ax2.loglog(report.eps_list, report.j_lower_bounds, marker="s",
               label="proven lower envelope")
    ax2.set_xlabel("eps")
    ax2.grid(which="both", alpha=0.3)
    ax2.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def plot_euler(frames: list[tuple[float, EulerFrame]], path: Path | str) -> None:
    fig, axes = plt.subplots(3, 1, figsize=(7, 8), sharex=True)
    for t, fr in frames:
        label = f"t={t:g}"
        axes[0].plot(fr.x, fr.rho, label=label)
        axes[1].plot(fr.x, fr.u, label=label)
        axes[2].plot(fr.x, fr.theta, label=label)
    axes[0].set_ylabel("rho")
    axes[1].set_ylabel("u")
    axes[2].set_ylabel("theta")
    axes[2].set_xlabel("x")
    axes[0].legend(fontsize=8)
    for ax in axes:
        ax.grid(alpha=0.3)
    fig.tight_layout()
    _save(fig, path)
