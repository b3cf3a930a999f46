"""Serialization: round-trippable numbers, stable JSON, CSV schemas."""

import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lagflow.audit import audit_trajectory
from lagflow.euler import to_euler
from lagflow.grid1d import Grid, ThetaBC
from lagflow.model import InitialData, PhysicalParams
from lagflow.reporting import (
    audit_report_dict,
    fmt,
    jsonable,
    run_meta_dict,
    write_euler_csv,
    write_json,
    write_timeseries,
)
from lagflow.stepper import SchemeConfig, run


@settings(deadline=None, max_examples=200)
@given(st.floats(allow_nan=False, allow_infinity=False))
def test_fmt_is_round_trippable(x):
    assert float(fmt(x)) == x


def test_jsonable_handles_numpy_and_dataclasses():
    out = jsonable({"a": np.float64(1.5), "b": np.arange(3),
                    "c": [np.int32(2), (1, 2)], "d": None})
    assert out == {"a": 1.5, "b": [0, 1, 2], "c": [2, [1, 2]], "d": None}
    with pytest.raises(TypeError):
        jsonable(object())


@pytest.fixture(scope="module")
def small_traj():
    grid = Grid(1.0, 4)
    data = InitialData(rho0=np.ones(4), v0=np.zeros(5), theta0=np.ones(4))
    cfg = SchemeConfig(dt_initial=1e-2, dt_min=1e-2, dt_max=1e-2)
    return run(data, PhysicalParams(), cfg, ThetaBC.NEUMANN_NEUMANN, 0.05,
               [0.0, 0.05])


def test_write_timeseries_schema(tmp_path, small_traj):
    path = tmp_path / "ts.csv"
    write_timeseries(small_traj, path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "t,cell,y,J,v,theta,G,eta"
    assert len(lines) == 1 + 2 * 4
    row = lines[1].split(",")
    assert len(row) == 8
    assert float(row[0]) == 0.0
    assert int(row[1]) == 0
    assert float(row[3]) == 1.0  # J
    # G = -R rho theta / J = -1 for the unit stationary state
    assert float(row[6]) == pytest.approx(-1.0, rel=1e-15)


def test_write_euler_csv(tmp_path, small_traj):
    grid = small_traj.grid
    s = small_traj.snapshots[-1]
    frame = to_euler(s, small_traj.data, grid, np.linspace(0, 1, 5))
    path = tmp_path / "euler.csv"
    write_euler_csv([(s.t, frame)], path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "t,x,rho,u,theta"
    assert len(lines) == 6


def test_audit_json_stable_and_sorted(tmp_path, small_traj):
    report = audit_trajectory(small_traj)
    doc = audit_report_dict(report, run_meta_dict(small_traj))
    p1 = tmp_path / "a.json"
    p2 = tmp_path / "b.json"
    write_json(doc, p1)
    write_json(doc, p2)
    assert p1.read_bytes() == p2.read_bytes()
    parsed = json.loads(p1.read_text())
    assert parsed["overall"]["pass"] is True
    assert parsed["snapshots"][0]["ks_residual_sup"] == 0.0
    assert parsed["snapshots"][0]["mass_error"] == 0.0
    assert parsed["run"]["accepted_steps"] == 5
    # keys are sorted at every level
    keys = list(parsed)
    assert keys == sorted(keys)
