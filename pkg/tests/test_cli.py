"""CLI contract: subcommands, exit codes, file outputs, determinism."""

import json

from lagflow.cli import main

STATIONARY = {
    "params": {"mu": 1.0, "kappa": 1.0, "R": 1.0, "c_v": 1.0, "L": 1.0},
    "grid": {"N": 2},
    "time": {"t_end": 0.02, "dt_initial": 1e-2, "dt_min": 1e-2, "dt_max": 1e-2,
             "snapshot_times": [0.01, 0.02]},
    "initial": {"profile": "constant"},
}


def write_config(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


def test_run_stationary_exits_zero_and_writes_files(tmp_path):
    cfg = write_config(tmp_path, STATIONARY)
    out = tmp_path / "out"
    code = main(["run", "--config", str(cfg), "--out", str(out), "--quiet"])
    assert code == 0
    assert (out / "timeseries.csv").exists()
    assert (out / "audit.json").exists()
    assert (out / "config.echo.json").exists()
    assert (out / "fields.png").exists()
    assert (out / "audit.png").exists()
    # N=2 cells, 2 snapshots -> header + 4 rows
    lines = (out / "timeseries.csv").read_text().strip().split("\n")
    assert lines[0] == "t,cell,y,J,v,theta,G,eta"
    assert len(lines) == 5
    audit = json.loads((out / "audit.json").read_text())
    assert audit["overall"]["pass"] is True
    assert audit["snapshots"][0]["mass_error"] == 0.0


def test_run_without_figures(tmp_path):
    doc = dict(STATIONARY)
    doc["output"] = {"dir": "out", "figures": False}
    cfg = write_config(tmp_path, doc)
    out = tmp_path / "out2"
    assert main(["run", "--config", str(cfg), "--out", str(out), "--quiet"]) == 0
    assert not (out / "fields.png").exists()
    assert (out / "timeseries.csv").exists()


def test_bad_grid_is_exit_one(tmp_path):
    doc = {"grid": {"N": 0}, "time": {"t_end": 1.0}}
    cfg = write_config(tmp_path, doc)
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o"),
                 "--quiet"]) == 1


def test_missing_config_file_is_exit_one(tmp_path):
    assert main(["run", "--config", str(tmp_path / "nope.json"),
                 "--out", str(tmp_path / "o"), "--quiet"]) == 1


def test_unknown_flag_is_exit_one(tmp_path):
    assert main(["run", "--bogus"]) == 1


def test_audit_subcommand(tmp_path):
    cfg = write_config(tmp_path, STATIONARY)
    out = tmp_path / "out"
    assert main(["audit", "--config", str(cfg), "--out", str(out),
                 "--quiet"]) == 0
    assert (out / "audit.json").exists()
    assert not (out / "timeseries.csv").exists()


def test_injected_fault_fails_proven_bound_with_exit_two(tmp_path):
    doc = {
        "params": {"mu": 1.0, "kappa": 1.0, "R": 1.0, "c_v": 1.0, "L": 1.0},
        "grid": {"N": 100},
        "time": {"t_end": 0.5, "dt_initial": 1e-3, "dt_min": 1e-3,
                 "dt_max": 1e-3},
        "initial": {"profile": "sine-velocity", "v_amp": 0.5},
        "debug": {"heating_factor": 50.0},
    }
    cfg = write_config(tmp_path, doc)
    out = tmp_path / "out"
    code = main(["run", "--config", str(cfg), "--out", str(out), "--quiet"])
    assert code == 2
    audit = json.loads((out / "audit.json").read_text())
    assert audit["overall"]["inequality_failures"]


def test_euler_export(tmp_path):
    cfg = write_config(tmp_path, STATIONARY)
    out = tmp_path / "out"
    assert main(["euler-export", "--config", str(cfg), "--out", str(out),
                 "--quiet"]) == 0
    lines = (out / "euler.csv").read_text().strip().split("\n")
    assert lines[0] == "t,x,rho,u,theta"
    assert len(lines) == 1 + 2 * 129


def test_mms_subcommand(tmp_path):
    doc = {
        "grid": {"N": 16},
        "time": {"t_end": 0.4},
        "initial": {"profile": "mms"},
        "study": {"levels": 3, "base_N": 16, "base_dt": 4e-2,
                  "temporal_N": 64, "temporal_dt": 4e-2},
        "output": {"dir": "out", "figures": False},
    }
    cfg = write_config(tmp_path, doc)
    out = tmp_path / "out"
    assert main(["mms", "--config", str(cfg), "--out", str(out), "--quiet"]) == 0
    spatial = json.loads((out / "mms_spatial.json").read_text())
    assert set(spatial["errors"]) == {"v", "theta", "J"}
    assert (out / "mms_temporal.json").exists()


def test_refine_subcommand(tmp_path):
    doc = {
        "grid": {"N": 16},
        "time": {"t_end": 0.1},
        "initial": {"profile": "sine-velocity", "v_amp": 0.3},
        "study": {"refine_levels": 3, "base_N": 16, "base_dt": 5e-3},
        "output": {"dir": "out", "figures": False},
    }
    cfg = write_config(tmp_path, doc)
    out = tmp_path / "out"
    assert main(["refine", "--config", str(cfg), "--out", str(out),
                 "--quiet"]) == 0
    assert (out / "refine.json").exists()


def test_continuation_subcommand(tmp_path):
    doc = {
        "grid": {"N": 32},
        "time": {"t_end": 0.05, "dt_initial": 1e-3, "dt_min": 1e-6,
                 "dt_max": 1e-3},
        "initial": {"profile": "vacuum-bump"},
        "study": {"eps_list": [1e-1, 1e-2, 1e-3]},
        "output": {"dir": "out", "figures": False},
    }
    cfg = write_config(tmp_path, doc)
    out = tmp_path / "out"
    assert main(["continuation", "--config", str(cfg), "--out", str(out),
                 "--quiet"]) == 0
    report = json.loads((out / "continuation.json").read_text())
    assert report["ok"] is True
    assert report["diffs_strictly_decreasing"] is True


def test_mms_profile_with_wrong_bc_is_config_error(tmp_path):
    doc = {
        "grid": {"N": 16}, "time": {"t_end": 0.2},
        "bc": "dirichlet-dirichlet",
        "initial": {"profile": "mms", "variant": "neumann"},
    }
    cfg = write_config(tmp_path, doc)
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o"),
                 "--quiet"]) == 1


def test_byte_identical_reruns(tmp_path):
    doc = {
        "params": {"eps": 1e-3},
        "grid": {"N": 64},
        "time": {"t_end": 0.05, "dt_initial": 1e-4, "dt_min": 1e-8,
                 "dt_max": 1e-3, "snapshot_times": [0.025, 0.05]},
        "initial": {"profile": "vacuum-bump"},
        "output": {"dir": "out", "figures": False},
    }
    cfg = write_config(tmp_path, doc)
    outs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        assert main(["run", "--config", str(cfg), "--out", str(out),
                     "--quiet"]) == 0
        outs.append(out)
    for name in ("timeseries.csv", "audit.json", "config.echo.json"):
        a = (outs[0] / name).read_bytes()
        b = (outs[1] / name).read_bytes()
        assert a == b, f"{name} differs between reruns"


def test_out_dir_from_environment(tmp_path, monkeypatch):
    cfg = write_config(tmp_path, STATIONARY)
    env_out = tmp_path / "env_out"
    monkeypatch.setenv("LAGFLOW_OUT", str(env_out))
    monkeypatch.chdir(tmp_path)
    assert main(["audit", "--config", str(cfg), "--quiet"]) == 0
    assert (env_out / "audit.json").exists()
