"""Config parsing: strict keys, defaults echo, idempotent normalization."""

import json

import numpy as np
import pytest

from lagflow.config import build_initial_data, normalize, parse_config
from lagflow.errors import ConfigError
from lagflow.grid1d import Grid, ThetaBC
from lagflow.model import PhysicalParams

MINIMAL = '{"params": {"L": 1.0}, "grid": {"N": 16}, "time": {"t_end": 0.5}}'


def test_minimal_document_fills_all_defaults():
    cfg = parse_config(MINIMAL)
    doc = cfg.doc
    assert doc["params"]["mu"] == 1.0
    assert doc["time"]["dt_initial"] == 1e-3
    assert doc["time"]["snapshot_times"] is None
    assert doc["bc"] == "neumann-neumann"
    assert doc["initial"] == {"profile": "constant", "rho": 1.0, "theta": 1.0}
    assert doc["audit"]["mass_rel_tol"] == 1e-12
    assert doc["output"]["figures"] is True
    assert cfg.snapshot_times() == [0.5]


def test_echo_reparse_is_fixed_point():
    cfg = parse_config(MINIMAL)
    echoed = cfg.echo()
    cfg2 = parse_config(echoed)
    assert cfg2.doc == cfg.doc
    assert cfg2.echo() == echoed


def test_unknown_keys_rejected_with_path():
    with pytest.raises(ConfigError, match="grid.M"):
        parse_config('{"grid": {"N": 8, "M": 2}, "time": {"t_end": 1.0}}')
    with pytest.raises(ConfigError, match="outputs"):
        parse_config('{"grid": {"N": 8}, "time": {"t_end": 1.0}, "outputs": {}}')


def test_missing_required_keys_named():
    with pytest.raises(ConfigError, match="grid.N"):
        parse_config('{"time": {"t_end": 1.0}}')
    with pytest.raises(ConfigError, match="time.t_end"):
        parse_config('{"grid": {"N": 8}}')


def test_type_mismatch_reports_path():
    with pytest.raises(ConfigError, match="grid.N"):
        parse_config('{"grid": {"N": "many"}, "time": {"t_end": 1.0}}')
    with pytest.raises(ConfigError, match="time.t_end"):
        parse_config('{"grid": {"N": 8}, "time": {"t_end": [1]}}')
    with pytest.raises(ConfigError, match="output.figures"):
        parse_config('{"grid": {"N": 8}, "time": {"t_end": 1.0}, '
                     '"output": {"figures": 3}}')


def test_negative_mu_names_mu():
    with pytest.raises(ConfigError, match="mu"):
        parse_config('{"params": {"mu": -1.0}, "grid": {"N": 8}, '
                     '"time": {"t_end": 1.0}}')


def test_bc_enum_mapping():
    for name, member in (("neumann-neumann", ThetaBC.NEUMANN_NEUMANN),
                         ("dirichlet-dirichlet", ThetaBC.DIRICHLET_DIRICHLET),
                         ("dirichlet-neumann", ThetaBC.DIRICHLET_NEUMANN),
                         ("neumann-dirichlet", ThetaBC.NEUMANN_DIRICHLET)):
        cfg = parse_config(json.dumps(
            {"grid": {"N": 8}, "time": {"t_end": 1.0}, "bc": name}))
        assert cfg.bc() is member
    with pytest.raises(ConfigError, match="bc"):
        parse_config('{"grid": {"N": 8}, "time": {"t_end": 1.0}, "bc": "robin"}')


def test_invalid_json_is_config_error():
    with pytest.raises(ConfigError, match="invalid JSON"):
        parse_config("{not json")


def test_profile_knobs_validated():
    with pytest.raises(ConfigError, match="initial.v_amp"):
        parse_config('{"grid": {"N": 8}, "time": {"t_end": 1.0}, '
                     '"initial": {"profile": "constant", "v_amp": 1.0}}')
    with pytest.raises(ConfigError, match="initial.profile"):
        parse_config('{"grid": {"N": 8}, "time": {"t_end": 1.0}, '
                     '"initial": {"profile": "gaussian"}}')


def test_inline_profile_roundtrip():
    n = 8
    doc = {
        "grid": {"N": n}, "time": {"t_end": 0.1},
        "initial": {"profile": "inline",
                    "rho0": [1.0] * n,
                    "v0": [0.0] * (n + 1),
                    "theta0": [2.0] * n},
    }
    cfg = parse_config(json.dumps(doc))
    grid = cfg.grid()
    data = cfg.initial_data(grid)
    np.testing.assert_array_equal(data.theta0, 2.0)
    bad = dict(doc)
    bad["initial"] = dict(doc["initial"], rho0=[1.0] * (n + 1))
    with pytest.raises(ConfigError):
        parse_config(json.dumps(bad)).initial_data(grid)


def test_builtin_profiles_shapes():
    grid = Grid(1.0, 32)
    params = PhysicalParams()
    for initial in (
        {"profile": "constant", "rho": 1.0, "theta": 1.0},
        {"profile": "sine-velocity", "rho": 1.0, "theta": 1.0,
         "v_amp": 0.5, "mode": 2},
        {"profile": "vacuum-bump", "theta": 1.0, "v_amp": 0.0},
        {"profile": "mms", "variant": "neumann"},
        {"profile": "mms", "variant": "dirichlet"},
    ):
        initial = normalize({"grid": {"N": 32}, "time": {"t_end": 1.0},
                             "initial": initial})["initial"]
        data = build_initial_data(initial, grid, params)
        data.check_shapes(grid)
        assert data.v0[0] == 0.0 and data.v0[-1] == 0.0


def test_vacuum_bump_profile_touches_zero_at_walls():
    grid = Grid(2.0, 100)
    params = PhysicalParams()
    initial = normalize({"grid": {"N": 100}, "time": {"t_end": 1.0},
                         "initial": {"profile": "vacuum-bump"}})["initial"]
    data = build_initial_data(initial, grid, params)
    assert np.min(data.rho0) > 0.0  # cell centers never sit on the wall
    assert data.rho0[0] < 0.05 and data.rho0[-1] < 0.05
    assert np.max(data.rho0) <= 1.0


def test_manufactured_config_requires_matching_bc():
    cfg = parse_config('{"grid": {"N": 8}, "time": {"t_end": 0.5}, '
                       '"initial": {"profile": "mms", "variant": "dirichlet"}}')
    assert cfg.manufactured().bc is ThetaBC.DIRICHLET_DIRICHLET
    with pytest.raises(ConfigError, match="variant"):
        parse_config('{"grid": {"N": 8}, "time": {"t_end": 0.5}, '
                     '"initial": {"profile": "mms", "variant": "robin"}}')
