"""Run configuration: a strict JSON document with every default made explicit.

Unknown keys are rejected by full path, required keys are named when missing,
and the normalized echo-back re-parses to itself (idempotent normalization).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, StructuralError
from .grid1d import Grid, ThetaBC
from .model import InitialData, PhysicalParams
from .stepper import SchemeConfig
from .audit import AuditThresholds
from .studies import ManufacturedSolution, manufactured_dirichlet, manufactured_neumann

_REQUIRED = object()

# (default, kind); kind drives the type check.
_SCHEMA: dict[str, dict[str, tuple]] = {
    "params": {
        "mu": (1.0, "number"),
        "kappa": (1.0, "number"),
        "R": (1.0, "number"),
        "c_v": (1.0, "number"),
        "L": (1.0, "number"),
        "eps": (0.0, "number"),
    },
    "grid": {
        "N": (_REQUIRED, "int"),
    },
    "time": {
        "t_end": (_REQUIRED, "number"),
        "dt_initial": (1e-3, "number"),
        "dt_min": (1e-10, "number"),
        "dt_max": (1e-2, "number"),
        "safety": (0.8, "number"),
        "snapshot_times": (None, "number_list_or_null"),
    },
    "scheme": {
        "variant": ("imex-euler", "str"),
        "J_floor": (1e-8, "number"),
        "theta_negative_tolerance": (1e-11, "number"),
    },
    "audit": {
        "mass_rel_tol": (1e-12, "number"),
        "energy_rel_tol": (5e-3, "number"),
        "ks_rel_tol": (5e-3, "number"),
        "h_spread_rel_tol": (5e-3, "number"),
        "estb_abs_tol": (1e-12, "number"),
        "esth_rel_tol": (1e-9, "number"),
        "flow_map_tol": (1e-10, "number"),
        "delta_mask_factor": (1e-2, "number"),
    },
    "study": {
        "eps_list": ([1e-1, 1e-2, 1e-3, 1e-4], "number_list"),
        "levels": (3, "int"),
        "refine_levels": (4, "int"),
        "base_N": (50, "int"),
        "base_dt": (4e-3, "number"),
        "mms_variant": ("neumann", "str"),
        "temporal_N": (256, "int"),
        "temporal_dt": (2.5e-2, "number"),
    },
    "euler": {
        "x_count": (129, "int"),
    },
    "output": {
        "dir": ("out", "str"),
        "figures": (True, "bool"),
        "deterministic": (True, "bool"),  # advisory: no RNG path exists
    },
    "debug": {
        "heating_factor": (1.0, "number"),
    },
}

_PROFILES: dict[str, dict[str, tuple]] = {
    "constant": {"rho": (1.0, "number"), "theta": (1.0, "number")},
    "sine-velocity": {
        "rho": (1.0, "number"),
        "theta": (1.0, "number"),
        "v_amp": (0.5, "number"),
        "mode": (1, "int"),
    },
    "vacuum-bump": {"theta": (1.0, "number"), "v_amp": (0.0, "number")},
    "mms": {"variant": ("neumann", "str")},
    "inline": {
        "rho0": (_REQUIRED, "number_list"),
        "v0": (_REQUIRED, "number_list"),
        "theta0": (_REQUIRED, "number_list"),
        "rho0_y": (None, "number_list_or_null"),
        "rho0_yy": (None, "number_list_or_null"),
        "theta0_y": (None, "number_list_or_null"),
        "theta0_yy": (None, "number_list_or_null"),
        "v0_y": (None, "number_list_or_null"),
        "v0_yy": (None, "number_list_or_null"),
    },
}

_BC_NAMES = {bc.value: bc for bc in ThetaBC}


def _check_kind(path: str, value, kind: str):
    def fail(expected):
        raise ConfigError(f"{path}: expected {expected}, got {value!r}")

    if kind == "number":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            fail("a number")
        return float(value)
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            fail("an integer")
        return int(value)
    if kind == "str":
        if not isinstance(value, str):
            fail("a string")
        return value
    if kind == "bool":
        if not isinstance(value, bool):
            fail("a boolean")
        return value
    if kind in ("number_list", "number_list_or_null"):
        if value is None and kind == "number_list_or_null":
            return None
        if not isinstance(value, list) or any(
                isinstance(x, bool) or not isinstance(x, (int, float)) for x in value):
            fail("a list of numbers" + (" or null" if kind.endswith("null") else ""))
        return [float(x) for x in value]
    raise AssertionError(f"unknown schema kind {kind}")


def _normalize_block(name: str, given: dict, schema: dict[str, tuple]) -> dict:
    if not isinstance(given, dict):
        raise ConfigError(f"{name}: expected an object, got {given!r}")
    for key in given:
        if key not in schema:
            raise ConfigError(f"unknown key {name}.{key}")
    out = {}
    for key, (default, kind) in schema.items():
        if key in given:
            out[key] = _check_kind(f"{name}.{key}", given[key], kind)
        elif default is _REQUIRED:
            raise ConfigError(f"missing required key {name}.{key}")
        else:
            out[key] = default
    return out


def normalize(doc: dict) -> dict:
    """Validate a raw document and fill in every default."""
    if not isinstance(doc, dict):
        raise ConfigError(f"top level must be an object, got {type(doc).__name__}")
    known = set(_SCHEMA) | {"bc", "initial"}
    for key in doc:
        if key not in known:
            raise ConfigError(f"unknown key {key}")
    out = {}
    for block, schema in _SCHEMA.items():
        out[block] = _normalize_block(block, doc.get(block, {}), schema)

    bc = doc.get("bc", "neumann-neumann")
    if not isinstance(bc, str) or bc not in _BC_NAMES:
        raise ConfigError(
            f"bc: expected one of {sorted(_BC_NAMES)}, got {bc!r}")
    out["bc"] = bc

    if not out["output"]["deterministic"]:
        raise ConfigError("output.deterministic: only deterministic runs "
                          "are supported (there is no RNG path)")
    if out["time"]["snapshot_times"] == []:
        raise ConfigError("time.snapshot_times: must be null (default: t_end) "
                          "or a non-empty list")

    initial = doc.get("initial", {"profile": "constant"})
    if not isinstance(initial, dict):
        raise ConfigError("initial: expected an object")
    profile = initial.get("profile", "constant")
    if not isinstance(profile, str) or profile not in _PROFILES:
        raise ConfigError(
            f"initial.profile: expected one of {sorted(_PROFILES)}, got {profile!r}")
    rest = {k: v for k, v in initial.items() if k != "profile"}
    norm = _normalize_block("initial", rest, _PROFILES[profile])
    norm["profile"] = profile
    out["initial"] = norm
    return out


@dataclass(eq=False)
class RunConfig:
    """Normalized configuration document plus typed builders."""

    doc: dict

    def echo(self) -> str:
        return json.dumps(self.doc, sort_keys=True, indent=2) + "\n"

    def params(self) -> PhysicalParams:
        try:
            return PhysicalParams(**self.doc["params"])
        except StructuralError as exc:
            raise ConfigError(str(exc)) from exc

    def grid(self) -> Grid:
        try:
            return Grid(self.doc["params"]["L"], self.doc["grid"]["N"])
        except StructuralError as exc:
            raise ConfigError(str(exc)) from exc

    def bc(self) -> ThetaBC:
        return _BC_NAMES[self.doc["bc"]]

    def scheme(self, ms: ManufacturedSolution | None = None) -> SchemeConfig:
        t = self.doc["time"]
        s = self.doc["scheme"]
        try:
            return SchemeConfig(
                dt_initial=t["dt_initial"], dt_min=t["dt_min"], dt_max=t["dt_max"],
                safety=t["safety"], J_floor=s["J_floor"],
                theta_negative_tolerance=s["theta_negative_tolerance"],
                variant=s["variant"],
                source_v=ms.source_v if ms else None,
                source_theta=ms.source_theta if ms else None,
                heating_factor=self.doc["debug"]["heating_factor"],
            )
        except StructuralError as exc:
            raise ConfigError(str(exc)) from exc

    def thresholds(self) -> AuditThresholds:
        return AuditThresholds(**self.doc["audit"])

    def t_end(self) -> float:
        t_end = self.doc["time"]["t_end"]
        if not (math.isfinite(t_end) and t_end > 0):
            raise ConfigError(f"time.t_end must be positive, got {t_end}")
        return t_end

    def snapshot_times(self) -> list[float]:
        times = self.doc["time"]["snapshot_times"]
        return [self.t_end()] if times is None else times

    def manufactured(self) -> ManufacturedSolution | None:
        if self.doc["initial"]["profile"] != "mms":
            return None
        variant = self.doc["initial"]["variant"]
        if variant == "neumann":
            return manufactured_neumann(self.params())
        if variant == "dirichlet":
            return manufactured_dirichlet(self.params())
        raise ConfigError(
            f"initial.variant: expected 'neumann' or 'dirichlet', got {variant!r}")

    def initial_data(self, grid: Grid) -> InitialData:
        return build_initial_data(self.doc["initial"], grid, self.params())

    def profile_builder(self):
        """Grid -> InitialData closure for the resolution studies."""
        initial = self.doc["initial"]
        params = self.params()
        if initial["profile"] == "inline":
            raise ConfigError("refinement studies need a resampleable profile, "
                              "not inline sample arrays")
        return lambda grid: build_initial_data(initial, grid, params)


def build_initial_data(initial: dict, grid: Grid, params: PhysicalParams) -> InitialData:
    """Sample a built-in profile (or adopt inline arrays) on the given grid."""
    profile = initial["profile"]
    n = grid.N
    zeros = np.zeros(n)
    if profile == "constant":
        return InitialData(
            rho0=np.full(n, initial["rho"]), v0=np.zeros(n + 1),
            theta0=np.full(n, initial["theta"]),
            rho0_y=zeros, rho0_yy=zeros, theta0_y=zeros, theta0_yy=zeros,
            v0_y=zeros, v0_yy=zeros)
    if profile == "sine-velocity":
        k = initial["mode"] * math.pi / grid.L
        amp = initial["v_amp"]
        v0 = amp * np.sin(k * grid.nodes)
        v0[0] = 0.0
        v0[-1] = 0.0
        return InitialData(
            rho0=np.full(n, initial["rho"]), v0=v0,
            theta0=np.full(n, initial["theta"]),
            rho0_y=zeros, rho0_yy=zeros, theta0_y=zeros, theta0_yy=zeros,
            v0_y=amp * k * np.cos(k * grid.centers),
            v0_yy=-amp * k * k * np.sin(k * grid.centers))
    if profile == "vacuum-bump":
        y = grid.centers
        L = grid.L
        rho0 = np.maximum(0.0, 1.0 - 4.0 * (y - 0.5 * L) ** 2 / L ** 2)
        amp = initial["v_amp"]
        k = math.pi / L
        v0 = amp * np.sin(k * grid.nodes)
        v0[0] = 0.0
        v0[-1] = 0.0
        return InitialData(
            rho0=rho0, v0=v0, theta0=np.full(n, initial["theta"]),
            rho0_y=-8.0 * (y - 0.5 * L) / L ** 2,
            rho0_yy=np.full(n, -8.0 / L ** 2),
            theta0_y=zeros, theta0_yy=zeros,
            v0_y=amp * k * np.cos(k * y),
            v0_yy=-amp * k * k * np.sin(k * y))
    if profile == "mms":
        variant = initial["variant"]
        ms = (manufactured_neumann(params) if variant == "neumann"
              else manufactured_dirichlet(params))
        return ms.initial_data(grid)
    if profile == "inline":
        arrays = {}
        for key in ("rho0", "v0", "theta0", "rho0_y", "rho0_yy",
                    "theta0_y", "theta0_yy", "v0_y", "v0_yy"):
            value = initial[key]
            arrays[key] = None if value is None else np.asarray(value, dtype=float)
        data = InitialData(**arrays)
        try:
            data.check_shapes(grid)
        except StructuralError as exc:
            raise ConfigError(f"initial: {exc}") from exc
        return data
    raise AssertionError(profile)


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate a configuration document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    cfg = RunConfig(doc=normalize(doc))
    # Surface range/combination errors now, not at run time.
    cfg.params()
    cfg.grid()
    cfg.scheme()
    cfg.thresholds()
    cfg.t_end()
    cfg.manufactured()
    return cfg


def load_config(path) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
