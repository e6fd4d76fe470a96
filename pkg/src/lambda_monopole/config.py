"""Run configuration: defaults, dot-path overrides and schema validation."""

from __future__ import annotations

import copy
import json
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema

from .constants import CESIUM_MASS_KG, CASE1_ENERGY_J, CASE1_XI_AMPLITUDE
from .errors import ConfigError
from .fields import AtomConfig, BeamConfig, HarmonicTrap, NoTrap, SphericalTrap, TrapConfig
from .spectrum import GridSpec

FORMAT_VERSION = 1

# Blocks that describe one physical object are replaced wholesale by the user's
# block; task blocks are merged key by key onto the defaults.
_ATOMIC_BLOCKS = ("atom", "beam", "trap")

DEFAULTS: dict[str, Any] = {
    "seed": 0,
    "atom": {"mass_kg": CESIUM_MASS_KG, "energy_J": CASE1_ENERGY_J},
    "beam": {"xi": CASE1_XI_AMPLITUDE**2, "g": 1, "eta": 1.0, "k": 0.0, "delta": 0.0},
    "trap": {"variant": "none"},
    "fields": {"half_width": 1e-3, "n": 10},
    "gauge_map": {"radius": 1e-3, "n_theta": 12, "n_phi": 8, "include_kz": False},
    "flux": {"radii": [1e-4, 1e-3, 1e-2], "quadrature_order": 64, "n_phi": 128, "mode": "analytic"},
    "holonomy": {"radius": 1e-3, "thetas": [1.5707963267948966], "n_samples": 256},
    "harmonics": {"l_max": 4, "n_theta": 9, "n_phi": 8, "quadrature_order": 32},
    "spectrum": {
        "m_values": [-2, -1, 0, 1, 2],
        "n_rho_max": 2,
        "n_z_max": 1,
        "potential": "ApproxF",
        "n_eigs": 5,
        "refine_tol": None,
        "grid": {"n_rho": 512, "n_z": 512, "extent": 8.0},
    },
    "adiabatic": {
        "criterion": 1.0,
        "directions": [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, -1.0], [1.0, 0.0, 1.0]],
        "half_width": 1e-3,
        "n": 40,
    },
    "output": {"directory": "out"},
}


def schema() -> dict:
    text = resources.files(__package__).joinpath("config_schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in extra.items():
        if key in _ATOMIC_BLOCKS or not isinstance(value, dict) or not isinstance(out.get(key), dict):
            out[key] = copy.deepcopy(value)
        else:
            out[key] = _merge(out[key], value)
    return out


def _parse_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_override(cfg: dict, assignment: str) -> None:
    """Apply one ``dot.path=value`` override in place; the value is parsed as JSON when possible."""
    if "=" not in assignment:
        raise ConfigError(f"override {assignment!r} is not of the form key=value")
    path, raw = assignment.split("=", 1)
    keys = [k for k in path.strip().split(".") if k]
    if not keys:
        raise ConfigError(f"override {assignment!r} has an empty key")
    node = cfg
    for key in keys[:-1]:
        child = node.get(key)
        if child is None:
            child = node[key] = {}
        if not isinstance(child, dict):
            raise ConfigError(f"override path {path!r} runs through a non-object value")
        node = child
    node[keys[-1]] = _parse_value(raw)


def validate(cfg: dict) -> None:
    try:
        jsonschema.validate(cfg, schema())
    except jsonschema.ValidationError as exc:
        where = ".".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"invalid configuration at {where}: {exc.message}") from exc
    trap = cfg.get("trap", {})
    if trap.get("variant") == "spherical" and len(trap["radii"]) != len(trap["values"]):
        raise ConfigError("trap.radii and trap.values must have the same length")


def resolve(user: dict | None = None, overrides: list[str] | tuple[str, ...] = ()) -> dict:
    """Merge a user config onto the defaults, apply overrides and validate."""
    if user is not None and not isinstance(user, dict):
        raise ConfigError("configuration root must be a JSON object")
    validate(user or {})
    cfg = _merge(DEFAULTS, user or {})
    for assignment in overrides:
        apply_override(cfg, assignment)
    validate(cfg)
    return cfg


def load(path: str | Path | None, overrides: list[str] | tuple[str, ...] = ()) -> dict:
    if path is None:
        return resolve(None, overrides)
    try:
        user = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return resolve(user, overrides)


def build_atom(cfg: dict) -> AtomConfig:
    a = cfg["atom"]
    if "mass_kg" in a:
        return AtomConfig.from_si(a["mass_kg"], a.get("energy_J", 0.0))
    return AtomConfig(a["mass_over_hbar"], a.get("energy_rad_s", 0.0))


def build_beam(cfg: dict) -> BeamConfig:
    b = cfg["beam"]
    return BeamConfig(xi=b["xi"], g=b["g"], eta=b.get("eta", 1.0), k=b.get("k", 0.0), delta=b.get("delta", 0.0))


def build_trap(cfg: dict) -> TrapConfig:
    t = cfg["trap"]
    try:
        if t["variant"] == "harmonic":
            return HarmonicTrap(t["omega"], t["omega_z"], t["z0"])
        if t["variant"] == "spherical":
            return SphericalTrap(tuple(t["radii"]), tuple(t["values"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return NoTrap()


def build_grid(cfg: dict) -> GridSpec:
    g = cfg["spectrum"]["grid"]
    return GridSpec(n_rho=g.get("n_rho", 512), n_z=g.get("n_z", 512), extent=g.get("extent", 8.0))
