"""Configuration files, presets and CLI overrides.

Files are TOML with sections mirroring the parameter tree. Keys ending in
``_hz`` are ordinary frequencies and are multiplied by 2*pi on load; all
other quantities are SI (``kappa`` and ``drive`` are rates in 1/s).
Precedence: ``--set`` override > config file > preset.
"""

from __future__ import annotations

import copy
import difflib
import hashlib
import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .core import CavityAxis, Geometry, MechanicalAxis, SystemParameters, validate
from .errors import ConfigError

PRESETS = ("fig3", "fig4")
SPEED_OF_LIGHT = 299792458.0
DEFAULT_CAVITY_LENGTH = 1e-3

_MECH = {"omega_hz": float, "gamma_hz": float, "r_osc": float}
_CAV = {
    "omega_c_hz": float,
    "detuning_hz": float,
    "kappa": float,
    "finesse": float,
    "length": float,
    "drive": float,
    "power": float,
}
SCHEMA = {
    "m1": float,
    "m2": float,
    "temperature": float,
    "geometry": {"d_x": float, "d_y": float, "x2_bar": float, "farfield_ratio": float},
    "mech_x": _MECH,
    "mech_y": _MECH,
    "cav_x": _CAV,
    "cav_y": _CAV,
    "run": {"grid": str, "control_range": str},
}


@dataclass(frozen=True)
class ResolvedConfig:
    params: SystemParameters
    run: dict
    defaults_used: dict
    tree: dict
    fingerprint: str
    source: str


def _suggest(key, options):
    close = difflib.get_close_matches(key, list(options), n=1)
    return f"; did you mean {close[0]!r}?" if close else ""


def _check_tree(tree, schema=SCHEMA, prefix=""):
    for key, value in tree.items():
        path = f"{prefix}{key}"
        if key not in schema:
            raise ConfigError(f"unknown key {path!r}{_suggest(key, schema)}")
        kind = schema[key]
        if isinstance(kind, dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{path!r} must be a section")
            _check_tree(value, kind, prefix=f"{path}.")
        elif kind is float:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{path!r} must be a number, got {type(value).__name__}")
        elif not isinstance(value, kind):
            raise ConfigError(f"{path!r} must be a {kind.__name__}, got {type(value).__name__}")


def _merge(base, top):
    out = copy.deepcopy(base)
    for key, value in top.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def parse_toml(text: str, name: str = "<config>") -> dict:
    try:
        tree = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {name}: {exc}") from None
    _check_tree(tree)
    return tree


def load_file(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_toml(text, str(path))


def load_preset(name: str) -> dict:
    if name in PRESETS:
        text = resources.files("gravprobe").joinpath("presets", f"{name}.toml").read_text()
        return parse_toml(text, f"preset {name}")
    if Path(name).is_file():
        return load_file(name)
    raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)} or give a file path")


def parse_override(item: str) -> tuple:
    """``"cav_y.length=1e-3"`` -> (("cav_y", "length"), 1e-3)."""
    if "=" not in item:
        raise ConfigError(f"override must look like key=value, got {item!r}")
    key, raw = (s.strip() for s in item.split("=", 1))
    path = tuple(key.split("."))
    schema = SCHEMA
    for i, part in enumerate(path):
        if not isinstance(schema, dict) or part not in schema:
            opts = schema if isinstance(schema, dict) else {}
            raise ConfigError(f"unknown key {'.'.join(path[: i + 1])!r}{_suggest(part, opts)}")
        schema = schema[part]
    if isinstance(schema, dict):
        raise ConfigError(f"{key!r} is a section, not a value")
    if schema is float:
        try:
            value = float(raw)
        except ValueError:
            raise ConfigError(f"{key!r} must be a number, got {raw!r}") from None
    else:
        value = raw
    return path, value


def _apply_override(tree, path, value):
    node = tree
    for part in path[:-1]:
        node = node.setdefault(part, {})
    node[path[-1]] = value


def _require(tree, path):
    node = tree
    for part in path:
        if not isinstance(node, dict) or part not in node:
            raise ConfigError(f"missing required field {'.'.join(path)!r}")
        node = node[part]
    return node


def _fill_defaults(tree):
    """Insert documented defaults in place and report which were used."""
    used = {}
    tree.setdefault("geometry", {})
    tree["geometry"].setdefault("x2_bar", 0.0)
    tree["geometry"].setdefault("farfield_ratio", 1e3)
    for axis in ("x", "y"):
        mech = tree.setdefault(f"mech_{axis}", {})
        mech.setdefault("r_osc", 0.0)
        cav = tree.setdefault(f"cav_{axis}", {})
        if "length" not in cav:
            cav["length"] = DEFAULT_CAVITY_LENGTH
            used[f"cav_{axis}.length"] = DEFAULT_CAVITY_LENGTH
        if "detuning_hz" not in cav:
            cav["detuning_hz"] = _require(tree, (f"mech_{axis}", "omega_hz"))
            used[f"cav_{axis}.detuning_hz"] = cav["detuning_hz"]
    return used


def _cavity(sec, axis):
    two_pi = 2.0 * math.pi
    omega_c = two_pi * _require({"s": sec}, ("s", "omega_c_hz"))
    if ("kappa" in sec) == ("finesse" in sec):
        raise ConfigError(f"cav_{axis}: give exactly one of 'kappa' and 'finesse'")
    if ("drive" in sec) == ("power" in sec):
        raise ConfigError(f"cav_{axis}: give exactly one of 'drive' and 'power'")
    length = float(sec["length"])
    if "kappa" in sec:
        kappa = float(sec["kappa"])
    else:
        # amplitude decay rate: half the angular linewidth FSR/F
        kappa = math.pi * SPEED_OF_LIGHT / (2.0 * length * float(sec["finesse"]))
    return CavityAxis(
        omega_c=omega_c,
        detuning=two_pi * float(sec["detuning_hz"]),
        kappa=kappa,
        length=length,
        drive=float(sec["drive"]) if "drive" in sec else None,
        power=float(sec["power"]) if "power" in sec else None,
    )


def build_params(tree: dict) -> SystemParameters:
    """Turn a (defaults-filled) config tree into validated parameters."""
    two_pi = 2.0 * math.pi
    geo = tree.get("geometry", {})
    mech = {}
    for axis in ("x", "y"):
        sec = tree.get(f"mech_{axis}", {})
        mech[axis] = MechanicalAxis(
            omega=two_pi * float(_require(tree, (f"mech_{axis}", "omega_hz"))),
            gamma=two_pi * float(_require(tree, (f"mech_{axis}", "gamma_hz"))),
            r_osc=float(sec.get("r_osc", 0.0)),
        )
    params = SystemParameters(
        m1=float(_require(tree, ("m1",))),
        m2=float(_require(tree, ("m2",))),
        temperature=float(_require(tree, ("temperature",))),
        geometry=Geometry(
            d_x=float(_require(tree, ("geometry", "d_x"))),
            d_y=float(_require(tree, ("geometry", "d_y"))),
            x2_bar=float(geo.get("x2_bar", 0.0)),
            farfield_ratio=float(geo.get("farfield_ratio", 1e3)),
        ),
        mech_x=mech["x"],
        mech_y=mech["y"],
        cav_x=_cavity(tree.get("cav_x", {}), "x"),
        cav_y=_cavity(tree.get("cav_y", {}), "y"),
    )
    return validate(params)


def fingerprint(tree: dict) -> str:
    canonical = json.dumps(tree, sort_keys=True, separators=(",", ":"), default=repr)
    return hashlib.sha256(canonical.encode()).hexdigest()


def resolve_config(
    preset: Optional[str] = None,
    config_path=None,
    overrides: Iterable[str] = (),
) -> ResolvedConfig:
    """Merge preset, file and overrides into validated parameters plus run options."""
    tree: dict = {}
    sources = []
    if preset is not None:
        tree = load_preset(preset)
        sources.append(f"preset:{preset}")
    if config_path is not None:
        tree = _merge(tree, load_file(config_path))
        sources.append(f"file:{config_path}")
    for item in overrides:
        path, value = parse_override(item)
        _apply_override(tree, path, value)
        sources.append(f"set:{item}")
    if not tree:
        raise ConfigError("no configuration given: use a preset or a config file")
    _check_tree(tree)
    used = _fill_defaults(tree)
    params = build_params(tree)
    run = dict(tree.get("run", {}))
    return ResolvedConfig(
        params=params,
        run=run,
        defaults_used=used,
        tree=tree,
        fingerprint=fingerprint(tree),
        source=" ".join(sources),
    )


def preset_params(name: str) -> SystemParameters:
    return resolve_config(preset=name).params
