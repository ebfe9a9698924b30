"""JSON run configuration: schema, validation, hashing and object construction."""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import numpy as np

from .dipole import CooperativeResponse, cooperative_response
from .errors import ConfigError
from .params import (ArrayGeometry, DriveProfile, TrapParams, build_lattice,
                     gaussian_profile, trap_from_depth, trap_from_frequency, uniform_profile)

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_POS_INT = {"type": "integer", "minimum": 1}


def _obj(props, required=(), **extra):
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False, **extra}


SCHEMA = _obj({
    "lattice": _obj({"nx": _POS_INT, "ny": _POS_INT, "a_over_lambda": _POS},
                    ["nx", "ny", "a_over_lambda"]),
    "atom": _obj({"recoil_over_gamma": _POS}, ["recoil_over_gamma"]),
    "trap": {
        "type": "object",
        "properties": {"nu_over_gamma": _POS, "depth_over_recoil": _POS,
                       "trap_length_over_lambda": _POS},
        "additionalProperties": False,
        "oneOf": [
            {"required": ["nu_over_gamma"],
             "not": {"anyOf": [{"required": ["depth_over_recoil"]},
                               {"required": ["trap_length_over_lambda"]}]}},
            {"required": ["depth_over_recoil", "trap_length_over_lambda"],
             "not": {"required": ["nu_over_gamma"]}},
        ],
    },
    "drive": _obj({
        "kind": {"enum": ["uniform", "gaussian"]},
        "rabi_over_gamma": {"type": "number", "minimum": 0},
        "waist_over_lambda": _POS,
        "detuning_over_linewidth": _NUM,
        "sides": {"enum": ["left", "two-sided"]},
        "phase": _NUM,
    }, ["kind", "rabi_over_gamma", "detuning_over_linewidth"]),
    "cooperative": _obj({
        "linewidth": {"enum": ["infinite", "uniform_mode", "central"]},
        "shift_method": {"enum": ["uniform_mode", "central"]},
    }),
    "detection": _obj({
        "k_perp": {"type": "array", "minItems": 1,
                   "items": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}},
        "omega": _obj({"span_over_nu": _POS, "num": {"type": "integer", "minimum": 2},
                       "refine_over_alpha": {"type": "number", "minimum": 0},
                       "refine_num": {"type": "integer", "minimum": 2}}),
        "squeezing": _obj({
            "scheme": {"enum": ["near_perfect", "general", "balanced"]},
            "half_width_over_alpha": _POS,
            "num": {"type": "integer", "minimum": 3},
            "bandwidth_window_over_nu": _POS,
            "bandwidth_num": {"type": "integer", "minimum": 3},
        }),
        "k_scan": _obj({"num": {"type": "integer", "minimum": 2},
                        "omega_offset_over_alpha": _NUM,
                        "edge_fraction": {"type": "number", "exclusiveMinimum": 0, "maximum": 1}}),
    }),
    "oracle": _obj({
        "dt": _POS, "n_steps": _POS_INT, "n_ensemble": _POS_INT,
        "burn_in": {"type": "integer", "minimum": 0},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "record_every": _POS_INT,
        "noise_factorization": {"enum": ["eigen", "cholesky"]},
        "relaxation_times": _POS,
        "nperseg": {"type": "integer", "minimum": 8},
    }),
    "output": _obj({
        "directory": {"type": "string"},
        "formats": {"type": "array", "items": {"enum": ["csv", "json", "trajectories"]}},
    }),
}, ["lattice", "atom", "trap", "drive"])


def _line_of(text: str, path) -> str:
    """Best-effort line number of the innermost key on ``path``."""
    keys = [p for p in path if isinstance(p, str)]
    if not keys or text is None:
        return ""
    needle = f'"{keys[-1]}"'
    for i, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return f" (line {i})"
    return ""


def validate(cfg: dict, text: str | None = None) -> dict:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        msgs = []
        for e in errors:
            where = "/".join(str(p) for p in e.absolute_path) or "<root>"
            msg = e.message
            if e.validator == "oneOf" and list(e.absolute_path) == ["trap"]:
                msg = ("trap needs exactly one of 'nu_over_gamma' or the pair "
                       "'depth_over_recoil' + 'trap_length_over_lambda'")
            msgs.append(f"{where}{_line_of(text, e.absolute_path)}: {msg}")
        raise ConfigError("invalid configuration:\n  " + "\n  ".join(msgs))
    drive = cfg["drive"]
    if drive["kind"] == "gaussian" and "waist_over_lambda" not in drive:
        raise ConfigError("drive/waist_over_lambda: required for a gaussian drive")
    return cfg


def load_config(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return validate(cfg, text)


def canonical_json(cfg: dict) -> str:
    return json.dumps(cfg, sort_keys=True, separators=(",", ":"))


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(canonical_json(cfg).encode()).hexdigest()[:16]


def set_path(cfg: dict, dotted: str, value) -> dict:
    """Return a copy of ``cfg`` with ``a.b.c`` set to ``value``."""
    out = copy.deepcopy(cfg)
    node = out
    keys = dotted.split(".")
    for k in keys[:-1]:
        if k not in node or not isinstance(node[k], dict):
            node[k] = {}
        node = node[k]
    node[keys[-1]] = value
    return out


@dataclass(frozen=True)
class Build:
    geometry: ArrayGeometry
    trap: TrapParams
    drive: DriveProfile
    coop: CooperativeResponse


def build(cfg: dict) -> Build:
    lat, trap_cfg, drv = cfg["lattice"], cfg["trap"], cfg["drive"]
    geom = build_lattice(lat["nx"], lat["ny"], lat["a_over_lambda"])
    recoil = cfg["atom"]["recoil_over_gamma"]
    if "nu_over_gamma" in trap_cfg:
        trap = trap_from_frequency(trap_cfg["nu_over_gamma"], recoil)
    else:
        trap = trap_from_depth(trap_cfg["depth_over_recoil"],
                               trap_cfg["trap_length_over_lambda"], recoil)
    coop_cfg = cfg.get("cooperative", {})
    coop = cooperative_response(geom, coop_cfg.get("linewidth", "infinite"),
                                coop_cfg.get("shift_method", "uniform_mode"))
    sides = drv.get("sides", "left")
    if drv["kind"] == "gaussian":
        if sides != "left":
            raise ConfigError("drive/sides: a gaussian drive is single-sided")
        drive = gaussian_profile(geom, drv["waist_over_lambda"], drv["rabi_over_gamma"],
                                 drv["detuning_over_linewidth"])
    else:
        omega = drv["rabi_over_gamma"] * np.exp(1j * drv.get("phase", 0.0)) \
            if sides == "left" else drv["rabi_over_gamma"]
        drive = uniform_profile(geom, omega, drv["detuning_over_linewidth"], sides,
                                drv.get("phase", 0.0) if sides == "two-sided" else 0.0)
    return Build(geom, trap, drive, coop)
