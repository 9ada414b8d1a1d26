"""Run configuration: YAML (or JSON) text with a versioned schema.

``load_config`` returns the *resolved* configuration: a plain dict with every
default filled in. Dumping it and loading it again gives the same dict, and
every output file embeds it.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Any

import yaml

SCHEMA_VERSION = 1
UNITS = "T"


class ConfigError(ValueError):
    pass


def _num(section: dict, key: str, where: str, default=None, positive=False, allow_none=False):
    value = section.get(key, default)
    if value is None:
        if allow_none:
            return None
        raise ConfigError(f"{where}.{key}: required")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}.{key}: expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{where}.{key}: must be finite")
    if positive and value <= 0:
        raise ConfigError(f"{where}.{key}: must be positive, got {value!r}")
    return value


def _int(section: dict, key: str, where: str, default=None, minimum=None, allow_none=False):
    value = section.get(key, default)
    if value is None:
        if allow_none:
            return None
        raise ConfigError(f"{where}.{key}: required")
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where}.{key}: expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{where}.{key}: must be >= {minimum}, got {value}")
    return value


def _section(raw: dict, key: str, required=False) -> dict:
    value = raw.get(key)
    if value is None:
        if required:
            raise ConfigError(f"{key}: section required")
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"{key}: expected a mapping")
    return value


def _pulse(d: Any, where: str) -> dict:
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected a mapping")
    shape = d.get("shape", "gaussian")
    if shape not in ("gaussian", "flattop", "tabulated"):
        raise ConfigError(f"{where}.shape: unknown shape {shape!r}")
    out = {
        "shape": shape,
        "omega0": _num(d, "omega0", where),
        "t0": _num(d, "t0", where, 0.0),
        "width": _num(d, "width", where, 1.0, positive=True),
    }
    if out["omega0"] < 0:
        raise ConfigError(f"{where}.omega0: must be non-negative")
    if shape == "flattop":
        out["duration"] = _num(d, "duration", where, 0.0)
    if shape == "tabulated":
        s = d.get("samples")
        if not (isinstance(s, list) and len(s) == 2 and len(s[0]) == len(s[1]) >= 2):
            raise ConfigError(f"{where}.samples: expected [offsets, values] of equal length >= 2")
        out["samples"] = [[float(v) for v in s[0]], [float(v) for v in s[1]]]
    return out


def _schedule(d: dict) -> dict:
    pulses = d.get("pulses", [])
    rotations = d.get("rotations", [])
    if not isinstance(pulses, list) or not isinstance(rotations, list):
        raise ConfigError("schedule: pulses and rotations must be lists")
    out = {
        "pulses": [_pulse(p, f"schedule.pulses[{i}]") for i, p in enumerate(pulses)],
        "rotations": [],
    }
    for i, r in enumerate(rotations):
        where = f"schedule.rotations[{i}]"
        if not isinstance(r, dict):
            raise ConfigError(f"{where}: expected a mapping")
        sub = r.get("subspace", [0, 1])
        if not (isinstance(sub, list) and len(sub) == 2 and all(isinstance(v, int) for v in sub)):
            raise ConfigError(f"{where}.subspace: expected two integers")
        out["rotations"].append(
            {"t": _num(r, "t", where), "subspace": sub, "angle": _num(r, "angle", where, math.pi / 2)}
        )
    if d.get("window") is not None:
        w = d["window"]
        if not (isinstance(w, list) and len(w) == 2):
            raise ConfigError("schedule.window: expected [t_start, t_end]")
        out["window"] = [float(w[0]), float(w[1])]
    return out


def _grid(d: Any, where: str, default: dict) -> Any:
    if d is None:
        d = default
    if isinstance(d, list):
        return [float(v) for v in d]
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected a list or {{start, stop, num}}")
    return {
        "start": _num(d, "start", where),
        "stop": _num(d, "stop", where),
        "num": _int(d, "num", where, minimum=1),
    }


def _state(value, where: str):
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected an index or state name")
    if isinstance(value, int):
        return value
    if value in ("product_down", "product_up", "W_low", "W_high", "GHZ"):
        return value
    raise ConfigError(f"{where}: expected an index or state name, got {value!r}")


def resolve(raw: dict) -> dict:
    """Validate a raw mapping and fill in defaults."""
    if not isinstance(raw, dict):
        raise ConfigError("config: expected a mapping at top level")
    version = raw.get("version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"version: unsupported schema version {version!r}")
    units = raw.get("units", UNITS)
    if units != UNITS:
        raise ConfigError(f"units: only the pulse-width convention {UNITS!r} is supported")
    known = {"version", "units", "system", "schedule", "initial_state", "simulate", "spectrum",
             "scan", "minarea", "route", "ghz", "map", "output", "seed"}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown section")

    cfg: dict = {"version": SCHEMA_VERSION, "units": UNITS}
    system = _section(raw, "system")
    if system or "map" not in raw:
        cfg["system"] = {
            "N": _int(system, "N", "system", 4, minimum=1),
            "xi": _num(system, "xi", "system", 20.0, positive=True),
            "A": _num(system, "A", "system", 5.0, positive=True),
        }
    cfg["schedule"] = _schedule(_section(raw, "schedule"))
    cfg["initial_state"] = _state(raw.get("initial_state", 0), "initial_state")

    sim = _section(raw, "simulate")
    cfg["simulate"] = {
        "tol": _num(sim, "tol", "simulate", 1e-10, positive=True),
        "sample_spacing": _num(sim, "sample_spacing", "simulate", None, positive=True, allow_none=True),
    }
    spec = _section(raw, "spectrum")
    N = cfg.get("system", {}).get("N", 4)
    tau = cfg.get("system", {}).get("xi", 20.0) / cfg.get("system", {}).get("A", 5.0)
    cfg["spectrum"] = {
        "t_grid": _grid(spec.get("t_grid"), "spectrum.t_grid", {"start": -N * tau, "stop": N * tau, "num": 401})
    }
    if "scan" in raw:
        scan = _section(raw, "scan")
        cfg["scan"] = {
            "pulse": _pulse(scan.get("pulse", {"omega0": 50.0}), "scan.pulse"),
            "t0_grid": _grid(scan.get("t0_grid"), "scan.t0_grid", {"start": -16.0, "stop": 4.0, "num": 101}),
            "initial_state": _state(scan.get("initial_state", cfg["initial_state"]), "scan.initial_state"),
        }
    if "minarea" in raw:
        ma = _section(raw, "minarea")
        n_list = ma.get("N_list", [2, 4, 8])
        if not (isinstance(n_list, list) and n_list and all(isinstance(n, int) and n >= 2 for n in n_list)):
            raise ConfigError("minarea.N_list: expected a non-empty list of integers >= 2")
        if n_list != sorted(n_list):
            raise ConfigError("minarea.N_list: must be sorted")
        cfg["minarea"] = {
            "xi": _num(ma, "xi", "minarea", 20.0, positive=True),
            "A": _num(ma, "A", "minarea", 10.0, positive=True),
            "N_list": n_list,
            "width": _num(ma, "width", "minarea", 1.0, positive=True),
            "target_efficiency": _num(ma, "target_efficiency", "minarea", 0.9, positive=True),
            "resolution": _num(ma, "resolution", "minarea", 0.01, positive=True),
            "tol": _num(ma, "tol", "minarea", 1e-9, positive=True),
        }
    if "route" in raw:
        rt = _section(raw, "route")
        strategy = rt.get("strategy", "shortest")
        if strategy not in ("shortest", "sequential", "direct", "N_invariant", "wide"):
            raise ConfigError(f"route.strategy: unknown strategy {strategy!r}")
        cfg["route"] = {
            "source": _int(rt, "source", "route", 0, minimum=0),
            "target": _int(rt, "target", "route", N, minimum=0),
            "strategy": strategy,
            "max_order": _int(rt, "max_order", "route", None, minimum=1, allow_none=True),
            "require_N_invariant": bool(rt.get("require_N_invariant", False)),
            "omega0": _num(rt, "omega0", "route", None, allow_none=True),
            "width": _num(rt, "width", "route", None, positive=True, allow_none=True),
        }
    if "ghz" in raw:
        g = _section(raw, "ghz")
        cfg["ghz"] = {
            "pulse": _pulse(g.get("pulse", {"omega0": 60.0}), "ghz.pulse"),
            "rotation_time": _num(g, "rotation_time", "ghz", None, allow_none=True),
        }
    if "map" in raw:
        mp = _section(raw, "map")
        platform = mp.get("platform")
        if platform == "ion_trap":
            d = mp.get("ion_trap") or {}
            cfg["map"] = {
                "platform": platform,
                "ion_trap": {k: _num(d, k, "map.ion_trap") for k in ("eta", "omega_laser", "nu", "delta")},
            }
        elif platform == "bec":
            d = mp.get("bec") or {}
            cfg["map"] = {
                "platform": platform,
                "bec": {k: _num(d, k, "map.bec") for k in ("E_a", "E_b", "U_aa", "U_bb", "U_ab")},
            }
        else:
            raise ConfigError(f"map.platform: expected 'ion_trap' or 'bec', got {platform!r}")
        cfg["map"]["N"] = _int(mp, "N", "map", N, minimum=1)
        cfg["map"]["A"] = _num(mp, "A", "map", 5.0, positive=True)
    out = _section(raw, "output")
    fmt = out.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"output.format: expected csv or json, got {fmt!r}")
    cfg["output"] = {"format": fmt}
    cfg["seed"] = raw.get("seed")
    return cfg


def parse_config(text: str) -> dict:
    try:
        raw = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
        raise ConfigError(f"{where}: {exc.problem}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(str(exc)) from None
    return resolve(raw if raw is not None else {})


def load_config(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    return parse_config(text)


def dump_config(cfg: dict) -> str:
    return yaml.safe_dump(cfg, sort_keys=True)
