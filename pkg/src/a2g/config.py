"""INI configuration with dotted-path overrides.

Sections mirror the parameter types::

    [environment]   name = sub-urban        (or name = custom, phi = ..., psi_env = ...)
    [channel]       alpha_los, alpha_nlos, k_los, k_nlos, m_los, m_nlos
    [system]        lambda_per_km2, tx_power, gain_main, gain_side | gain_ratio, ...
    [numerics]      NumericsConfig fields
    [montecarlo]    n_realizations, master_seed, outer_radius (auto | metres), ...
    [sweep]         altitude range, environments, gain ratios, solver conventions
    [output]        format (csv | jsonl), units (nats | bits)

Unknown sections or keys are errors.
"""
from __future__ import annotations

import configparser
import copy
import math
from dataclasses import dataclass

import numpy as np

from .channel import ENVIRONMENTS, ChannelParams, Environment
from .field import SystemParams, per_km2
from .montecarlo import McConfig
from .numerics import NumericsConfig


class ConfigError(ValueError):
    pass


def _float(s):
    return float(s)


def _int(s):
    f = float(s)
    if not f.is_integer():
        raise ValueError(f"{s!r} is not an integer")
    return int(f)


def _float_or_auto(s):
    return None if str(s).strip().lower() in ("auto", "none", "") else float(s)


def _float_or_none(s):
    return None if str(s).strip().lower() in ("none", "") else float(s)


def _float_or_edge(s):
    return "edge" if str(s).strip().lower() == "edge" else float(s)


def _float_or_solve(s):
    return "solve" if str(s).strip().lower() == "solve" else float(s)


def _str_list(s):
    if isinstance(s, (list, tuple)):
        return [str(x) for x in s]
    return [x.strip() for x in str(s).split(",") if x.strip()]


def _float_list(s):
    if isinstance(s, (list, tuple)):
        return [float(x) for x in s]
    return [float(x) for x in _str_list(s)]


def _choice(*options):
    def parse(s):
        s = str(s).strip()
        if s not in options:
            raise ValueError(f"{s!r} not in {options}")
        return s
    return parse


SCHEMA = {
    "environment": {"name": str, "phi": _float_or_none, "psi_env": _float_or_none},
    "channel": {"alpha_los": _float, "alpha_nlos": _float, "k_los": _float, "k_nlos": _float,
                "m_los": _float, "m_nlos": _float},
    "system": {"lambda_per_km2": _float, "tx_power": _float, "gain_main": _float,
               "gain_side": _float, "gain_ratio": _float_or_none,
               "altitude_interferer": _float, "altitude_support": _float,
               "beam_width": _float, "sensitivity": _float, "noise_power": _float,
               "n_antennas": _int, "epsilon": _float},
    "numerics": {"quad_rel_tol": _float, "quad_abs_tol": _float, "root_tol": _float,
                 "max_subdivisions": _int, "max_root_iterations": _int,
                 "tail_rel_tol": _float, "max_doublings": _int},
    "montecarlo": {"n_realizations": _int, "master_seed": _int,
                   "outer_radius": _float_or_auto, "tail_rel_tol": _float,
                   "batch_size": _int, "workers": _int},
    "sweep": {"altitude_min": _float, "altitude_max": _float, "altitude_points": _int,
              "environments": _str_list, "gain_ratios": _float_list,
              "fig1_environments": _str_list, "fig1_altitudes": _float_list,
              "fig1_radius": _float_or_edge, "z_star": _float_or_solve,
              "convention": _choice("paper", "protective"),
              "ccdf_mode": _choice("exact", "paper_bound"),
              "outer_factor": _float},
    "output": {"format": _choice("csv", "jsonl"), "units": _choice("nats", "bits")},
}

_sp, _ch, _nc, _mc = SystemParams(), ChannelParams(), NumericsConfig(), McConfig()

DEFAULTS = {
    "environment": {"name": "sub-urban", "phi": None, "psi_env": None},
    "channel": {k: getattr(_ch, k) for k in SCHEMA["channel"]},
    "system": {
        "lambda_per_km2": 1e-3, "tx_power": _sp.tx_power, "gain_main": _sp.gain_main,
        "gain_side": _sp.gain_side, "gain_ratio": None,
        "altitude_interferer": _sp.altitude_interferer,
        "altitude_support": _sp.altitude_support, "beam_width": _sp.beam_width,
        "sensitivity": _sp.sensitivity, "noise_power": _sp.noise_power,
        "n_antennas": _sp.n_antennas, "epsilon": _sp.epsilon,
    },
    "numerics": {k: getattr(_nc, k) for k in SCHEMA["numerics"]},
    "montecarlo": {k: getattr(_mc, k) for k in SCHEMA["montecarlo"]},
    "sweep": {
        "altitude_min": 100.0, "altitude_max": 3000.0, "altitude_points": 30,
        "environments": ["high-rise", "dense-urban", "urban", "sub-urban"],
        "gain_ratios": [2500.0, 500.0, 100.0, 12.5],
        "fig1_environments": ["high-rise", "sub-urban"],
        "fig1_altitudes": [300.0, 1000.0],
        "fig1_radius": "edge",
        "z_star": "solve",
        "convention": "paper",
        "ccdf_mode": "exact",
        "outer_factor": 1.5,
    },
    "output": {"format": "csv", "units": "nats"},
}
del _sp, _ch, _nc, _mc


@dataclass(frozen=True)
class Config:
    """Fully resolved parameters.  ``raw`` is the typed nested dict they came from."""

    environment: Environment
    channel: ChannelParams
    system: SystemParams
    numerics: NumericsConfig
    montecarlo: McConfig
    sweep: dict
    output: dict
    raw: dict

    def with_system(self, **changes):
        from dataclasses import replace
        return replace(self, system=replace(self.system, **changes))


def _apply(raw, section, key, value, origin):
    if section not in SCHEMA:
        raise ConfigError(f"{origin}: unknown section [{section}]")
    if key not in SCHEMA[section]:
        raise ConfigError(f"{origin}: unknown key {section}.{key}")
    try:
        raw[section][key] = SCHEMA[section][key](value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{origin}: bad value for {section}.{key}: {exc}") from None


def load_config(path=None, overrides=(), text=None):
    """Defaults, then the INI file (``path`` or ``text``), then ``section.key=value`` overrides."""
    raw = copy.deepcopy(DEFAULTS)
    explicit_side = False
    explicit_ratio = False
    if path is not None or text is not None:
        parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
        try:
            if text is not None:
                parser.read_string(text)
            else:
                with open(path, encoding="utf-8") as fh:
                    parser.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        for section in parser.sections():
            for key, value in parser.items(section):
                _apply(raw, section, key, value, path or "<config>")
                explicit_side |= (section, key) == ("system", "gain_side")
                explicit_ratio |= (section, key) == ("system", "gain_ratio")
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override {item!r} is not of the form section.key=value")
        dotted, value = item.split("=", 1)
        section, key = dotted.strip().split(".", 1)
        _apply(raw, section, key, value.strip(), "--set")
        explicit_side |= (section, key) == ("system", "gain_side")
        explicit_ratio |= (section, key) == ("system", "gain_ratio")
    if explicit_side and explicit_ratio and raw["system"]["gain_ratio"] is not None:
        raise ConfigError("set either system.gain_side or system.gain_ratio, not both")
    return build(raw)


def build(raw):
    try:
        env_sec = raw["environment"]
        if env_sec["name"] in ENVIRONMENTS:
            if env_sec["phi"] is not None or env_sec["psi_env"] is not None:
                raise ConfigError("phi/psi_env may only be set with environment.name = custom")
            env = ENVIRONMENTS[env_sec["name"]]
        elif env_sec["name"] == "custom":
            if env_sec["phi"] is None or env_sec["psi_env"] is None:
                raise ConfigError("custom environment needs phi and psi_env")
            env = Environment(env_sec["phi"], env_sec["psi_env"], "custom")
        else:
            raise ConfigError(f"unknown environment {env_sec['name']!r}")
        ch = ChannelParams(**raw["channel"])
        s = dict(raw["system"])
        ratio = s.pop("gain_ratio")
        if ratio is not None:
            if not ratio > 1:
                raise ConfigError("system.gain_ratio must exceed 1")
            s["gain_side"] = s["gain_main"] / ratio
        s["lambda_density"] = per_km2(s.pop("lambda_per_km2"))
        sys = SystemParams(**s)
        num = NumericsConfig(**raw["numerics"])
        mc = McConfig(**raw["montecarlo"])
        sweep = dict(raw["sweep"])
        for name in sweep["environments"] + sweep["fig1_environments"]:
            if name not in ENVIRONMENTS:
                raise ConfigError(f"unknown environment {name!r} in sweep")
        if not sweep["altitude_points"] >= 1 or not 0 < sweep["altitude_min"] <= sweep["altitude_max"]:
            raise ConfigError("altitude sweep range is empty")
        if not sweep["gain_ratios"] or any(not g > 1 for g in sweep["gain_ratios"]):
            raise ConfigError("sweep.gain_ratios must be a nonempty list of ratios > 1")
        if not sweep["outer_factor"] > 1:
            raise ConfigError("sweep.outer_factor must exceed 1")
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None
    return Config(env, ch, sys, num, mc, sweep, dict(raw["output"]), raw)


def altitude_grid(sweep):
    n = sweep["altitude_points"]
    if n == 1:
        return [sweep["altitude_min"]]
    grid = np.geomspace(sweep["altitude_min"], sweep["altitude_max"], n)
    return [float(h) for h in grid]


def resolved_dict(cfg):
    """JSON-ready resolved parameters, including derived linear values."""
    raw = copy.deepcopy(cfg.raw)
    raw["resolved"] = {
        "environment": {"name": cfg.environment.name, "phi": cfg.environment.phi,
                        "psi_env": cfg.environment.psi_env},
        "gain_side": cfg.system.gain_side,
        "lambda_per_m2": cfg.system.lambda_density,
    }
    return _jsonable(raw)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj
