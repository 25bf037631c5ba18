"""``a2g`` command line: figure-data sweeps, single solves and the validation suite.

Exit codes: 0 success, 1 computation failure, 2 config error, 3 validation failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from functools import partial

import numpy as np

from . import analytic as an
from . import montecarlo as mc_
from .channel import ENVIRONMENTS
from .config import ConfigError, altitude_grid, load_config, resolved_dict
from .field import main_lobe_edge_radius
from .numerics import NumericsError
from .validation import run_checks

SCHEMA_VERSION = 1
EXIT_OK, EXIT_COMPUTE, EXIT_CONFIG, EXIT_VALIDATION = 0, 1, 2, 3
COMMANDS = ("fig1-pmf", "fig2-zstar", "fig3-correlation", "fig4-caploss", "validate", "zstar")


def _sys_for(cfg, h=None, ratio=None):
    s = cfg.system
    if h is not None:
        s = replace(s, altitude_interferer=h)
    if ratio is not None:
        s = replace(s, gain_side=s.gain_main / ratio)
    return s


def _solve(cfg, s, env):
    """(z, status) for the configured exclusion radius policy."""
    fixed = cfg.sweep["z_star"]
    if fixed != "solve":
        return float(fixed), "fixed"
    try:
        return an.exclusion_radius(s, env, cfg.channel, cfg.numerics,
                                   cfg.sweep["convention"], cfg.sweep["ccdf_mode"]), "ok"
    except an.NoSolution as exc:
        return exc.z, exc.reason


def _nats(cfg, x):
    return x / math.log(2) if cfg.output["units"] == "bits" else x


# --- sweep points (top level so worker processes can pickle them) --------------

def fig1_point(cfg, use_mc, env_name, h):
    env = ENVIRONMENTS[env_name]
    s = _sys_for(cfg, h)
    edge = main_lobe_edge_radius(h, s.beam_width)
    z = edge if cfg.sweep["fig1_radius"] == "edge" else max(cfg.sweep["fig1_radius"], edge)
    law = an.signal_count_law(z, s, env, cfg.channel, cfg.numerics, cfg.sweep["ccdf_mode"])
    sample = None
    if use_mc:
        sample = mc_.estimate_signal_count_pmf(s, env, cfg.channel, z, cfg.montecarlo,
                                               cfg.numerics)
        # compare against the same annulus the simulation used
        law = an.signal_count_law(z, s, env, cfg.channel, cfg.numerics,
                                  cfg.sweep["ccdf_mode"], outer=sample.outer_radius)
    rows = []
    for v in law.support():
        row = {"environment": env_name, "altitude": h, "radius": z, "mean": law.mean,
               "v": int(v), "pmf": law.pmf(v), "cmf": law.cmf(v)}
        if use_mc:
            f = law.cmf(v)
            row["mc_cmf"] = float(sample.cmf_at(int(v)))
            row["mc_cmf_se"] = math.sqrt(f * (1 - f) / sample.n)
        rows.append(row)
    return rows


def fig2_point(cfg, use_mc, env_name, ratio, h):
    env = ENVIRONMENTS[env_name]
    s = _sys_for(cfg, h, ratio)
    z, status = _solve(cfg, s, env)
    return [{"environment": env_name, "gain_ratio": ratio, "altitude": h, "z_star": z,
             "mean_count_at_z": an.mean_signal_count(z, s, env, cfg.channel, cfg.numerics,
                                                     cfg.sweep["ccdf_mode"]),
             "status": status}]


def fig3_point(cfg, use_mc, env_name, ratio, h):
    env = ENVIRONMENTS[env_name]
    s = _sys_for(cfg, h, ratio)
    z, status = _solve(cfg, s, env)
    rep = an.correlation_coefficient(z, s, env, cfg.channel, cfg.numerics)
    row = {"environment": env_name, "gain_ratio": ratio, "altitude": h, "z_star": z,
           "rho": rep.rho, "lower_bound": rep.lower_bound, "upper_bound": rep.upper_bound,
           "w_los": rep.w_los, "w_nlos": rep.w_nlos, "status": status}
    if use_mc:
        outer = cfg.sweep["outer_factor"] * z
        mc = replace(cfg.montecarlo, outer_radius=outer)
        samples, _ = mc_.estimate_interference_vector(s, env, cfg.channel, z, mc, cfg.numerics)
        row["rho_window"] = an.correlation_coefficient(z, s, env, cfg.channel, cfg.numerics,
                                                       outer=outer).rho
        row["mc_rho_window"] = mc_.pearson(samples)
    return [row]


def fig4_point(cfg, use_mc, env_name, ratio, h):
    env = ENVIRONMENTS[env_name]
    s = _sys_for(cfg, h, ratio)
    z, status = _solve(cfg, s, env)
    rep = an.capacity_loss(z, s, env, cfg.channel, cfg.numerics)
    c0 = an.interference_free_rate(s, env, cfg.channel, cfg.numerics)
    row = {"environment": env_name, "gain_ratio": ratio, "altitude": h, "z_star": z,
           "delta_r": _nats(cfg, rep.delta_r), "rate_no_interference": _nats(cfg, c0),
           "loss_fraction": rep.delta_r / c0, "status": status}
    if use_mc:
        outer = cfg.sweep["outer_factor"] * z
        mc = replace(cfg.montecarlo, outer_radius=outer)
        est = mc_.estimate_capacity_loss(s, env, cfg.channel, z, mc, "common_interference",
                                         cfg.numerics)
        row["delta_r_window"] = _nats(cfg, an.capacity_loss(z, s, env, cfg.channel,
                                                            cfg.numerics, outer).delta_r)
        row["mc_delta_r_window"] = _nats(cfg, est.value)
        row["mc_se"] = _nats(cfg, est.std_error)
    return [row]


def _points(cfg, command):
    sw = cfg.sweep
    if command == "fig1-pmf":
        return fig1_point, [(e, h) for e in sw["fig1_environments"] for h in sw["fig1_altitudes"]]
    fn = {"fig2-zstar": fig2_point, "fig3-correlation": fig3_point,
          "fig4-caploss": fig4_point}[command]
    return fn, [(e, g, h) for e in sw["environments"] for g in sw["gain_ratios"]
                for h in altitude_grid(sw)]


def run_sweep(cfg, command, use_mc=False, workers=1):
    """Rows for a figure command, in sweep order regardless of ``workers``."""
    fn, points = _points(cfg, command)
    task = partial(_call, fn, cfg, use_mc)
    if workers > 1 and len(points) > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(task, points))
    else:
        results = [task(p) for p in points]
    return [row for rows in results for row in rows]


def _call(fn, cfg, use_mc, point):
    return fn(cfg, use_mc, *point)


def run_zstar(cfg):
    s, env = cfg.system, cfg.environment
    try:
        z = an.exclusion_radius(s, env, cfg.channel, cfg.numerics, cfg.sweep["convention"],
                                cfg.sweep["ccdf_mode"])
        status = "ok"
    except an.NoSolution as exc:
        z, status = exc.z, exc.reason
    return [{"environment": env.name, "gain_ratio": s.gain_ratio,
             "altitude": s.altitude_interferer, "convention": cfg.sweep["convention"],
             "target": an.exclusion_target(s.epsilon, cfg.sweep["convention"]),
             "z_star": z,
             "mean_count_at_z": an.mean_signal_count(z, s, env, cfg.channel, cfg.numerics,
                                                     cfg.sweep["ccdf_mode"]),
             "status": status}]


def run_validate(cfg):
    return [{"check": c.name, "status": c.status, "observed": c.observed,
             "tolerance": c.tolerance, "detail": c.detail} for c in run_checks(cfg)]


# --- output ---------------------------------------------------------------------

def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (np.integer,)):
        return str(int(x))
    return str(x)


def render(rows, cfg, fmt="csv"):
    params = resolved_dict(cfg)
    buf = io.StringIO()
    if fmt == "csv":
        buf.write(f"#schema={SCHEMA_VERSION}\n")
        buf.write("# " + json.dumps(params, sort_keys=True) + "\n")
        columns = list(rows[0]) if rows else []
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row.get(c, "")) for c in columns])
    else:
        buf.write(json.dumps({"schema": SCHEMA_VERSION}) + "\n")
        buf.write(json.dumps({"params": params}, sort_keys=True) + "\n")
        for row in rows:
            buf.write(json.dumps({k: _jsonval(v) for k, v in row.items()}) + "\n")
    return buf.getvalue()


def _jsonval(x):
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, np.integer):
        return int(x)
    return x


def build_parser():
    p = argparse.ArgumentParser(prog="a2g", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="INI config file")
    p.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                   help="override one config value (repeatable)")
    p.add_argument("--output", help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "jsonl"), help="output format")
    p.add_argument("--mc", action="store_true", help="add Monte Carlo columns")
    p.add_argument("--seed", type=int, help="Monte Carlo master seed")
    p.add_argument("--workers", type=int, default=1, help="sweep worker processes")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    overrides = list(args.set)
    if args.seed is not None:
        overrides.append(f"montecarlo.master_seed={args.seed}")
    if args.format:
        overrides.append(f"output.format={args.format}")
    try:
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        _error("config", exc)
        return EXIT_CONFIG

    try:
        if args.command == "validate":
            rows = run_validate(cfg)
        elif args.command == "zstar":
            rows = run_zstar(cfg)
        else:
            rows = run_sweep(cfg, args.command, args.mc, args.workers)
    except (NumericsError, an.NoSolution, an.DegenerateField, ValueError, FloatingPointError) as exc:
        _error("computation", exc)
        return EXIT_COMPUTE

    text = render(rows, cfg, cfg.output["format"])
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.command == "validate" and any(r["status"] != "pass" for r in rows):
        return EXIT_VALIDATION
    return EXIT_OK


def _error(kind, exc):
    record = {"error": kind, "type": type(exc).__name__, "message": str(exc)}
    sys.stderr.write(json.dumps(record) + "\n")


if __name__ == "__main__":
    sys.exit(main())
