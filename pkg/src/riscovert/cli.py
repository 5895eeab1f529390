"""Command-line front end: reproducible scenario runs and artifact emission.

Subcommands::

    riscovert run       --scenario 1 --methods scsi-mp --delta 0.05 --trials 500
    riscovert validate
    riscovert pattern   --scenario 4 --methods scsi-mp scsi-ct
    riscovert trace     --scenario 1 --methods scsi-mp
    riscovert scenarios

`run` emits one rate-curve CSV per method, one convergence-trace CSV per
method, one radiation-pattern CSV per surface-bearing method, and a
manifest recording the resolved configuration hash, seed and library
version.  All floats are serialized with 17 significant digits, so
identical configurations produce byte-identical files.  Options may also
be supplied in a TOML file (``--config``); command-line flags win.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .errors import ConfigError, RiscovertError
from .optimizer import OptimizerConfig
from .scenarios import (METHODS, alice_specular_angle, build_scenario,
                        evaluate_method, convergence_trace, prepare_method,
                        radiation_pattern, ris_geometry, scenario_table)
from .validation import run_checks

_METHOD_ALIASES = {m: m for m in METHODS}
_METHOD_ALIASES.update({"all": "all", "wo_ris": "wo-ris", "scsi_mp": "scsi-mp",
                        "scsi_ct": "scsi-ct", "soa_mp": "soa-mp"})

_DEFAULT_DELTAS = (0.02, 0.05, 0.1, 0.15, 0.2, 0.3)


@dataclass
class RunConfig:
    """Resolved run configuration (scenario id, methods, grid, seeds, outputs)."""

    scenario: int = 1
    methods: tuple = METHODS
    delta_grid: tuple = _DEFAULT_DELTAS
    trials: int = 500
    seed: int = 0
    out_dir: str = "out"
    full_scale: bool = False
    pattern_points: int = 721
    scenario_overrides: dict = field(default_factory=dict)
    optimizer: dict = field(default_factory=dict)

    def validate(self):
        if self.scenario not in (1, 2, 3, 4):
            raise ConfigError("scenario", f"id {self.scenario} not in 1..4")
        if self.trials < 1:
            raise ConfigError("trials", "must be >= 1")
        grid = tuple(float(d) for d in self.delta_grid)
        if not grid:
            raise ConfigError("delta", "at least one covertness level is required")
        for d in grid:
            if not (0.0 < d < 1.0):
                raise ConfigError("delta", f"value {d} outside (0, 1)")
        if any(b >= a for a, b in zip(grid[1:], grid)):
            raise ConfigError("delta", "grid must be strictly increasing")
        methods = []
        for name in self.methods:
            key = _METHOD_ALIASES.get(str(name).lower())
            if key is None:
                raise ConfigError("methods", f"unknown method '{name}'")
            if key == "all":
                methods = list(METHODS)
                break
            methods.append(key)
        self.methods = tuple(dict.fromkeys(methods))
        self.delta_grid = grid
        try:
            self.optimizer_config = OptimizerConfig(**self.optimizer)
        except (TypeError, ValueError) as exc:
            raise ConfigError("optimizer", str(exc)) from None
        return self


def _load_toml(path):
    try:
        import tomllib
    except ImportError:  # python < 3.11
        import tomli as tomllib
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _config_from(args) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        data = _load_toml(args.config)
        run_section = data.get("run", {})
        known = {"scenario", "methods", "delta", "trials", "seed", "out",
                 "full_scale", "pattern_points"}
        for key in run_section:
            if key not in known:
                raise ConfigError(f"run.{key}", "unknown configuration key")
        cfg.scenario = run_section.get("scenario", cfg.scenario)
        cfg.methods = tuple(run_section.get("methods", cfg.methods))
        cfg.delta_grid = tuple(run_section.get("delta", cfg.delta_grid))
        cfg.trials = run_section.get("trials", cfg.trials)
        cfg.seed = run_section.get("seed", cfg.seed)
        cfg.out_dir = run_section.get("out", cfg.out_dir)
        cfg.full_scale = run_section.get("full_scale", cfg.full_scale)
        cfg.pattern_points = run_section.get("pattern_points", cfg.pattern_points)
        cfg.scenario_overrides = dict(data.get("scenario_overrides", {}))
        cfg.optimizer = dict(data.get("optimizer", {}))
    if getattr(args, "scenario", None) is not None:
        cfg.scenario = args.scenario
    if getattr(args, "methods", None):
        cfg.methods = tuple(args.methods)
    if getattr(args, "delta", None):
        cfg.delta_grid = tuple(args.delta)
    if getattr(args, "trials", None) is not None:
        cfg.trials = args.trials
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "out", None) is not None:
        cfg.out_dir = args.out
    if getattr(args, "full_scale", False):
        cfg.full_scale = True
    return cfg.validate()


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _curve_rows(method, points):
    for p in points:
        yield (method, _fmt(p.delta), _fmt(p.mean_rate), _fmt(p.ci_halfwidth),
               _fmt(p.p_a), _fmt(p.p_w), _fmt(p.empirical_dep))


def _trace_rows(trace):
    for rec in trace:
        yield (str(rec.iteration), _fmt(rec.ratio), _fmt(rec.p_b), _fmt(rec.p_w),
               _fmt(rec.p_b_direct), _fmt(rec.p_b_ris), _fmt(rec.p_w_direct),
               _fmt(rec.p_w_ris), _fmt(rec.delta_norm), _fmt(rec.epsilon),
               str(int(rec.ris_accepted)), str(int(rec.precoder_accepted)))


_CURVE_HEADER = ("method", "delta", "mean_rate", "ci", "p_a", "p_w", "empirical_dep")
_TRACE_HEADER = ("iteration", "ratio", "p_b", "p_w", "p_b_direct", "p_b_ris",
                 "p_w_direct", "p_w_ris", "delta_norm", "epsilon",
                 "ris_accepted", "precoder_accepted")
_PATTERN_HEADER = ("angle_rad", "gain_db")


def _thread_cap():
    cap = os.environ.get("RIS_COVERT_THREADS")
    if not cap:
        return None
    try:
        from threadpoolctl import threadpool_limits
        return threadpool_limits(limits=int(cap))
    except (ImportError, ValueError):
        return None


def _config_digest(cfg: RunConfig) -> str:
    payload = asdict(cfg)
    payload.pop("optimizer_config", None)
    return hashlib.sha256(
        json.dumps(payload, sort_keys=True, default=str).encode()).hexdigest()


def cmd_run(args) -> int:
    cfg = _config_from(args)
    os.makedirs(cfg.out_dir, exist_ok=True)
    sc = build_scenario(cfg.scenario, cfg.full_scale, cfg.scenario_overrides)
    files = []
    for method in cfg.methods:
        ev = evaluate_method(sc, method, cfg.delta_grid, cfg.trials, cfg.seed,
                             cfg.optimizer_config)
        curve_path = os.path.join(cfg.out_dir, f"curve_{method}.csv")
        _write_csv(curve_path, _CURVE_HEADER, _curve_rows(method, ev.points))
        files.append(curve_path)
        trace_path = os.path.join(cfg.out_dir, f"trace_{method}.csv")
        _write_csv(trace_path, _TRACE_HEADER, _trace_rows(ev.state.trace))
        files.append(trace_path)
        if method != "wo-ris":
            pattern_path = os.path.join(cfg.out_dir, f"pattern_{method}.csv")
            _write_pattern(sc, method, ev, cfg, pattern_path)
            files.append(pattern_path)
        print(f"{method}: ratio {ev.state.ratio:.6g}, "
              f"converged={ev.state.converged} "
              f"({ev.state.iteration} iterations)")
    manifest = {
        "config_sha256": _config_digest(cfg),
        "seed": cfg.seed,
        "version": __version__,
        "scenario": sc.name,
        "files": [os.path.basename(f) for f in files],
    }
    manifest_path = os.path.join(cfg.out_dir, "manifest.json")
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {len(files) + 1} files to {cfg.out_dir}")
    return 0


def _write_pattern(sc, method, ev, cfg, path):
    setup = prepare_method(sc, method)
    angles = np.linspace(0.002, np.pi - 0.002, cfg.pattern_points)
    gains = radiation_pattern(ris_geometry(sc), setup.hw_eval, ev.state.b.b,
                              setup.links_eval.s_matrix, ev.v, angles)
    rows = ((_fmt(a), _fmt(g)) for a, g in zip(angles, gains))
    _write_csv(path, _PATTERN_HEADER, rows)


def cmd_validate(args) -> int:
    results = run_checks()
    failures = 0
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"[{status}] {res.name}: {res.detail}")
        failures += 0 if res.passed else 1
    print(f"{len(results) - failures}/{len(results)} checks passed")
    return 1 if failures else 0


def cmd_pattern(args) -> int:
    cfg = _config_from(args)
    os.makedirs(cfg.out_dir, exist_ok=True)
    sc = build_scenario(cfg.scenario, cfg.full_scale, cfg.scenario_overrides)
    print(f"specular direction of the feed link: {alice_specular_angle(sc):.6f} rad")
    for method in cfg.methods:
        if method == "wo-ris":
            continue
        ev = evaluate_method(sc, method, cfg.delta_grid[:1], trials=2,
                             seed=cfg.seed, cfg=cfg.optimizer_config)
        path = os.path.join(cfg.out_dir, f"pattern_{method}.csv")
        _write_pattern(sc, method, ev, cfg, path)
        print(f"wrote {path}")
    return 0


def cmd_trace(args) -> int:
    cfg = _config_from(args)
    os.makedirs(cfg.out_dir, exist_ok=True)
    sc = build_scenario(cfg.scenario, cfg.full_scale, cfg.scenario_overrides)
    for method in cfg.methods:
        trace, state = convergence_trace(sc, method, cfg.seed, cfg.optimizer_config)
        path = os.path.join(cfg.out_dir, f"trace_{method}.csv")
        _write_csv(path, _TRACE_HEADER, _trace_rows(trace))
        print(f"{method}: {state.iteration} iterations, converged={state.converged}; "
              f"wrote {path}")
    return 0


def cmd_scenarios(args) -> int:
    print("id  alice_angle  bob_center  willie_center  d_alice  d_willie  "
          "d_bob  willie_width")
    for i, sc in enumerate(scenario_table(), start=1):
        print(f"{i:<3d} {sc.alice_angle:>11.6f} {sc.bob_center:>11.6f} "
              f"{sc.willie_center:>13.6f} {sc.alice_distance:>8.1f} "
              f"{sc.willie_distance:>9.1f} {sc.bob_distance:>6.1f} "
              f"{2 * sc.willie_halfwidth:>13.6f}")
    sc = scenario_table()[0]
    print(f"\ndefaults: carrier {sc.carrier / 1e9:.2f} GHz, surface "
          f"{sc.ris_cols}x{sc.ris_rows}, transmitter {sc.alice_cols}x{sc.alice_rows}, "
          f"dipoles {sc.dipole_length_wl}λ (radius {sc.dipole_radius_wl}λ), "
          f"noise floor {sc.noise_bob:.6g} (pass --full-scale for the full geometry)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riscovert",
        description="Covert-link design and evaluation with multiport "
                    "reconfigurable surfaces")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--scenario", type=int, help="scenario id (1..4)")
        p.add_argument("--config", help="TOML configuration file")
        p.add_argument("--methods", nargs="+",
                       help=f"methods to run: {', '.join(METHODS)} or 'all'")
        p.add_argument("--delta", type=float, action="append",
                       help="covertness level(s) in (0,1); repeatable")
        p.add_argument("--trials", type=int, help="Monte Carlo trials per point")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--out", help="output directory")
        p.add_argument("--full-scale", action="store_true", dest="full_scale",
                       help="use the full-size arrays instead of the desk scale")

    p_run = sub.add_parser("run", help="emit rate curves, traces and patterns")
    add_common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_val = sub.add_parser("validate", help="run the property-check battery")
    p_val.set_defaults(func=cmd_validate)

    p_pat = sub.add_parser("pattern", help="emit radiation-pattern CSVs")
    add_common(p_pat)
    p_pat.set_defaults(func=cmd_pattern)

    p_tr = sub.add_parser("trace", help="emit convergence-trace CSVs")
    add_common(p_tr)
    p_tr.set_defaults(func=cmd_trace)

    p_sc = sub.add_parser("scenarios", help="print the scenario catalogue")
    p_sc.set_defaults(func=cmd_scenarios)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    limiter = _thread_cap()
    try:
        if limiter is not None:
            with limiter:
                return args.func(args)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RiscovertError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
