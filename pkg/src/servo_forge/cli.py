"""Command-line front end.

    servo-forge run scenario1 --mode ff+fb --out runs/s1
    servo-forge check --suite all
    servo-forge pose --features f1 ... f9 [--markers markers.json]

Exit codes: 0 success, 1 bad input/config, 2 unsettled run or failed check,
3 geometric failure (unreachable target, divergence, degenerate features).
``SERVO_FORGE_SEED`` is reserved for stochastic extensions and currently unused.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import replace

import numpy as np

from .checks import SUITES, run_suite
from .config import ConfigError, load_config
from .errors import (CollinearPoints, ServoError, SimDiverged, TargetUnreachable,
                     Unreachable, ZeroDisparity)
from .eye_in_hand import EihParameters, MarkerSet, estimate_joints, pose_from_features
from .plotting import FEATURE_LABELS, write_plots
from .se3 import compose
from .sim import FEEDBACK_ONLY, builtin_scenario, run_scenario

BUILTINS = ("scenario1", "scenario2")
EXIT_OK, EXIT_CONFIG, EXIT_UNSETTLED, EXIT_GEOMETRY = 0, 1, 2, 3

log = logging.getLogger("servo_forge")


def csv_header():
    cols = ["t"] + [f"q{i}" for i in range(1, 7)] + [f"qref{i}" for i in range(1, 7)]
    cols += list(FEATURE_LABELS)
    cols += [f"target_{c}" for c in FEATURE_LABELS]
    cols += [f"error_{c}" for c in FEATURE_LABELS]
    return cols


def write_timeseries(run, path):
    """RFC-4180 CSV; joint angles in degrees, features in mm, repr precision."""
    data = np.column_stack([run.t, np.degrees(run.q), np.degrees(run.q_ref), run.features,
                            run.feature_targets, run.feature_error])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(csv_header())
        for row in data:
            w.writerow([repr(float(x)) for x in row])


def _load_scenario(spec: str, mode, dt, duration):
    overrides = {}
    if dt is not None:
        overrides["dt"] = dt
    if duration is not None:
        overrides["duration"] = duration
    if spec in BUILTINS:
        return builtin_scenario(spec, mode or "ff+fb", **overrides), EihParameters()
    cfg, params = load_config(spec, mode)
    if overrides:
        cfg = replace(cfg, **overrides)
    return cfg, params


def cmd_run(args) -> int:
    try:
        cfg, params = _load_scenario(args.scenario, args.mode, args.dt, args.duration)
    except (ConfigError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        run, summary = run_scenario(cfg, params)
    except (TargetUnreachable, SimDiverged) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY

    tag = "fb" if cfg.mode == FEEDBACK_ONLY else "ff_fb"
    out = args.out or os.path.join("runs", f"{cfg.name}_{tag}")
    os.makedirs(out, exist_ok=True)
    write_timeseries(run, os.path.join(out, "timeseries.csv"))
    doc = summary.to_dict()
    doc["scenario"] = cfg.name
    with open(os.path.join(out, "summary.json"), "w") as fh:
        json.dump(doc, fh, indent=2)
    write_plots(run, out, title=f"{cfg.name} ({cfg.mode})")

    status = "converged" if summary.converged else "unsettled"
    ts = summary.settling_time
    print(f"{cfg.name} {cfg.mode}: {status}; settling "
          f"{'n/a' if ts == float('inf') else f'{ts:.4f} s'}; "
          f"max residual {summary.max_abs_residual:.3e} mm; outputs in {out}")
    return EXIT_OK if summary.converged else EXIT_UNSETTLED


def cmd_check(args) -> int:
    results = run_suite(args.suite)
    for r in results:
        print(f"{'PASS' if r.ok else 'FAIL'}  {r.name}  ({r.detail})")
    return EXIT_OK if all(r.ok for r in results) else EXIT_UNSETTLED


def _read_markers(path):
    if path is None:
        return MarkerSet()
    try:
        with open(path) as fh:
            return MarkerSet(np.array(json.load(fh), dtype=float))
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        if isinstance(exc, CollinearPoints):
            raise
        raise ConfigError(f"{path}: {exc}") from None


def cmd_pose(args) -> int:
    params = EihParameters()
    try:
        markers = _read_markers(args.markers)
        f = np.array(args.features, dtype=float)
        pose = pose_from_features(params.intr, f, markers)
        q = estimate_joints(params, f, markers)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ZeroDisparity, CollinearPoints, Unreachable, ServoError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY
    # tool_pose carries the tabulated n, s, a, d columns; camera_pose is the optical frame
    print(json.dumps({"camera_pose": pose.matrix.tolist(),
                      "tool_pose": compose(pose, params.t_ec).matrix.tolist(),
                      "joints_deg": np.degrees(q).tolist()}, indent=2))
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage errors are input errors (exit 1), not "unsettled" (2)
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="servo-forge",
                                description="Stereo eye-in-hand visual servo simulator")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="simulate a scenario")
    r.add_argument("scenario", help="scenario1, scenario2 or a JSON config path")
    r.add_argument("--mode", choices=["fb", "ff+fb"], default=None)
    r.add_argument("--out", default=None, help="output directory")
    r.add_argument("--dt", type=float, default=None, help="sample time [s]")
    r.add_argument("--duration", type=float, default=None, help="simulated time [s]")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("check", help="run built-in consistency checks")
    c.add_argument("--suite", choices=sorted(SUITES) + ["all"], default="all")
    c.set_defaults(func=cmd_check)

    q = sub.add_parser("pose", help="camera pose and joints from nine features")
    q.add_argument("--features", type=float, nargs=9, required=True, metavar="F")
    q.add_argument("--markers", default=None, help="JSON file with three [x, y, z] points (m)")
    q.set_defaults(func=cmd_pose)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
