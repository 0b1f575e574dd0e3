"""Command-line interface: ``gsigma <command> --config cfg.json [overrides]``."""
from __future__ import annotations

import argparse
import json
import sys

from .exceptions import ConfigError, GSigmaError
from .experiment import (EXAMPLE_CONFIG, EXIT_CONFIG, EXIT_NUMERIC, ExperimentConfig, run)
from .io import dumps

COMMANDS = {
    "verify": "run the residual checks; exit 4 if any fails",
    "solve": "build or solve the field and write it as JSON",
    "surface": "integrate the surface and write its nodes",
    "geometry": "write per-node metric and curvature CSV",
    "frame": "write moving frames and Gauss-Weingarten matrices",
    "export": "run every analysis listed in the config",
}


def _grid_arg(text):
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("expected nL,nR,hL,hR")
    try:
        return int(parts[0]), int(parts[1]), float(parts[2]), float(parts[3])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser():
    p = argparse.ArgumentParser(
        prog="gsigma",
        description="Grassmannian sigma-model solutions and their surfaces in su(N).")
    sub = p.add_subparsers(dest="command", required=True)
    for name, text in COMMANDS.items():
        s = sub.add_parser(name, help=text, description=text)
        s.add_argument("--config", help="experiment JSON (omit to print an example)")
        s.add_argument("--grid", type=_grid_arg, help="override grid: nL,nR,hL,hR")
        s.add_argument("--seed", type=int, help="override the random seed (unsigned 64-bit)")
        s.add_argument("--out", help="override the output directory")
        s.add_argument("--quiet", action="store_true", help="do not print the summary")
    return p


def load_config(args):
    if args.config is None:
        raise ConfigError("no --config given; example:\n" + dumps(EXAMPLE_CONFIG))
    try:
        with open(args.config) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return ExperimentConfig.from_dict(doc).override(args.grid, args.seed, args.out)


def _print_report(report):
    for g in report["grids"]:
        grid = g["grid"]
        print(f"grid {grid['nL']}x{grid['nR']}  h=({grid['hL']:.4g}, {grid['hR']:.4g})")
        for key in ("el_residual", "conservation_defect", "orthogonality", "closedness",
                    "K_max_abs", "H_norm_max", "K_discrepancy"):
            if g.get(key) is not None:
                print(f"  {key:<20} {g[key]:.3e}")
        if "regularity" in g:
            r = g["regularity"]
            print(f"  regularity           {r['status']} (det G in [{r['detG_min']:.3e}, {r['detG_max']:.3e}])")
        if "frame" in g:
            f = g["frame"]
            if "skipped" in f:
                print(f"  frame                skipped: {f['skipped']}")
            else:
                gcr = "n/a" if f["gcr_max"] is None else f"{f['gcr_max']:.3e}"
                print(f"  frame                {f['normal_count']} normals, Gram defect "
                      f"{f['gram_defect']:.1e}, GCR {gcr}")
    for t in report["convergence"]:
        orders = ", ".join(f"{o:.2f}" for o in t["pairwise_orders"])
        print(f"convergence {t['label']:<20} order {t['order']:.3f} (pairwise {orders})")
    for c in report.get("checks", []):
        print(f"{'PASS' if c['passed'] else 'FAIL'}  {c['check']}: {c['value']}  (bound {c['bound']})")


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args)
        result = run(config, args.command)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GSigmaError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if not args.quiet:
        _print_report(result.report)
        print(f"wrote {len(result.files)} files to {config.out}")
    return result.status


if __name__ == "__main__":
    sys.exit(main())
