"""Command line: simulate, validate and run figure presets.

Exit codes: 0 success, 2 configuration error, 3 parameter-domain error,
4 numerical-invariant breach.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import yaml

from .config import ConfigError, config_to_dict, load_config, validate
from .presets import PRESETS, preset_config
from .runner import InvariantBreach, ParameterDomainError, run_experiment

EXIT_OK, EXIT_CONFIG, EXIT_DOMAIN, EXIT_INVARIANT = 0, 2, 3, 4


def _override(cfg, args):
    run = cfg.run
    if getattr(args, "seed", None) is not None:
        run = replace(run, master_seed=args.seed)
    if getattr(args, "realizations", None) is not None:
        run = replace(run, realizations=args.realizations)
    cfg = replace(cfg, run=run)
    validate(cfg)
    return cfg


def _run(cfg, args) -> int:
    table = run_experiment(cfg, workers=args.workers, out_dir=args.out)
    out = args.out if args.out is not None else cfg.output.directory
    print(f"{cfg.experiment}: {len(table.rows)} rows written to {out}/{cfg.output.figure_id}.csv")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gradient-dtc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def run_flags(sp):
        sp.add_argument("--workers", type=int, default=1, help="parallel worker processes")
        sp.add_argument("--out", default=None, help="output directory (overrides the config)")
        sp.add_argument("--seed", type=int, default=None, help="master seed (overrides the config)")

    sim = sub.add_parser("simulate", help="run an experiment config")
    sim.add_argument("config")
    run_flags(sim)

    val = sub.add_parser("validate", help="check a config without running it")
    val.add_argument("config")

    pre = sub.add_parser("presets", help="desk-scale figure presets")
    psub = pre.add_subparsers(dest="action", required=True)
    psub.add_parser("list", help="list preset ids")
    show = psub.add_parser("show", help="print a preset as a config file")
    show.add_argument("figure_id")
    prun = psub.add_parser("run", help="run a preset")
    prun.add_argument("figure_id")
    prun.add_argument("--realizations", type=int, default=None, help="override the realization count")
    run_flags(prun)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            cfg = load_config(args.config)
            n = len(cfg.grid_points())
            print(f"ok: {cfg.experiment}, {n} grid point(s) x {cfg.run.realizations} realization(s)")
            return EXIT_OK
        if args.command == "simulate":
            return _run(_override(load_config(args.config), args), args)
        if args.action == "list":
            for fid, entry in PRESETS.items():
                print(f"{fid:16s} {entry['description']}")
                print(f"{'':16s} desk scale: {entry['deviation']}")
            return EXIT_OK
        cfg = preset_config(args.figure_id)
        if args.action == "show":
            print(yaml.safe_dump(config_to_dict(cfg), sort_keys=False), end="")
            return EXIT_OK
        return _run(_override(cfg, args), args)
    except (ConfigError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ParameterDomainError as exc:
        print(f"parameter-domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except InvariantBreach as exc:
        print(f"numerical invariant breached: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
