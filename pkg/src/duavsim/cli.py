"""``duav-sim`` command line entry point."""

from __future__ import annotations

import argparse
import logging
import sys

from .config import (ConfigError, Scenario, Strategy, SweepSpec, apply_overrides, check,
                     expand_sweep, load_config, preset)
from .deployment import write_deployment_csv
from .engine import emit_csv, run_sweep, simulate_drop
from .spectrum import write_plan_csv

EXIT_OK, EXIT_CONFIG, EXIT_DEGENERATE = 0, 1, 2


def build_parser():
    p = argparse.ArgumentParser(prog="duav-sim", description="Secrecy-rate Monte Carlo for D2D-enabled UAV networks.")
    p.add_argument("--config", metavar="FILE",
                   help="flat TOML or JSON config; without it the desk-scale preset of --scenario is used")
    p.add_argument("--scenario", choices=[s.value for s in Scenario])
    p.add_argument("--strategy", choices=["new", "traditional", "both"], default="both")
    p.add_argument("--sweep", metavar="KEY=V1,V2,...")
    p.add_argument("--drops", type=int, metavar="N")
    p.add_argument("--seed", type=int, metavar="U64")
    p.add_argument("--out", metavar="FILE.csv", help="default: stdout")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", dest="overrides")
    p.add_argument("--dump-deployment", metavar="FILE", help="node positions of drop 0")
    p.add_argument("--dump-plan", metavar="FILE", help="spectrum plan of drop 0")
    p.add_argument("--workers", type=int, default=1, metavar="N")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def resolve_config(args):
    if args.config:
        cfg = load_config(args.config)
    elif args.scenario:
        cfg = preset(args.scenario, full_scale=False)
    else:
        raise ConfigError("either --config or --scenario is required")
    changes = {}
    if args.scenario:
        changes["scenario"] = Scenario(args.scenario)
    if args.drops is not None:
        changes["n_drops"] = args.drops
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        changes["master_seed"] = args.seed
    cfg = apply_overrides(cfg, args.overrides).with_(**changes)
    return check(cfg)


def _strategies(choice):
    if choice == "both":
        return [Strategy.TRADITIONAL, Strategy.NEW]
    return [Strategy(choice)]


def _dump(cfg, strategies, args):
    state = simulate_drop(cfg, strategies, 0)
    if args.dump_deployment:
        write_deployment_csv(state.deployment, args.dump_deployment)
    if args.dump_plan:
        if not state.plans:
            logging.getLogger("duav-sim").warning("drop 0 is degenerate, no plan to dump")
            return
        # with both strategies the new one is dumped, it carries the jammers
        write_plan_csv(state.plans[strategies[-1]], args.dump_plan)


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        sweep = SweepSpec.parse(args.sweep) if args.sweep else None
        first = cfg if sweep is None else expand_sweep(cfg, sweep)[0]
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
    except ConfigError as exc:
        print(f"duav-sim: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    strategies = _strategies(args.strategy)
    if args.dump_deployment or args.dump_plan:
        _dump(first, strategies, args)
    table = run_sweep(cfg, sweep, strategies, workers=args.workers)
    if args.out:
        emit_csv(table, args.out)
    else:
        emit_csv(table, sys.stdout)

    # a cell is fully degenerate when neither link had a single usable drop
    cells = {}
    for row in table:
        key = (row.sweep_value, row.strategy)
        cells[key] = cells.get(key, 0) + row.n_effective
    dead = [k for k, n in cells.items() if n == 0]
    for value, strategy in dead:
        print(f"duav-sim: all drops degenerate at {sweep.parameter_name if sweep else 'base'}"
              f"={value} ({strategy.value})", file=sys.stderr)
    return EXIT_DEGENERATE if dead else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
