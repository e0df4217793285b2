"""Command line entry point: ``riskbandit run|bounds|validate <config>``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .harness import ExperimentConfig, OutputError, policy_bounds, build_policy, run_experiment
from .risk_measures import ConfigError

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


def _load(path, args=None):
    try:
        config = ExperimentConfig.load(path)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    if args is not None:
        if args.seed is not None:
            config.base_seed = args.seed
        if args.replications is not None:
            config.replications = args.replications
        if args.out is not None:
            config.output = args.out
    return config


def cmd_run(args):
    config = _load(args.config, args)
    summary = run_experiment(config, threads=args.threads, out_dir=config.output)
    for entry in summary["policies"]:
        agg = entry["aggregates"]
        final = agg["mean"][-1] if agg["mean"] else float("nan")
        print(f"{entry['policy']:>12s}  mean final regret {final:.4g}")
    print(f"outputs written to {config.output}")
    return EXIT_OK


def cmd_bounds(args):
    config = _load(args.config)
    instance = config.validate()
    report = []
    for spec in config.policies:
        policy = build_policy(spec, instance, config)
        report.append({
            "policy": spec.key,
            "bounds": [b.to_dict() for b in policy_bounds(spec, policy, instance, config.horizon)],
        })
    print(json.dumps(report, indent=2))
    return EXIT_OK


def cmd_validate(args):
    config = _load(args.config)
    instance = config.validate()
    print(f"ok: {instance.n_arms} arms, measure {instance.measure.name}, best arm {instance.best_arm}, "
          f"{len(config.policies)} policies, n={config.horizon}, R={config.replications}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="riskbandit", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate the configured experiment and write outputs")
    run.add_argument("config")
    run.add_argument("--out", metavar="DIR")
    run.add_argument("--seed", type=int, metavar="U64")
    run.add_argument("--replications", type=int, metavar="R")
    run.add_argument("--threads", type=int, default=1, metavar="T")
    run.set_defaults(func=cmd_run)

    b = sub.add_parser("bounds", help="print the theoretical regret bounds only")
    b.add_argument("config")
    b.set_defaults(func=cmd_bounds)

    v = sub.add_parser("validate", help="check a config file without running it")
    v.add_argument("config")
    v.set_defaults(func=cmd_validate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OutputError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
