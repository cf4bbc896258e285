"""Command-line entry point.

Subcommands:
    run              execute one search run from a JSON config
    validate-theory  emit the per-band gain-curve report
    bench            strategy x budget x seed comparison tables
    protocol-spec    print the external-bridge wire protocol
"""
import argparse
import json
import sys

from .config import ConfigError
from .protocol import protocol_spec_text
from .runner import bench, run, validate_theory


def _add_run(sub):
    p = sub.add_parser("run", help="execute one search run")
    p.add_argument("--config", required=True, help="path to the JSON run config")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--out", required=True, help="run output directory")


def _add_theory(sub):
    p = sub.add_parser("validate-theory", help="gain-curve spectral scaling report")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--size", type=int, default=64, help="grid side length (power of two)")
    p.add_argument("--bands", type=int, default=8)
    p.add_argument("--steps", type=int, default=400)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--amplitude", type=float, default=None,
                   help="data-spectrum amplitude (default: SNR-balanced)")
    p.add_argument("--out", required=True)


def _add_bench(sub):
    p = sub.add_parser("bench", help="strategy/budget/seed comparison")
    p.add_argument("--strategies", required=True, help="comma-separated, e.g. ses,bon")
    p.add_argument("--budgets", required=True, help="comma-separated, e.g. 200,400")
    p.add_argument("--seeds", type=int, required=True, help="number of seeds per cell")
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--config", default=None, help="common config JSON (optional)")
    p.add_argument("--out", required=True)


def main(argv=None):
    parser = argparse.ArgumentParser(prog="specevo")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_run(sub)
    _add_theory(sub)
    _add_bench(sub)
    sub.add_parser("protocol-spec", help="print the bridge wire protocol")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            with open(args.config, encoding="utf-8") as fh:
                raw = json.load(fh)
            if not isinstance(raw, dict):
                raise ConfigError("config must be a JSON object")
            if args.seed is not None:
                raw["seed"] = args.seed
            summary = run(raw, args.out)
            print(json.dumps(summary, sort_keys=True))
        elif args.command == "validate-theory":
            report = validate_theory(args.beta, args.size, args.bands, args.steps,
                                     args.out, seed=args.seed, amplitude=args.amplitude)
            print(json.dumps(report, sort_keys=True))
        elif args.command == "bench":
            common = {}
            if args.config:
                with open(args.config, encoding="utf-8") as fh:
                    common = json.load(fh)
            paths = bench(
                [s.strip() for s in args.strategies.split(",") if s.strip()],
                [int(b) for b in args.budgets.split(",")],
                args.seeds, common, args.out, base_seed=args.base_seed)
            print(json.dumps(paths, sort_keys=True))
        else:  # protocol-spec
            print(protocol_spec_text())
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
