"""Command-line interface: run, validate, budget, demo."""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import ConfigError, RficancelError
from .harness import (PRESETS, ScenarioConfig, budget_bps, config_to_dict,
                      load_config, run_sweep, write_report_csv)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def _add_common(p: argparse.ArgumentParser, with_preset: bool = True) -> None:
    p.add_argument("config_file", nargs="?", help="scenario JSON file")
    p.add_argument("--config", dest="config_flag", help="scenario JSON file")
    if with_preset:
        p.add_argument("--preset", choices=sorted(PRESETS),
                       help="built-in scenario instead of a file")


def _resolve_config(args) -> ScenarioConfig:
    path = args.config_flag or args.config_file
    preset = getattr(args, "preset", None)
    if path and preset:
        raise ConfigError("give either a config file or --preset, not both")
    if preset:
        return PRESETS[preset]()
    if not path:
        raise ConfigError("no config file given (or use --preset)")
    return load_config(path)


def _apply_overrides(cfg: ScenarioConfig, args) -> ScenarioConfig:
    from dataclasses import replace

    if getattr(args, "trials", None) is not None:
        cfg = replace(cfg, trials=args.trials)
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, base_seed=args.seed)
    if getattr(args, "output", None):
        cfg = replace(cfg, output_path=args.output)
    return cfg


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("RFI_THREADS", "")
    return int(env) if env.isdigit() and int(env) > 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rficancel",
        description="Collaborative eigenspace-based interference cancellation sweeps")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a sweep and write trial CSV")
    _add_common(p_run)
    p_run.add_argument("--output", help="CSV output path (overrides config)")
    p_run.add_argument("--trials", type=int, help="trial count override")
    p_run.add_argument("--seed", type=int, help="base seed override")
    p_run.add_argument("--threads", type=int, default=None,
                       help="parallel trial workers (env RFI_THREADS as fallback)")

    p_val = sub.add_parser("validate", help="check a config and print it resolved")
    _add_common(p_val)

    p_bud = sub.add_parser("budget", help="print the eigenspace-sharing data rate")
    _add_common(p_bud)

    p_demo = sub.add_parser("demo", help="run the built-in desk-scale scenario")
    p_demo.add_argument("--output", default="demo.csv")
    p_demo.add_argument("--trials", type=int, default=None)
    p_demo.add_argument("--seed", type=int, default=None)
    p_demo.add_argument("--threads", type=int, default=None)
    return parser


def cli_main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            cfg = _resolve_config(args)
            print(json.dumps(config_to_dict(cfg), indent=2, default=str))
            return EXIT_OK

        if args.command == "budget":
            cfg = _resolve_config(args)
            bps = budget_bps(cfg)
            print(f"eigenspace sharing rate: {bps / 1e6:.2f} Mbps "
                  f"({bps:.0f} bits/s)")
            return EXIT_OK

        if args.command == "demo":
            cfg = _apply_overrides(PRESETS["desk"](), args)
            report = run_sweep(cfg, threads=_threads(args))
            write_report_csv(report, args.output)
            for axis, mean, median, std, n in report.aggregates:
                print(f"axis={axis} rqf_mean={mean:.6g} rqf_median={median:.6g} "
                      f"rqf_std={std:.3g} n={n}")
            print(f"wrote {args.output}")
            return EXIT_OK

        cfg = _apply_overrides(_resolve_config(args), args)
        cfg.validate()
        report = run_sweep(cfg, threads=_threads(args))
        write_report_csv(report, cfg.output_path)
        print(f"wrote {cfg.output_path} ({len(report.rows)} trial rows)")
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RficancelError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    raise SystemExit(cli_main())


if __name__ == "__main__":
    main()
