"""Command line entry point: ``phyauth <command> --config FILE``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..errors import CalibrationError, CapabilityError, ConfigError, NumericalError
from .config import load_config
from .experiments import run_attack_sweep, run_auth_sweep, run_calibration, tabulate_bounds

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_CAPABILITY = 4


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="phyauth", description="Physical-layer authentication experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("auth-sweep", "detection / false-alarm sweep over Eb/N0"),
        ("attack-sweep", "ML key recovery or impersonation sweep"),
        ("bounds", "capacity and sphere-packing bound table"),
        ("calibrate", "detector thresholds per Eb/N0 point"),
    ):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", required=True, help="flat key=value config file")
        sp.add_argument("--seed", type=int, help="override master_seed")
        sp.add_argument("--trials", type=int, help="override trials")
        sp.add_argument("--out", help="write CSV here instead of stdout")
        sp.add_argument("--workers", type=int, help="override workers")
    return p


def run(args: argparse.Namespace) -> str:
    cfg = load_config(args.config).override(master_seed=args.seed, trials=args.trials,
                                            workers=args.workers)
    if args.command == "auth-sweep":
        return run_auth_sweep(cfg)
    if args.command == "attack-sweep":
        return run_attack_sweep(cfg)
    if args.command == "bounds":
        return tabulate_bounds(cfg.params.l_t, cfg.params.code_rate, cfg.sweep)
    return run_calibration(cfg)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        text = run(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, CalibrationError) as e:
        print(f"numerical error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except CapabilityError as e:
        print(f"capability error: {e}", file=sys.stderr)
        return EXIT_CAPABILITY
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
