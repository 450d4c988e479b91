"""
tcrystal Main Entry Point
=========================

Runs configured experiments from the command line:
    tcrystal run --config configs/fig2a.yaml [--seed N] [--out DIR] [--workers K]
    tcrystal validate --config configs/fig2a.yaml
    python -m tcrystal ...

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure.
"""

import argparse
import logging
import sys
from datetime import datetime

from . import __version__, config

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def show_startup_banner(command: str):
    """Display the startup banner."""
    print("=" * 60)
    print(f"🔬 tcrystal {__version__} - emergent time periodicity in open qubit systems")
    print("=" * 60)
    print(f"⏰ Start Time: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")
    print(f"🎯 Command: {command}")
    print("=" * 60)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='tcrystal', description=__doc__.strip().splitlines()[0])
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    sub = parser.add_subparsers(dest='command', required=True)

    run = sub.add_parser('run', help='run an experiment and write CSV / JSON results')
    run.add_argument('--config', required=True, help='YAML experiment file')
    run.add_argument('--seed', type=int, default=None, help='override the master seed')
    run.add_argument('--out', default=None, help='output directory (default: $TCRYSTAL_OUT_DIR or results)')
    run.add_argument('--workers', type=int, default=None,
                     help="concurrent trajectories in sweeps (default: the config's workers, $TCRYSTAL_WORKERS or 1)")
    run.add_argument('--quiet', action='store_true', help='skip the banner')

    check = sub.add_parser('validate', help='check an experiment file without running it')
    check.add_argument('--config', required=True, help='YAML experiment file')
    return parser


def cmd_validate(args) -> int:
    from .experiment import validate

    report = validate(args.config)
    for warning in report.warnings:
        print(f"⚠️ {warning}")
    if not report.ok:
        for error in report.errors:
            print(f"❌ {error}")
        return EXIT_CONFIG
    print(f"✅ {args.config} is valid")
    return EXIT_OK


def cmd_run(args) -> int:
    from .experiment import load_config, validate
    from .launcher import ExperimentLauncher

    if not args.quiet:
        show_startup_banner(f"run {args.config}")
    print("\n🔍 Pre-flight checks...")
    print("-" * 30)
    report = validate(args.config)
    for warning in report.warnings:
        print(f"⚠️ {warning}")
    if not report.ok:
        for error in report.errors:
            print(f"❌ {error}")
        return EXIT_CONFIG
    print("✅ Configuration validated")

    cfg = load_config(args.config)
    manifest = ExperimentLauncher(cfg, out_dir=args.out, seed=args.seed, workers=args.workers).run()
    print(f"\n✅ {len(manifest['files'])} file(s) written in {manifest['wall_time_s']:.1f}s")
    return EXIT_OK


def main(argv=None) -> int:
    """Console entry point; returns the process exit code"""
    from .features.errors import ConfigError, NumericalError, TCrystalError

    logging.basicConfig(format=config.LOG_FORMAT, level=config.LOG_LEVEL)
    args = build_parser().parse_args(argv)
    try:
        if args.command == 'validate':
            return cmd_validate(args)
        return cmd_run(args)
    except ConfigError as e:
        print(f"\n❌ Invalid configuration: {e}")
        return EXIT_CONFIG
    except NumericalError as e:
        print(f"\n❌ Numerical failure: {e}")
        return EXIT_NUMERICAL
    except TCrystalError as e:
        print(f"\n❌ {type(e).__name__}: {e}")
        return EXIT_CONFIG
    except KeyboardInterrupt:
        print("\n👋 tcrystal stopped by user")
        return 130


if __name__ == "__main__":
    sys.exit(main())
