#!/usr/bin/env python3
import argparse
import json
import logging
import os
import sys

import numpy as np

# Add the parent directory to the path so we can import the package
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from oto_clock.acceptance import run_acceptance
from oto_clock.config import Config
from oto_clock.errors import ConfigError, OtoClockError
from oto_clock.experiments import (
    EXPERIMENTS,
    FORMATS,
    ExperimentConfig,
    apply_overrides,
    config_for_preset,
    list_presets,
    load_config,
    run_experiment,
    write_result,
)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def setup_logging(debug=False):
    """Configure logging based on debug flag."""
    level = logging.DEBUG if debug or Config.DEBUG else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    )


def build_config(args):
    """Config file, then preset defaults, then flags on top."""
    if args.config:
        config = load_config(args.config)
    elif args.preset:
        config = config_for_preset(args.preset, args.experiment)
    else:
        config = ExperimentConfig(experiment=args.experiment or 'protocol')
    return apply_overrides(config, preset=args.preset if args.config else None,
                           experiment=args.experiment, seed=args.seed, out=args.out,
                           fmt=args.format, L=args.L)


def run_command(args):
    """Run one experiment and write its result file."""
    try:
        config = build_config(args)
        record = run_experiment(config, threads=args.threads)
        path = write_result(record, config)
    except ConfigError as e:
        print(f"❌ Invalid configuration: {e}")
        return EXIT_CONFIG
    except (OtoClockError, np.linalg.LinAlgError) as e:
        print(f"❌ Numerical failure in '{args.experiment or 'experiment'}': {e}")
        return EXIT_NUMERICAL

    print(f"✅ {record.experiment}: {len(record.rows)} rows written to {path}")
    print(f"  🔑 Config hash: {record.config_hash}")
    print(f"  🎲 Seed: {record.seed}")
    print(f"  ⏱️ Runtime: {record.runtime_seconds:.2f}s")
    return EXIT_OK


def verify_command(args):
    """Run the acceptance suite and print one line per criterion."""
    mode = "quick" if args.quick else "full"
    print(f"🔬 Running acceptance suite ({mode} profile)...")
    results = run_acceptance(quick=args.quick, seed=args.seed, threads=args.threads)

    for i, result in enumerate(results):
        mark = "✅" if result.passed else "❌"
        print(f"  {mark} {i+1}. {result.name} ({result.seconds:.1f}s)")
        print(f"      {result.detail}")

    failed = [r for r in results if not r.passed]
    if failed:
        print(f"❌ {len(failed)} of {len(results)} criteria failed")
        return EXIT_VERIFY_FAILED
    print(f"✅ All {len(results)} criteria passed")
    return EXIT_OK


def presets_command(args):
    """List the named parameter sets."""
    entries = list_presets()
    if args.json:
        print(json.dumps(entries, indent=2, sort_keys=True))
        return EXIT_OK

    print(f"📋 {len(entries)} presets available:")
    for entry in entries:
        print(f"\n  📦 {entry['name']} ({entry['kind']} model, default experiment: {entry['experiment']})")
        for key, value in sorted(entry['params'].items()):
            print(f"      {key}: {value}")
    return EXIT_OK


def main(argv=None):
    parser = argparse.ArgumentParser(
        description="oto-clock CLI - quantum-clock OTOC experiments and acceptance checks",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Reproduce the dimer spectra
  ./main_cli.py run --preset fig6_dimer --experiment spectra

  # Switch-error sweep on the disordered chain, as JSON
  ./main_cli.py run --preset fig4_chain --experiment switch_sweep --L 8 --format json

  # Run an experiment file with a different seed
  ./main_cli.py run --config experiment_sample.json --seed 7

  # Acceptance suite with reduced sample counts
  ./main_cli.py verify --quick

  # Show the named parameter sets
  ./main_cli.py presets list
        """
    )

    parser.add_argument('--debug', action='store_true', help='Enable debug logging')

    subparsers = parser.add_subparsers(dest='command', help='Sub-command help')

    # Run command
    run_parser = subparsers.add_parser('run', help='Run one experiment')
    run_parser.add_argument('--config', type=str, help='JSON experiment file')
    run_parser.add_argument('--preset', type=str, help='Named parameter set (see "presets list")')
    run_parser.add_argument('--experiment', type=str, choices=EXPERIMENTS, help='Experiment kind')
    run_parser.add_argument('--seed', type=int, help='Seed for ensembles and random states')
    run_parser.add_argument('--out', type=str, help='Output file path')
    run_parser.add_argument('--format', type=str, choices=FORMATS, help='Output format')
    run_parser.add_argument('--threads', type=int, help='Worker threads (default: OTO_CLOCK_THREADS)')
    run_parser.add_argument('--L', type=int, help='Heisenberg chain length')

    # Verify command
    verify_parser = subparsers.add_parser('verify', help='Run the acceptance suite')
    verify_parser.add_argument('--quick', action='store_true', help='Reduced sample counts')
    verify_parser.add_argument('--seed', type=int, help='Seed for randomized checks')
    verify_parser.add_argument('--threads', type=int, help='Worker threads (default: OTO_CLOCK_THREADS)')

    # Presets command
    presets_parser = subparsers.add_parser('presets', help='Inspect named parameter sets')
    presets_sub = presets_parser.add_subparsers(dest='presets_command')
    list_parser = presets_sub.add_parser('list', help='List presets')
    list_parser.add_argument('--json', action='store_true', help='Print as JSON')

    args = parser.parse_args(argv)
    setup_logging(args.debug)

    if args.command == 'run':
        return run_command(args)
    elif args.command == 'verify':
        return verify_command(args)
    elif args.command == 'presets' and args.presets_command == 'list':
        return presets_command(args)
    else:
        parser.print_help()
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
