#!/usr/bin/env python3
"""
chronon - finite quantum clock experiments
Command-line entry point: runs one named experiment and writes its artifacts.

    chronon <experiment> [--config FILE.json] [--out DIR] [--threads N] [--quiet] [--dry-run]

Exit codes: 0 pass, 1 a critical check failed, 2 configuration error.
"""

import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional

from config_manager import EXPERIMENTS, ConfigError, ConfigManager
from experiments import RUNNERS, ExperimentResult
from report_writer import ReportWriter
from run_checks import STATUS_EMOJI, RunChecker, default_threads

EXIT_CONFIG_ERROR = 2


class ChrononRun:
    """One experiment run: config, worker pool, verdict and artifacts."""

    def __init__(self, config: ConfigManager, quiet: bool = False):
        """Initialize the run.

        Args:
            config: Loaded configuration with the experiment selected
            quiet: Suppress per-check detail lines
        """
        self.config = config
        self.quiet = quiet
        self.experiment = config.get_experiment()
        self.out_dir = config.get_output_dir(self.experiment)
        self.threads = config.get_threads() or default_threads()

    def execute(self) -> ExperimentResult:
        """Run the experiment with grid points spread over a thread pool."""
        runner = RUNNERS[self.experiment]
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            return runner(self.config, pool.map)

    def write(self, result: ExperimentResult, verdict: Dict) -> bool:
        writer = ReportWriter(self.out_dir, dry_run=self.config.is_dry_run())
        ok = writer.write_all(result.tables, result.figures, result.summary,
                              svg=self.config.wants_svg())
        ok = writer.write_json("checks", verdict) and ok
        ok = writer.write_json("config", self.config.get_all()) and ok
        return ok

    def print_report(self, verdict: Dict):
        print(f"\n{'='*60}")
        print(f"CHRONON RUN - {self.experiment}")
        print(f"Time: {verdict['timestamp']}")
        print(f"Output: {self.out_dir}")
        print(f"Threads: {self.threads}")
        print(f"Overall Status: {verdict['overall_status'].upper()}")
        print(f"{'='*60}\n")

        for check_name, check_data in verdict['checks'].items():
            status_emoji = STATUS_EMOJI.get(check_data['status'], '❓')
            print(f"{status_emoji} {check_name.upper()}: {check_data['status']}")
            if self.quiet:
                continue
            for key, value in check_data['details'].items():
                print(f"   {key}: {value}")
            print()

    def run(self) -> int:
        result = self.execute()
        verdict = RunChecker(self.experiment).run(result.checks)
        written = self.write(result, verdict)
        self.print_report(verdict)
        if not written:
            print("Some artifacts could not be written")
        return RunChecker.exit_code(verdict)


def build_parser():
    import argparse

    parser = argparse.ArgumentParser(prog='chronon',
                                     description='Finite quantum clock experiments')
    parser.add_argument('experiment', choices=EXPERIMENTS,
                        help='Experiment to run')
    parser.add_argument('--config', type=Path, default=None,
                        help='JSON run configuration')
    parser.add_argument('--out', type=Path, default=None,
                        help='Output directory (default ./out/<experiment>-<timestamp>)')
    parser.add_argument('--threads', type=int, default=None,
                        help='Worker threads for grid points')
    parser.add_argument('--quiet', action='store_true',
                        help='Only print one line per check')
    parser.add_argument('--dry-run', action='store_true',
                        help='Print what would be written without writing')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point."""
    args = build_parser().parse_args(argv)

    try:
        if args.config is not None and not args.config.exists():
            raise ConfigError(f"{args.config}: no such file")
        config = ConfigManager(args.config)
        config.set_experiment(args.experiment)
        if args.out is not None:
            config.set_output_dir(args.out)
        if args.threads is not None:
            config.set_threads(args.threads)
        if args.dry_run:
            config.set_dry_run(True)
        return ChrononRun(config, quiet=args.quiet).run()
    except ConfigError as e:
        print(f"Error loading config: {e}")
        return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())
