#!/usr/bin/env python3
"""
Command-line interface for the CPHD tracker
"""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from config import RunConfig
from exceptions import ConfigError, TrackingError
from main import TrackingPipeline

DEFAULT_CONFIG = "config.yaml"


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config", "-c",
        default=DEFAULT_CONFIG,
        help="Configuration file path (default: config.yaml, built-in defaults if absent)"
    )
    common.add_argument("--seed", type=int, help="Scenario seed (overrides config)")
    common.add_argument("--out", "-o", help="Output directory (overrides config)")
    common.add_argument("--p-d", type=float, dest="p_d", help="Detection probability (overrides config)")
    common.add_argument("--cutoff-c", type=float, dest="cutoff_c", help="OSPA cutoff c (overrides config)")
    common.add_argument("--order-l", type=float, dest="order_l", help="OSPA order, 'inf' allowed (overrides config)")
    common.add_argument("--verbose", "-v", action="store_true", help="Enable verbose logging (DEBUG level)")

    parser = argparse.ArgumentParser(
        description="CPHD Organelle Tracker - clutter-free GM-CPHD tracking toolkit",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python cli.py simulate --seed 7             # Write truth.csv and detections.csv
  python cli.py track                         # Track data/detections.csv
  python cli.py evaluate --cutoff-c 30        # OSPA of data/tracks.csv against data/truth.csv
  python cli.py analyze --tracks data/truth.csv
  python cli.py monte-carlo --runs 50
        """
    )
    commands = parser.add_subparsers(dest="command", required=True)

    commands.add_parser("simulate", parents=[common], help="Generate a synthetic scenario")

    track = commands.add_parser("track", parents=[common], help="Run the filter over a detections file")
    track.add_argument("--detections", help="Detections CSV (default: <out>/detections.csv)")

    evaluate = commands.add_parser("evaluate", parents=[common], help="OSPA of tracks against truth")
    evaluate.add_argument("--truth", help="Truth CSV (default: <out>/truth.csv)")
    evaluate.add_argument("--tracks", help="Tracks CSV (default: <out>/tracks.csv)")

    analyze = commands.add_parser("analyze", parents=[common], help="Acceleration normality test")
    analyze.add_argument("--tracks", help="Tracks CSV (default: <out>/tracks.csv)")

    monte_carlo = commands.add_parser("monte-carlo", parents=[common], help="Seeded simulate/track/evaluate runs")
    monte_carlo.add_argument("--runs", type=int, default=50, help="Number of seeded runs (default: 50)")

    return parser


def load_config(args) -> RunConfig:
    """Read the config file and apply command-line overrides."""
    config_path = Path(args.config)
    if config_path.exists():
        config = RunConfig.load(str(config_path))
    elif args.config == DEFAULT_CONFIG:
        config = RunConfig.from_mapping({})
    else:
        raise ConfigError(f"Configuration file '{args.config}' not found")

    return config.override(
        seed=args.seed,
        output_directory=args.out,
        p_d=args.p_d,
        ospa_cutoff=args.cutoff_c,
        ospa_order=args.order_l,
        log_level="DEBUG" if args.verbose else None,
    )


def run_command(pipeline: TrackingPipeline, args) -> None:
    if args.command == "simulate":
        summary = pipeline.simulate()
        print(f"✓ Simulated {summary['tracks']} tracks over {summary['steps']} steps")
        print(f"  Detections: {summary['detections']} ({summary['empty_frames']} empty frames)")

    elif args.command == "track":
        summary = pipeline.track(args.detections)
        print(f"✓ Tracked {summary['frames']} frames in {summary['seconds']:.2f} s")
        print(f"  Tracks: {summary['tracks']}, peak components: {summary['max_components']}")
        print(f"  Mass/cardinality consistency: {summary['consistency_rate'] * 100:.1f}%")

    elif args.command == "evaluate":
        summary = pipeline.evaluate(args.truth, args.tracks)
        print(f"OSPA (c={summary['cutoff_c']:g}, l={summary['order_l']})")
        print(f"✓ Mean total: {summary['mean_total']:.4f}  max: {summary['max_total']:.4f}")
        print(f"  Mean localization: {summary['mean_localization']:.4f}")
        print(f"  Mean cardinality: {summary['mean_cardinality_err']:.4f}")

    elif args.command == "analyze":
        summary = pipeline.analyze(args.tracks)
        print("✓ Acceleration analysis")
        print(summary["report"])

    elif args.command == "monte-carlo":
        summary = pipeline.monte_carlo(args.runs)
        print(f"✓ {summary['run_count']} runs")
        print(f"  Mean OSPA: {summary['mean_ospa']:.3f} (below target in {summary['ospa_below_target_rate'] * 100:.0f}%)")
        print(f"  Cardinality hit rate: {summary['mean_cardinality_hit_rate']:.3f}")
        print(f"  Events matched within lag limit: {summary['event_match_rate'] * 100:.0f}%")


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    try:
        config = load_config(args)
        run_command(TrackingPipeline(config), args)
    except TrackingError as e:
        print(f"Error: {e}", file=sys.stderr)
        return e.exit_code
    except KeyboardInterrupt:
        print("\nInterrupted by user.", file=sys.stderr)
        return 1
    except Exception as e:
        print(f"Unexpected error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
