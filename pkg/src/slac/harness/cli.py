"""Command-line entry point.

Exit codes: 0 success, 2 config error, 3 numerical failure,
4 compatibility refusal.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from slac.errors import CompatibilityError, ConfigError, TrainingError, UsageError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slac", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("stage1", "pretrain the latent action decoder in the sim-variant world"),
        ("stage2", "train the downstream task policy with FLA-SAC"),
        ("baseline", "train the flat low-level SAC baseline"),
        ("eval", "evaluate a policy/decoder checkpoint pair"),
        ("oracle", "run the tabular Q-decomposition oracle suite"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, type=Path, help="experiment config file")
        p.add_argument("--seed", type=int, default=None, help="overrides config seed / SLAC_SEED")
        p.add_argument("--outdir", type=Path, default=None, help="overrides config outdir / SLAC_OUTDIR")
        p.add_argument("--no-disentangle", action="store_true", help="ablation: drop the disentanglement term / full adjacency")
        p.add_argument("--no-decomp", action="store_true", help="ablation: single monolithic Q on the summed reward")
        p.add_argument("--no-temporal", action="store_true", help="ablation: one low-level step per latent action")
    p = sub.add_parser("list-configs", help="list bundled experiment config files")
    p.add_argument("--dir", type=Path, default=None, help="directory to scan (default: ./configs)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list-configs":
        directory = args.dir or Path("configs")
        if not directory.is_dir():
            print(f"no config directory at {directory}", file=sys.stderr)
            return 2
        for path in sorted(directory.glob("*.cfg")):
            print(path)
        return 0

    from slac.harness.runner import run

    try:
        outdir = run(
            args.config,
            stage=args.command,
            seed=args.seed,
            outdir=args.outdir,
            no_disentangle=args.no_disentangle,
            no_decomp=args.no_decomp,
            no_temporal=args.no_temporal,
        )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (TrainingError, UsageError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except CompatibilityError as exc:
        print(f"compatibility refusal: {exc}", file=sys.stderr)
        return 4
    print(f"artifacts written to {outdir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
