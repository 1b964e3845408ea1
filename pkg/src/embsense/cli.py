"""Command-line interface.

    embsense synth|effects|embed|analyze|evaluate|full
             [--config PATH] [--out DIR] [--workers N] [--seed S]

Without --config the built-in defaults run (synthetic 2-class dataset,
all four effects, toy embedder). Set EMBSENSE_LOG to control verbosity.
Exit code is 0 only when no cell failed.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .errors import EmbsenseError
from .pipeline import (
    PipelineConfig,
    cmd_analyze,
    cmd_effects,
    cmd_embed,
    cmd_evaluate,
    cmd_full,
    cmd_synth,
)

COMMANDS = {
    "synth": cmd_synth,
    "effects": cmd_effects,
    "embed": cmd_embed,
    "analyze": cmd_analyze,
    "evaluate": cmd_evaluate,
    "full": cmd_full,
}


def _setup_logging(out_dir: Path) -> None:
    level = os.environ.get("EMBSENSE_LOG", "INFO").upper()
    root = logging.getLogger("embsense")
    root.setLevel(level)
    root.handlers.clear()
    stream = logging.StreamHandler(sys.stderr)
    stream.setFormatter(logging.Formatter("%(name)s %(levelname)s %(message)s"))
    root.addHandler(stream)
    out_dir.mkdir(parents=True, exist_ok=True)
    # run.log is the only output that carries wall-clock timestamps
    file_handler = logging.FileHandler(out_dir / "run.log")
    file_handler.setFormatter(
        logging.Formatter("%(asctime)s %(name)s %(levelname)s %(message)s"))
    root.addHandler(file_handler)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embsense",
        description="Audio-embedding effect-sensitivity analysis pipeline",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="JSON config file (defaults built in)")
    parser.add_argument("--out", help="output directory (overrides config)")
    parser.add_argument("--workers", type=int, help="worker count (overrides config)")
    parser.add_argument("--seed", type=int, help="seed (overrides config)")
    return parser


def load_config(args) -> PipelineConfig:
    if args.config:
        config = PipelineConfig.load(args.config)
    else:
        config = PipelineConfig()
    overrides = {}
    if args.out is not None:
        overrides["output_dir"] = args.out
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.seed is not None:
        overrides["seed"] = args.seed
    if overrides:
        raw = config.to_dict()
        raw.update({k: v for k, v in overrides.items() if k in ("seed", "workers", "output_dir")})
        config = PipelineConfig.from_dict(raw)
    return config


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args)
    except EmbsenseError as exc:
        print(f"embsense: config error: {exc}", file=sys.stderr)
        return 2
    _setup_logging(Path(config.output_dir))
    try:
        failures = COMMANDS[args.command](config)
    except EmbsenseError as exc:
        print(f"embsense: {args.command} failed: {exc}", file=sys.stderr)
        return 2
    return 0 if failures == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
