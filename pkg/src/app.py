"""
Deep survival engine - command-line entry point.

Routes subcommands to their handlers and maps every failure onto a stable
exit code: 0 ok, 2 config or usage, 3 I/O or format, 4 numeric abort,
5 gradient check failure. Results go to stdout, diagnostics to stderr.
"""

import argparse
import logging
import os
import sys
from typing import Optional

from errors import SurvivalError
from handlers import cmd_eval, cmd_gen_data, cmd_grad_check, cmd_reproduce, cmd_train
from models.schemas import C2Group, GenPreset, LossKind, ModelPreset

# Configure logging
log_level = os.environ.get("LOG_LEVEL", "INFO")
logging.basicConfig(level=getattr(logging, log_level.upper(), logging.INFO))
logger = logging.getLogger(__name__)

HANDLERS = {
    "gen-data": cmd_gen_data,
    "train": cmd_train,
    "eval": cmd_eval,
    "reproduce": cmd_reproduce,
    "grad-check": cmd_grad_check,
}


def _values(enum) -> list[str]:
    return [member.value for member in enum]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="survival", description="Deep survival analysis engine")
    parser.add_argument("--verbose", action="store_true", help="log at DEBUG level")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen-data", help="generate a simulation dataset")
    gen.add_argument("--out", required=True, help="dataset directory to write")
    gen.add_argument("--preset", choices=_values(GenPreset))
    gen.add_argument("--seed", type=int)
    gen.add_argument("--scale", type=float, help="multiply the preset's default split sizes")
    gen.add_argument("--source-dir", help="directory holding MNIST / CIFAR-10 files")
    gen.add_argument("--config", help="flat key = value config file")

    train = commands.add_parser("train", help="train one model")
    train.add_argument("--config", help="flat key = value config file")
    train.add_argument("--loss", choices=_values(LossKind))
    train.add_argument("--preset", choices=_values(ModelPreset), help="model preset")
    train.add_argument("--data", help="dataset directory written by gen-data")
    train.add_argument("--epochs", type=int)
    train.add_argument("--batch-size", type=int)
    train.add_argument("--lr", type=float)
    train.add_argument("--seed", type=int)
    train.add_argument("--eval-every", type=int)
    train.add_argument("--two-task-weight", type=float)
    train.add_argument("--c2-group", choices=_values(C2Group))
    train.add_argument("--name")
    train.add_argument("--out", help="run directory")
    train.add_argument("--no-timing", action="store_true", help="leave the seconds column empty")

    evaluate = commands.add_parser("eval", help="evaluate a saved run")
    evaluate.add_argument("--run", required=True, help="run directory written by train")
    evaluate.add_argument("--data", help="dataset directory (defaults to the run's own)")
    evaluate.add_argument("--split", default="test")

    reproduce = commands.add_parser("reproduce", help="reproduce a simulation study")
    reproduce.add_argument("sim", choices=["a", "b", "c"])
    reproduce.add_argument("--seed", type=int, default=1)
    reproduce.add_argument("--seeds", type=int, default=1, help="consecutive seeds; best value reported")
    reproduce.add_argument("--scale", type=float, default=1.0)
    reproduce.add_argument("--epochs", type=int)
    reproduce.add_argument("--jobs", type=int, default=1, help="loss variants run in parallel processes")
    reproduce.add_argument("--source-dir", help="directory holding MNIST / CIFAR-10 files")
    reproduce.add_argument("--out", help="artifact directory")

    grad = commands.add_parser("grad-check", help="finite-difference gradient audit")
    grad.add_argument("--trials", type=int, default=50)
    grad.add_argument("--seed", type=int, default=1)
    grad.add_argument("--tolerance", type=float, default=1e-4)
    grad.add_argument("--flip-sign", help=argparse.SUPPRESS)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    """Parse ``argv``, run the subcommand and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    logger.debug(f"Invocation: {args}")

    try:
        return HANDLERS[args.command](args)
    except SurvivalError as e:
        logger.debug("Command failed", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.exception(f"Unhandled error: {str(e)}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
