"""
train: run one experiment and stream its per-epoch metrics as JSON lines.
"""

import argparse
import logging

from middleware.invocation import Invocation, build_experiment_config, output_root
from models.schemas import EpochMetrics
from training.experiment import run_experiment

logger = logging.getLogger(__name__)


def _print_status(metrics: EpochMetrics) -> None:
    print(metrics.model_dump_json(), flush=True)


def cmd_train(args: argparse.Namespace) -> int:
    flags = {
        "loss": args.loss,
        "model_preset": args.preset,
        "data_dir": args.data,
        "epochs": args.epochs,
        "batch_size": args.batch_size,
        "lr": args.lr,
        "seed": args.seed,
        "eval_every": args.eval_every,
        "two_task_weight": args.two_task_weight,
        "c2_group": args.c2_group,
        "output_dir": args.out,
        "name": args.name,
    }
    if args.no_timing:
        flags["record_timing"] = False
    settings = Invocation(command="train", flags=flags, config_path=args.config).settings()
    settings.setdefault("output_dir", str(output_root() / settings.get("name", "run")))

    cfg = build_experiment_config(settings)
    logger.info(f"Training {cfg.name} into {cfg.output_dir}")
    run_experiment(cfg, on_epoch=_print_status)
    return 0
