"""
reproduce: run every loss variant of a simulation and print the
comparison table against the published values.
"""

import argparse
import logging

from middleware.invocation import data_dir_default, output_root
from training.recipes import run_recipe

logger = logging.getLogger(__name__)


def cmd_reproduce(args: argparse.Namespace) -> int:
    out = args.out or str(output_root() / f"reproduce-{args.sim}")
    summary = run_recipe(
        args.sim,
        out,
        seed=args.seed,
        n_seeds=args.seeds,
        scale=args.scale,
        source_dir=args.source_dir or data_dir_default(),
        epochs=args.epochs,
        jobs=args.jobs,
    )
    logger.info(f"Simulation {args.sim} used {summary.source} data; artifacts in {out}")
    print(summary.table())
    return 0
