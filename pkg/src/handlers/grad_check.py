"""
grad-check: finite-difference audit of every layer kind and loss.
"""

import argparse
import logging

from nn.gradcheck import assert_passed, run_suite, summary_line

logger = logging.getLogger(__name__)


def cmd_grad_check(args: argparse.Namespace) -> int:
    logger.info(f"Checking gradients: {args.trials} trials per op, seed {args.seed}")
    results = run_suite(trials=args.trials, seed=args.seed, tolerance=args.tolerance, flip_sign=args.flip_sign)
    for result in results:
        logger.info(f"{result.op:<16} max rel err {result.max_rel_err:.3e}")
    assert_passed(results)
    print(summary_line(results))
    return 0
