"""
ROC AUC in Mann-Whitney form.
"""

import logging
from typing import NamedTuple, Optional

import numpy as np
from scipy.stats import rankdata

from errors import ArgumentError

logger = logging.getLogger(__name__)


class AucResult(NamedTuple):
    value: Optional[float]
    n_pairs: int
    # positive-over-negative wins, ties counting one half
    wins: float = 0.0


def auc(scores, labels) -> AucResult:
    """
    P(score of a positive > score of a negative), ties counting one half.

    Uses the rank-sum identity with average ranks for ties. Returns an
    absent value when only one class is present.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise ArgumentError(f"scores shape {scores.shape} does not match labels shape {labels.shape}")

    positive = labels == 1
    n_pos = int(positive.sum())
    n_neg = int(labels.shape[0] - n_pos)
    if n_pos == 0 or n_neg == 0:
        logger.warning(f"AUC undefined with {n_pos} positives and {n_neg} negatives")
        return AucResult(None, 0)

    ranks = rankdata(scores, method="average")
    u_statistic = ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0
    return AucResult(float(u_statistic / (n_pos * n_neg)), n_pos * n_neg, float(u_statistic))


def auc_bruteforce(scores, labels) -> AucResult:
    """Reference pair count over every positive/negative pair."""
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y != 1]
    if not pos or not neg:
        return AucResult(None, 0)
    wins = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                wins += 1.0
            elif p == q:
                wins += 0.5
    return AucResult(wins / (len(pos) * len(neg)), len(pos) * len(neg), wins)
