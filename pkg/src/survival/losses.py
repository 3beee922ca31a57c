"""
Cox-model losses on vectors of predicted log relative hazards.

Every function here is pure: it takes a hazard vector ``f`` (one entry per
record, index-aligned with the data) and anything exposing ``times``,
``events`` and, for the classification term, ``labels``. Risk sets are
inclusive, R(t) = {j : T*_j >= t}, so tied subjects sit in one another's
risk sets (Breslow ties). All log-sum-exp terms go through
``np.logaddexp`` and the binary cross-entropy is evaluated from the logit.
"""

import logging
from typing import Callable, NamedTuple

import numpy as np
from scipy.special import expit

from errors import ArgumentError
from models.schemas import LossKind

logger = logging.getLogger(__name__)


class LossValue(NamedTuple):
    value: float
    grad: np.ndarray


# ========================================
# Risk sets
# ========================================

def risk_set(times, t: float) -> np.ndarray:
    """Indices j with times[j] >= t."""
    times = np.asarray(times, dtype=np.float64)
    return np.flatnonzero(times >= t)


def log_risk_sums(f: np.ndarray, times: np.ndarray) -> np.ndarray:
    """
    For every record i, log of the sum of exp(f_j) over its risk set R(T*_i).

    Sorted by descending time, the risk set of i is a prefix that ends at the
    last record tied with i, so one cumulative logaddexp covers every record.
    """
    order = np.argsort(-times, kind="stable")
    desc_times = times[order]
    cumulative = np.logaddexp.accumulate(f[order])
    last = np.searchsorted(-desc_times, -times, side="right") - 1
    return cumulative[last]


def _unpack(f, data) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    f = np.asarray(f, dtype=np.float64)
    times = np.asarray(data.times, dtype=np.float64)
    events = np.asarray(data.events, dtype=np.float64)
    if f.ndim != 1:
        raise ArgumentError(f"hazard vector must be one-dimensional, got shape {f.shape}")
    if f.shape[0] != times.shape[0]:
        raise ArgumentError(f"hazard vector has {f.shape[0]} entries but data has {times.shape[0]} records")
    if f.shape[0] == 0:
        raise ArgumentError("loss needs at least one record")
    return f, times, events


# ========================================
# Partial-likelihood losses
# ========================================

def _cox_partial(f: np.ndarray, times: np.ndarray, events: np.ndarray) -> float:
    log_risk = log_risk_sums(f, times)
    return float(-np.sum(events * (f - log_risk)) / f.shape[0])


def cox_full_loss(f, data) -> float:
    """Averaged negative log partial likelihood over the whole dataset."""
    f, times, events = _unpack(f, data)
    return _cox_partial(f, times, events)


def cox_minibatch_loss(f, batch) -> float:
    """
    Partial-likelihood loss of a batch with risk sets restricted to the batch.

    ``batch`` is the subset itself, so this is the full loss evaluated on the
    batch alone and normalized by the batch size.
    """
    f, times, events = _unpack(f, batch)
    return _cox_partial(f, times, events)


def cox_loss_grad(f, data) -> np.ndarray:
    """Gradient of the (mini-)batched partial-likelihood loss with respect to f."""
    f, times, events = _unpack(f, data)
    n = f.shape[0]
    log_risk = log_risk_sums(f, times)

    # Record m gets exp(f_m) / sum_{R(T*_i)} exp(f) from every event i with T*_i <= T*_m.
    order = np.argsort(times, kind="stable")
    asc_times = times[order]
    weights = np.where(events[order] == 1, -log_risk[order], -np.inf)
    cumulative = np.logaddexp.accumulate(weights)
    last = np.searchsorted(asc_times, times, side="right") - 1
    expected = np.exp(f + cumulative[last])
    return -(events - expected) / n


# ========================================
# Likelihoods with a known baseline
# ========================================

def oracle_loss(f, data) -> float:
    """Negative log-likelihood with unit baseline hazard, so the cumulative baseline is t."""
    f, times, events = _unpack(f, data)
    return float(-np.sum(events * f - np.exp(f) * times) / f.shape[0])


def oracle_loss_grad(f, data) -> np.ndarray:
    f, times, events = _unpack(f, data)
    return -(events - np.exp(f) * times) / f.shape[0]


def full_nll(f, data, baseline) -> float:
    """
    Averaged negative full log-likelihood under a given baseline hazard.

    ``baseline`` provides ``hazard(t)`` (needed at event times, must be
    positive there) and ``cumulative(t)`` (needed at every observed time).
    """
    f, times, events = _unpack(f, data)
    is_event = events == 1
    log_hazard = np.zeros_like(f)
    if is_event.any():
        hazard = np.asarray(baseline.hazard(times[is_event]), dtype=np.float64)
        if np.any(hazard <= 0):
            bad = times[is_event][hazard <= 0][0]
            raise ArgumentError(f"baseline hazard must be positive at event times, got {hazard.min()} at t={bad}")
        log_hazard[is_event] = np.log(hazard)
    cumhaz = np.asarray(baseline.cumulative(times), dtype=np.float64)
    return float(-np.sum(events * (f + log_hazard) - cumhaz * np.exp(f)) / f.shape[0])


# ========================================
# Classification term
# ========================================

def cancer_probability(f) -> np.ndarray:
    """Predicted disease probability: the sigmoid of the log relative hazard."""
    return expit(np.asarray(f, dtype=np.float64))


def bce_loss(scores, labels) -> float:
    """
    Mean binary cross-entropy of sigmoid(scores) against binary labels.

    Evaluated as log(1 + e^s) - y*s so no probability is ever formed.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if scores.shape != labels.shape:
        raise ArgumentError(f"scores shape {scores.shape} does not match labels shape {labels.shape}")
    if scores.size == 0:
        raise ArgumentError("loss needs at least one record")
    return float(np.mean(np.logaddexp(0.0, scores) - labels * scores))


def bce_loss_grad(scores, labels) -> np.ndarray:
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    return (expit(scores) - labels) / scores.shape[0]


def two_task_loss(f, batch, weight: float = 1.0) -> LossValue:
    """
    Mini-batched Cox loss plus binary cross-entropy on the same scalar output.

    Both terms share the 1/|batch| prefactor; ``weight`` scales the
    classification term and is 1 by default (equal weighting).
    """
    f, _, _ = _unpack(f, batch)
    labels = np.asarray(batch.labels, dtype=np.float64)
    value = cox_minibatch_loss(f, batch) + weight * bce_loss(f, labels)
    grad = cox_loss_grad(f, batch) + weight * bce_loss_grad(f, labels)
    return LossValue(value, grad)


# ========================================
# Dispatch
# ========================================

def _cox_value_and_grad(f, data, weight: float) -> LossValue:
    return LossValue(cox_minibatch_loss(f, data), cox_loss_grad(f, data))


def _oracle_value_and_grad(f, data, weight: float) -> LossValue:
    return LossValue(oracle_loss(f, data), oracle_loss_grad(f, data))


LOSS_FUNCTIONS: dict[LossKind, Callable[..., LossValue]] = {
    LossKind.ORACLE: _oracle_value_and_grad,
    LossKind.FULL_BATCHED: _cox_value_and_grad,
    LossKind.MINI_BATCHED: _cox_value_and_grad,
    LossKind.TWO_TASK: two_task_loss,
    LossKind.TWO_TASK_FULL: two_task_loss,
}


def loss_and_grad(kind: LossKind, f, data, two_task_weight: float = 1.0) -> LossValue:
    """
    Value and dL/df of the loss of ``kind`` on ``data``.

    Batching is the caller's concern: passing the whole dataset gives the
    full-batched loss, passing a batch gives the mini-batched one.
    """
    return LOSS_FUNCTIONS[LossKind(kind)](f, data, two_task_weight)
