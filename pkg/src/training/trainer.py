"""
One epoch of SGD and one evaluation pass.

Batched kinds take one step per batch. Full-batch kinds take one step per
epoch on the full risk sets: a cache-free forward gives f for every
record, dL/df is computed once, then forward and backward are replayed
chunk by chunk with the matching slice of dL/df and the parameter
gradients are summed.

Batches without an event carry no partial-likelihood information; for the
pure Cox kinds they are skipped (parameters untouched) and counted. Two-task
kinds still step on such batches: the Cox term contributes nothing and the
classification term keeps its gradient.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from errors import ArgumentError, NumericAbort
from models.schemas import C2Group, LossKind, MetricReport
from metrics.report import metric_report
from nn.network import Network
from nn.optim import sgd_step
from survival.dataset import SurvivalDataset
from survival.losses import LossValue, loss_and_grad

logger = logging.getLogger(__name__)


@dataclass
class EpochResult:
    loss: float
    steps: int
    skipped_batches: int


def _skips_without_events(kind: LossKind) -> bool:
    return kind in (LossKind.FULL_BATCHED, LossKind.MINI_BATCHED)


def _checked_loss(kind: LossKind, f: np.ndarray, data, weight: float, batch_index: int) -> LossValue:
    value = loss_and_grad(kind, f, data, weight)
    if not np.isfinite(value.value) or not np.isfinite(value.grad).all():
        raise NumericAbort(f"non-finite {kind.value} loss {value.value}", batch_index=batch_index)
    return value


def _full_batch_step(
    network: Network,
    data: SurvivalDataset,
    kind: LossKind,
    lr: float,
    weight: float,
    chunk_size: int,
) -> EpochResult:
    try:
        f = network.predict(data.images, chunk_size)
        value = _checked_loss(kind, f, data, weight, batch_index=0)
        if _skips_without_events(kind) and not data.events.any():
            logger.warning("Full batch has no events; skipping the update")
            return EpochResult(loss=value.value, steps=0, skipped_batches=1)

        total: dict[str, np.ndarray] = {}
        for start in range(0, len(data), chunk_size):
            stop = start + chunk_size
            network.forward(data.images[start:stop])
            for name, grad in network.backward(value.grad[start:stop]).items():
                if name in total:
                    total[name] += grad
                else:
                    total[name] = grad
    except NumericAbort as e:
        if e.batch_index is not None:
            raise
        raise NumericAbort(str(e), batch_index=0) from e
    network.clear_cache()
    sgd_step(network.parameters(), total, lr)
    return EpochResult(loss=value.value, steps=1, skipped_batches=0)


def train_epoch(
    network: Network,
    data: SurvivalDataset,
    kind: LossKind,
    batches: Optional[list[np.ndarray]],
    lr: float,
    two_task_weight: float = 1.0,
    chunk_size: int = 64,
) -> EpochResult:
    """
    Run one epoch and return the batch-size-weighted mean training loss.

    ``batches`` is ignored for full-batch kinds.
    """
    kind = LossKind(kind)
    if data.images is None:
        raise ArgumentError("training needs a dataset with images")
    if kind.is_full_batch:
        return _full_batch_step(network, data, kind, lr, two_task_weight, chunk_size)

    weighted, count, steps, skipped = 0.0, 0, 0, 0
    for b, index in enumerate(batches):
        batch = data.subset(index)
        if _skips_without_events(kind) and not batch.events.any():
            f = network.forward(batch.images, cache=False)
            value = _checked_loss(kind, f, batch, two_task_weight, batch_index=b)
            skipped += 1
            logger.debug(f"batch {b}: no events, skipped")
        else:
            try:
                f = network.forward(batch.images)
                value = _checked_loss(kind, f, batch, two_task_weight, batch_index=b)
                grads = network.backward(value.grad)
            except NumericAbort as e:
                if e.batch_index is not None:
                    raise
                raise NumericAbort(str(e), batch_index=b) from e
            sgd_step(network.parameters(), grads, lr)
            steps += 1
            logger.debug(f"batch {b}: size {len(batch)} loss {value.value:.6f}")
        weighted += value.value * len(batch)
        count += len(batch)

    network.clear_cache()
    return EpochResult(loss=weighted / count, steps=steps, skipped_batches=skipped)


def evaluate(
    network: Network,
    data: SurvivalDataset,
    kind: LossKind,
    c2_group: C2Group = C2Group.EVENTS,
    two_task_weight: float = 1.0,
    chunk_size: int = 64,
) -> tuple[float, MetricReport]:
    """
    Test loss on the full set (full risk sets for the Cox kinds) and the metric report.

    AUC is reported for the two-task kinds only.
    """
    kind = LossKind(kind)
    if len(data) == 0:
        raise ArgumentError("cannot evaluate on an empty dataset")
    f = network.predict(data.images, chunk_size)
    value = loss_and_grad(kind, f, data, two_task_weight).value
    if not np.isfinite(value):
        raise NumericAbort(f"non-finite {kind.value} test loss {value}")
    return value, metric_report(f, data, c2_group, with_auc=kind.is_two_task)
