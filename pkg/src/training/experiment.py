"""
End-to-end run: data, model, epochs, metrics, manifest, checkpoint.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable, Optional

import numpy as np

from datagen.seeding import stream
from datagen.simulations import build_datasets
from errors import ConfigError, NumericAbort
from models.schemas import EpochMetrics, ExperimentConfig, ModelConfig, ModelPreset, RunManifest
from nn.network import Network, preset_config
from nn.optim import step_decay
from storage.dataset_store import DatasetStore
from storage.run_store import RunStore
from survival.baseline import BaselineHazard
from survival.dataset import SurvivalDataset
from survival.losses import full_nll
from training.batching import check_partition, make_batches
from training.trainer import evaluate, train_epoch

logger = logging.getLogger(__name__)


@dataclass
class RunResult:
    history: list[EpochMetrics]
    manifest: RunManifest
    network: Network = field(repr=False)


def model_for(cfg: ExperimentConfig) -> ModelConfig:
    if cfg.model_preset == ModelPreset.CUSTOM:
        return cfg.model
    return preset_config(cfg.model_preset)


def load_datasets(cfg: ExperimentConfig) -> dict[str, SurvivalDataset]:
    """Read ``cfg.data_dir`` when set, otherwise generate from ``cfg.gen``."""
    if cfg.data_dir:
        datasets = DatasetStore(cfg.data_dir).load_all()
    else:
        datasets = build_datasets(cfg.gen)
    missing = {"train", "test"} - set(datasets)
    if missing:
        raise ConfigError(f"dataset is missing split(s) {sorted(missing)}")
    return datasets


def resolve_config(cfg: ExperimentConfig, train: SurvivalDataset) -> ExperimentConfig:
    """
    Pin the config to the data actually used.

    A dataset read from ``data_dir`` brings its own generator config, which
    replaces ``cfg.gen``; an unset ``c2_group`` follows that generator.
    """
    gen = train.gen if cfg.data_dir and train.gen is not None else cfg.gen
    c2_group = cfg.c2_group or gen.default_c2_group()
    return cfg.model_copy(update={"gen": gen, "c2_group": c2_group})


def true_loss(data: SurvivalDataset) -> Optional[float]:
    """Full negative log-likelihood at the generating log hazards with unit baseline."""
    if data.phi is None:
        return None
    return full_nll(data.phi, data, BaselineHazard.constant(1.0))


def design_decisions(cfg: ExperimentConfig, model: ModelConfig) -> dict[str, str]:
    gen = cfg.gen
    return {
        "init": f"{model.init} weights, zero biases, seed {cfg.seed}",
        "activation": "relu after every conv and dense layer except the last",
        "lr_schedule": f"lr {cfg.lr} x {cfg.lr_decay} after epoch {math.ceil(cfg.lr_decay_at * cfg.epochs)}",
        "optimizer": "plain sgd",
        "batch_size": str(cfg.batch_size),
        "phi_map": ", ".join(f"{k}: {v}" for k, v in sorted(gen.phi_map.items())),
        "censor_mode": gen.censor_mode.value,
        "ties": "breslow, inclusive risk sets",
        "test_loss": "full risk sets on the test split",
        "zero_event_batches": "skipped for pure cox kinds, parameters unchanged",
        "two_task_weight": str(cfg.two_task_weight),
        "c2_group": cfg.c2_group.value,
        "precision": "float64",
    }


def run_experiment(
    cfg: ExperimentConfig,
    datasets: Optional[dict[str, SurvivalDataset]] = None,
    on_epoch: Optional[Callable[[EpochMetrics], None]] = None,
) -> RunResult:
    """
    Train and evaluate one configuration, writing every artifact to ``cfg.output_dir``.

    ``on_epoch`` receives each EpochMetrics as soon as it is recorded.
    """
    datasets = datasets or load_datasets(cfg)
    train, test = datasets["train"], datasets["test"]
    cfg = resolve_config(cfg, train)
    model = model_for(cfg)
    if train.images is None or tuple(train.images.shape[1:]) != tuple(model.input_shape):
        got = None if train.images is None else train.images.shape[1:]
        raise ConfigError(f"{model.preset.value} model expects inputs {model.input_shape}, dataset has {got}")

    network = Network(model, stream(cfg.seed, "train", "init"))
    batch_rng = stream(cfg.seed, "train", "batches")

    store = RunStore(cfg.output_dir)
    store.create()
    manifest = RunManifest(
        config=cfg,
        model=model,
        data_source=train.source,
        decisions=design_decisions(cfg, model),
        true_loss=true_loss(test),
        numpy_version=np.__version__,
        created_at=datetime.now(timezone.utc).isoformat(),
    )
    store.write_manifest(manifest)
    logger.info(
        f"Run {cfg.name}: {cfg.loss.value} loss, {model.preset.value} model, "
        f"{len(train)} train / {len(test)} test from {train.source}"
    )

    history = []
    for epoch in range(1, cfg.epochs + 1):
        lr = step_decay(cfg.lr, epoch, cfg.epochs, cfg.lr_decay, cfg.lr_decay_at)
        batches = None
        if not cfg.loss.is_full_batch:
            batches = make_batches(len(train), cfg.batch_size, batch_rng)
            check_partition(batches, len(train))

        started = time.perf_counter()
        try:
            result = train_epoch(network, train, cfg.loss, batches, lr, cfg.two_task_weight, cfg.chunk_size)
        except NumericAbort as e:
            logger.error(f"Run {cfg.name} aborted in epoch {epoch}: {e}")
            raise
        if result.skipped_batches:
            logger.warning(f"Epoch {epoch}: skipped {result.skipped_batches} batch(es) without events")

        if epoch % cfg.eval_every and epoch != cfg.epochs:
            continue
        test_loss, report = evaluate(network, test, cfg.loss, cfg.c2_group, cfg.two_task_weight, cfg.chunk_size)
        seconds = time.perf_counter() - started
        metrics = EpochMetrics(
            epoch=epoch,
            train_loss=result.loss,
            test_loss=test_loss,
            auc=report.auc,
            c1=report.c1,
            c2=report.c2,
            seconds=seconds if cfg.record_timing else None,
            skipped_batches=result.skipped_batches,
        )
        store.append_metrics(metrics)
        history.append(metrics)
        logger.info(
            f"Epoch {epoch}/{cfg.epochs}: train {result.loss:.4f} test {test_loss:.4f} "
            f"c1 {report.c1} c2 {report.c2} auc {report.auc}"
        )
        if on_epoch:
            on_epoch(metrics)

    store.save_parameters(network.parameters())
    return RunResult(history=history, manifest=manifest, network=network)
