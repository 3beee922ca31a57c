"""
Reproduction recipes for the three simulations.

Each recipe fixes the generator preset, the model preset, the loss
variants to compare and the published stabilized values. The data is
generated once per seed and shared by every loss variant.

A full-batch variant takes one step per epoch, so its learning rate is the
batched rate times the number of mini-batches per epoch; both variants
then move the same distance per epoch along the gradient.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from datagen.simulations import build_datasets
from errors import ConfigError
from models.schemas import C2Group, EpochMetrics, ExperimentConfig, GenConfig, GenPreset, LossKind, ModelPreset
from storage.dataset_store import DatasetStore
from training.experiment import run_experiment, true_loss

logger = logging.getLogger(__name__)

# Metrics averaged over the final evaluated epochs to give a stabilized value.
STABLE_WINDOW = 5


@dataclass(frozen=True)
class Recipe:
    sim: str
    gen_preset: GenPreset
    model_preset: ModelPreset
    losses: tuple[LossKind, ...]
    epochs: int
    c2_group: C2Group
    metrics: tuple[str, ...]
    published: dict[str, dict[LossKind, float]] = field(hash=False)


RECIPES: dict[str, Recipe] = {
    "a": Recipe(
        sim="a",
        gen_preset=GenPreset.SIM_A,
        model_preset=ModelPreset.TABLE1,
        losses=(LossKind.ORACLE, LossKind.FULL_BATCHED, LossKind.MINI_BATCHED),
        epochs=50,
        c2_group=C2Group.EVENTS,
        metrics=("c1",),
        published={
            "c1": {LossKind.ORACLE: 0.7268, LossKind.FULL_BATCHED: 0.7165, LossKind.MINI_BATCHED: 0.7189},
        },
    ),
    "b": Recipe(
        sim="b",
        gen_preset=GenPreset.SIM_B,
        model_preset=ModelPreset.TABLE1,
        losses=(LossKind.ORACLE, LossKind.FULL_BATCHED, LossKind.MINI_BATCHED),
        epochs=50,
        c2_group=C2Group.EVENTS,
        metrics=("c1", "c2"),
        published={
            "c1": {LossKind.ORACLE: 0.7184, LossKind.FULL_BATCHED: 0.7146, LossKind.MINI_BATCHED: 0.7166},
            "c2": {LossKind.ORACLE: 0.6845, LossKind.FULL_BATCHED: 0.6770, LossKind.MINI_BATCHED: 0.6790},
        },
    ),
    "c": Recipe(
        sim="c",
        gen_preset=GenPreset.NODULE_CIFAR,
        model_preset=ModelPreset.SIMC,
        losses=(LossKind.TWO_TASK_FULL, LossKind.TWO_TASK),
        epochs=30,
        c2_group=C2Group.DISEASE,
        metrics=("auc", "c1", "c2"),
        published={
            "auc": {LossKind.TWO_TASK_FULL: 0.770, LossKind.TWO_TASK: 0.783},
            "c1": {LossKind.TWO_TASK_FULL: 0.661, LossKind.TWO_TASK: 0.677},
            "c2": {LossKind.TWO_TASK_FULL: 0.779, LossKind.TWO_TASK: 0.785},
        },
    ),
}


def get_recipe(sim: str) -> Recipe:
    try:
        return RECIPES[sim.lower()]
    except KeyError:
        raise ConfigError(f"unknown simulation '{sim}', expected one of {sorted(RECIPES)}")


@dataclass
class ReproduceSummary:
    recipe: Recipe
    source: str
    seeds: list[int]
    values: dict[str, dict[LossKind, Optional[float]]]
    histories: dict[tuple[int, LossKind], list[EpochMetrics]]
    true_loss: Optional[float] = None

    def table(self) -> str:
        """CSV-shaped table: one row per metric, artifact value beside the published one per loss."""
        header = ["metric"]
        for loss in self.recipe.losses:
            header += [loss.value, f"{loss.value}_published"]
        lines = [f"# sim {self.recipe.sim}, data source: {self.source}, seeds: {self.seeds}", ",".join(header)]
        for metric in self.recipe.metrics:
            row = [metric]
            for loss in self.recipe.losses:
                value = self.values[metric][loss]
                row += ["" if value is None else f"{value:.4f}", f"{self.recipe.published[metric][loss]:.4f}"]
            lines.append(",".join(row))
        if self.true_loss is not None:
            lines.append(f"true_loss,{self.true_loss:.4f}")
        return "\n".join(lines)


def stabilized(history: list[EpochMetrics], metric: str) -> Optional[float]:
    """Mean of ``metric`` over the last evaluated epochs that report it."""
    values = [getattr(m, metric) for m in history[-STABLE_WINDOW:] if getattr(m, metric) is not None]
    return float(np.mean(values)) if values else None


def settling_epoch(history: list[EpochMetrics], metric: str, band: float = 0.01) -> Optional[int]:
    """First evaluated epoch from which ``metric`` stays within ``band`` of its stabilized value."""
    target = stabilized(history, metric)
    if target is None:
        return None
    settled = None
    for m in history:
        value = getattr(m, metric)
        inside = value is not None and abs(value - target) <= band
        if inside and settled is None:
            settled = m.epoch
        elif not inside:
            settled = None
    return settled


def recipe_configs(
    recipe: Recipe,
    gen: GenConfig,
    data_dir: Path,
    output_root: Path,
    seed: int,
    epochs: Optional[int] = None,
    batch_size: int = 64,
    lr: float = 0.01,
) -> list[ExperimentConfig]:
    n_batches = math.ceil(gen.counts["train"] / batch_size)
    configs = []
    for loss in recipe.losses:
        configs.append(
            ExperimentConfig(
                name=f"sim-{recipe.sim}-{loss.value}-seed{seed}",
                gen=gen,
                data_dir=str(data_dir),
                model_preset=recipe.model_preset,
                loss=loss,
                batch_size=batch_size,
                epochs=epochs or recipe.epochs,
                lr=lr * n_batches if loss.is_full_batch else lr,
                seed=seed,
                output_dir=str(output_root / f"seed{seed}" / loss.value),
                c2_group=recipe.c2_group,
                record_timing=False,
            )
        )
    return configs


def _run_history(cfg: ExperimentConfig) -> list[EpochMetrics]:
    return run_experiment(cfg).history


def run_recipe(
    sim: str,
    output_root: str,
    seed: int = 1,
    n_seeds: int = 1,
    scale: float = 1.0,
    source_dir: Optional[str] = None,
    epochs: Optional[int] = None,
    jobs: int = 1,
) -> ReproduceSummary:
    """
    Run every loss variant of one simulation for ``n_seeds`` consecutive seeds.

    With several seeds the best stabilized value per metric and loss is reported.
    """
    recipe = get_recipe(sim)
    root = Path(output_root)
    seeds = list(range(seed, seed + n_seeds))

    configs, source, oracle_loss_value = [], "synthetic", None
    for s in seeds:
        gen = GenConfig.for_preset(recipe.gen_preset, seed=s, scale=scale, source_dir=source_dir)
        data_dir = root / f"seed{s}" / "data"
        datasets = build_datasets(gen)
        DatasetStore(data_dir).save_all(datasets)
        source = datasets["train"].source
        if s == seed and recipe.gen_preset in (GenPreset.SIM_A, GenPreset.SIM_B):
            oracle_loss_value = true_loss(datasets["test"])
        configs += recipe_configs(recipe, gen, data_dir, root, s, epochs)
    logger.info(f"Reproducing simulation {recipe.sim} on {source} data: {len(configs)} runs, {jobs} job(s)")

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            histories_list = list(pool.map(_run_history, configs))
    else:
        histories_list = [_run_history(cfg) for cfg in configs]
    histories = {(cfg.seed, cfg.loss): h for cfg, h in zip(configs, histories_list)}

    values: dict[str, dict[LossKind, Optional[float]]] = {}
    for metric in recipe.metrics:
        values[metric] = {}
        for loss in recipe.losses:
            candidates = [stabilized(histories[(s, loss)], metric) for s in seeds]
            candidates = [c for c in candidates if c is not None]
            values[metric][loss] = max(candidates) if candidates else None
            logger.info(
                f"{metric} under {loss.value}: stabilized {values[metric][loss]}, settled by epoch "
                f"{[settling_epoch(histories[(s, loss)], metric) for s in seeds]}"
            )

    return ReproduceSummary(
        recipe=recipe,
        source=source,
        seeds=seeds,
        values=values,
        histories=histories,
        true_loss=oracle_loss_value,
    )
