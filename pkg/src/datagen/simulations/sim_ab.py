"""
Two-class image survival simulation (Simulations A and B).

Builds, per split:
- two classes of 28x28 images (MNIST digits when available, circles and
  bars otherwise)
- exponential event times with rate exp(phi_class) over a unit baseline
- Simulation A: every subject is an event
- Simulation B: within each class, half of the subjects living beyond the
  class median are relabelled as censored
"""

import logging

import numpy as np

from datagen.generators.event_time_generator import EventTimeGenerator
from datagen.generators.image_generator import synth_base_images
from datagen.loaders import find_mnist, load_mnist
from datagen.seeding import stream
from errors import ConfigError
from models.schemas import CensorMode, GenConfig
from survival.dataset import SurvivalDataset

logger = logging.getLogger(__name__)


def gen_sim_ab(images: np.ndarray, classes: np.ndarray, cfg: GenConfig, split: str = "train") -> SurvivalDataset:
    """
    Attach simulated survival outcomes to a two-class image collection.

    Args:
        images: (n, H, W, C) images
        classes: Class id of each image; exactly two distinct ids
        cfg: Generator config (phi_map keyed by class id, censor_mode)
        split: Split name, selects the random streams

    Returns:
        SurvivalDataset whose labels are 0 for the smaller class id and 1 for the larger
    """
    classes = np.asarray(classes)
    present = np.unique(classes)
    if present.shape[0] != 2:
        raise ConfigError(f"two-class simulation needs exactly 2 classes, found {present.tolist()}")
    missing = [int(c) for c in present if int(c) not in cfg.phi_map]
    if missing:
        raise ConfigError(f"phi_map has no log relative hazard for class(es) {missing}")

    phi = np.array([cfg.phi_map[int(c)] for c in classes], dtype=np.float64)
    times = EventTimeGenerator(stream(cfg.seed, split, "times")).generate_times(phi)

    if cfg.censor_mode == CensorMode.NONE:
        events = np.ones(classes.shape[0], dtype=np.int8)
    elif cfg.censor_mode == CensorMode.MEDIAN_HALF:
        events = EventTimeGenerator(stream(cfg.seed, split, "censor")).censor_median_half(times, classes)
    else:
        raise ConfigError(f"censor mode '{cfg.censor_mode.value}' does not apply to the two-class simulation")

    n = classes.shape[0]
    return SurvivalDataset(
        times=times,
        events=events,
        labels=(classes == present[1]).astype(np.int8),
        ids=np.array([f"{split}-{i:05d}" for i in range(n)]),
        images=images,
        phi=phi,
        gen=cfg,
        split=split,
    )


def _base_images(cfg: GenConfig, split: str, n: int) -> tuple[np.ndarray, np.ndarray, str]:
    found = find_mnist(cfg.source_dir, split)
    if found:
        images, digits = load_mnist(*found)
        first = np.flatnonzero(digits == cfg.digits[0])[: n // 2]
        second = np.flatnonzero(digits == cfg.digits[1])[: n - n // 2]
        keep = np.sort(np.concatenate([first, second]))
        images, digits = images[keep], digits[keep]
        if images.shape[0] < n:
            logger.warning(f"MNIST {split} has only {images.shape[0]} images of digits {cfg.digits}, wanted {n}")
        return images, digits, "mnist"

    images, labels = synth_base_images("two-class-shapes", n, stream(cfg.seed, split, "images"))
    return images, np.asarray(cfg.digits)[labels], "synthetic"


def build_sim_ab(cfg: GenConfig) -> dict[str, SurvivalDataset]:
    """Generate every split named in ``cfg.counts``."""
    datasets = {}
    for split, n in cfg.counts.items():
        images, classes, source = _base_images(cfg, split, n)
        logger.info(f"Generating {cfg.preset.value} {split} split: {images.shape[0]} images from {source}")
        dataset = gen_sim_ab(images, classes, cfg, split)
        dataset.source = source
        datasets[split] = dataset
    return datasets
