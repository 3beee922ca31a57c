"""
Nodule-CIFAR simulation (Simulation C).

Builds, per split:
- disease label ~ Bernoulli(prevalence)
- disease cases are events with probability 1 - cancer_censor_rate;
  non-disease cases are always censored
- benign dots on every image; disease images also get large white
  patches, event cases from the larger size range, censored from the smaller
- exponential event times with phi = alpha * (largest nodule side in pixels)
"""

import logging
from typing import Optional

import numpy as np

from datagen.generators.event_time_generator import EventTimeGenerator
from datagen.generators.image_generator import NOISE_SIDE, NoduleGenerator, synth_base_images
from datagen.loaders import find_cifar, load_cifar_binary
from datagen.seeding import stream
from errors import ConfigError
from models.schemas import GenConfig
from survival.dataset import SurvivalDataset

logger = logging.getLogger(__name__)

BASE_SHAPE = (NOISE_SIDE, NOISE_SIDE, 3)


def gen_nodule_cifar(base: Optional[np.ndarray], cfg: GenConfig, split: str = "train") -> SurvivalDataset:
    """
    Paint nodules onto base images and attach survival outcomes.

    Args:
        base: (n, 32, 32, 3) images, or None for seeded uniform-noise backgrounds
        cfg: Generator config; nodule geometry comes from ``cfg.nodule``
        split: Split name, selects the random streams

    Returns:
        SurvivalDataset with generating nodule sizes in ``sizes``
    """
    if base is None:
        base, _ = synth_base_images("noise32", cfg.counts[split], stream(cfg.seed, split, "images"))
    if base.shape[1:] != BASE_SHAPE:
        raise ConfigError(f"nodule simulation needs 32x32x3 base images, got {base.shape[1:]}")

    params = cfg.nodule
    if params.ranges_overlap:
        logger.warning(
            f"Censored patch sizes {params.censored_patch_size} reach event patch sizes "
            f"{params.event_patch_size}; censored nodules are not strictly smaller"
        )

    n = base.shape[0]
    disease = stream(cfg.seed, split, "labels").random(n) < params.prevalence
    events = disease & (stream(cfg.seed, split, "events").random(n) >= params.cancer_censor_rate)

    images = base.copy()
    painter = NoduleGenerator(params, stream(cfg.seed, split, "paint"))
    sizes = np.empty(n, dtype=np.float64)
    for i in range(n):
        sizes[i] = painter.paint(images[i], bool(disease[i]), bool(events[i])).largest

    phi = params.alpha * sizes
    times = EventTimeGenerator(stream(cfg.seed, split, "times")).generate_times(phi)

    return SurvivalDataset(
        times=times,
        events=events.astype(np.int8),
        labels=disease.astype(np.int8),
        ids=np.array([f"{split}-{i:05d}" for i in range(n)]),
        images=images,
        phi=phi,
        sizes=sizes,
        gen=cfg,
        split=split,
    )


def _base_images(cfg: GenConfig, split: str, n: int) -> tuple[Optional[np.ndarray], str]:
    files = find_cifar(cfg.source_dir, split)
    if not files:
        return None, "synthetic"

    collected, total = [], 0
    for path in files:
        images, _ = load_cifar_binary(path)
        collected.append(images)
        total += images.shape[0]
        if total >= n:
            break
    if total < n:
        logger.warning(f"CIFAR-10 {split} files hold only {total} images, wanted {n}")
    return np.concatenate(collected)[:n], "cifar"


def build_nodule_cifar(cfg: GenConfig) -> dict[str, SurvivalDataset]:
    """Generate every split named in ``cfg.counts``."""
    datasets = {}
    for split, n in cfg.counts.items():
        base, source = _base_images(cfg, split, n)
        logger.info(f"Generating nodule-cifar {split} split: {n} images from {source}")
        dataset = gen_nodule_cifar(base, cfg, split)
        dataset.source = source
        datasets[split] = dataset
    return datasets
