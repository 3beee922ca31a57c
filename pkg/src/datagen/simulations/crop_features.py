"""
Five-crop feature simulation for the integration head.

Each subject's hazard follows the signal strength of its dominant crop;
subjects with strength above 1 carry disease label 1.
"""

import logging

import numpy as np

from datagen.generators.crop_feature_generator import CropFeatureGenerator
from datagen.generators.event_time_generator import EventTimeGenerator
from datagen.seeding import stream
from models.schemas import CensorMode, GenConfig
from survival.dataset import SurvivalDataset

logger = logging.getLogger(__name__)


def build_crop_features(cfg: GenConfig) -> dict[str, SurvivalDataset]:
    datasets = {}
    for split, n in cfg.counts.items():
        logger.info(f"Generating crop-features {split} split: {n} subjects")
        features, strength, _ = CropFeatureGenerator(stream(cfg.seed, split, "images")).generate(n)
        phi = strength - 1.0
        labels = (strength > 1.0).astype(np.int8)
        times = EventTimeGenerator(stream(cfg.seed, split, "times")).generate_times(phi)
        if cfg.censor_mode == CensorMode.MEDIAN_HALF:
            events = EventTimeGenerator(stream(cfg.seed, split, "censor")).censor_median_half(times, labels)
        else:
            events = np.ones(n, dtype=np.int8)
        datasets[split] = SurvivalDataset(
            times=times,
            events=events,
            labels=labels,
            ids=np.array([f"{split}-{i:05d}" for i in range(n)]),
            images=features,
            phi=phi,
            gen=cfg,
            split=split,
        )
    return datasets
