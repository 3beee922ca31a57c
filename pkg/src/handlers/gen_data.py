"""
gen-data: generate a simulation dataset and write it to disk.

Prints one JSON line of statistics per split on stdout.
"""

import argparse
import json
import logging
from pathlib import Path

import numpy as np

from datagen.simulations import build_datasets
from middleware.invocation import Invocation, build_gen_config, data_dir_default
from models.schemas import CensorMode
from storage.dataset_store import DatasetStore, write_json
from survival.dataset import SurvivalDataset

logger = logging.getLogger(__name__)


def group_statistics(dataset: SurvivalDataset) -> dict:
    """
    Record count, prevalence, censoring rate and per-group mean time.

    Nodule data is grouped as non-cancer / cancer-censored / cancer-event,
    everything else by class label.
    """
    times, events, labels = dataset.times, dataset.events, dataset.labels
    if dataset.gen is not None and dataset.gen.censor_mode == CensorMode.NODULE:
        masks = {
            "non-cancer": labels == 0,
            "cancer-censored": (labels == 1) & (events == 0),
            "cancer-event": (labels == 1) & (events == 1),
        }
    else:
        masks = {f"class-{c}": labels == c for c in (0, 1)}

    groups = {}
    for name, mask in masks.items():
        count = int(mask.sum())
        groups[name] = {
            "n": count,
            "mean_time": float(times[mask].mean()) if count else None,
            "censoring_rate": float(1.0 - events[mask].mean()) if count else None,
        }
    return {
        "split": dataset.split,
        "n": len(dataset),
        "source": dataset.source,
        "prevalence": float(np.mean(labels)),
        "censoring_rate": dataset.censoring_rate,
        "groups": groups,
    }


def cmd_gen_data(args: argparse.Namespace) -> int:
    invocation = Invocation(
        command="gen-data",
        flags={
            "preset": args.preset,
            "seed": args.seed,
            "scale": args.scale,
            "source_dir": args.source_dir or data_dir_default(),
        },
        config_path=args.config,
    )
    gen = build_gen_config(invocation.settings())
    logger.info(f"Generating {gen.preset.value} dataset (seed {gen.seed}) into {args.out}")

    datasets = build_datasets(gen)
    store = DatasetStore(args.out)
    store.save_all(datasets)
    write_json(Path(args.out) / "gen_config.json", gen.model_dump(mode="json"))

    for dataset in datasets.values():
        print(json.dumps(group_statistics(dataset), sort_keys=True))
    return 0
