"""
eval: score a saved run's checkpoint on a dataset split.
"""

import argparse
import json
import logging

from errors import ConfigError
from nn.network import Network
from storage.dataset_store import DatasetStore
from storage.run_store import RunStore
from training.experiment import load_datasets
from training.trainer import evaluate

logger = logging.getLogger(__name__)


def cmd_eval(args: argparse.Namespace) -> int:
    store = RunStore(args.run)
    manifest = store.read_manifest()
    cfg = manifest.config

    network = Network(manifest.model)
    network.load_parameters(store.load_parameters())

    data_dir = args.data or cfg.data_dir
    if data_dir:
        dataset = DatasetStore(data_dir).load(args.split)
    else:
        datasets = load_datasets(cfg)
        if args.split not in datasets:
            raise ConfigError(f"split '{args.split}' not generated by {cfg.gen.preset.value}")
        dataset = datasets[args.split]
    logger.info(f"Evaluating {args.run} on {len(dataset)} {args.split} records")

    c2_group = cfg.c2_group or (dataset.gen or cfg.gen).default_c2_group()
    test_loss, report = evaluate(network, dataset, cfg.loss, c2_group, cfg.two_task_weight, cfg.chunk_size)
    print(json.dumps({"split": args.split, "loss": cfg.loss.value, "test_loss": test_loss, **report.model_dump()}))
    return 0
