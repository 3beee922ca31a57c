"""
Run directory: metric history, manifest and checkpoint.

    metrics.csv     epoch,train_loss,test_loss,auc,c1,c2,seconds,skipped_batches
    metrics.jsonl   one EpochMetrics object per line
    manifest.json   RunManifest
    model.ckpt      parameter checkpoint
"""

import logging
import os
from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd
from pydantic import ValidationError

from errors import DataFormatError, StorageError
from models.schemas import EpochMetrics, RunManifest
from storage.checkpoint import load_checkpoint, save_checkpoint
from storage.dataset_store import FLOAT_FORMAT, read_json, write_json

logger = logging.getLogger(__name__)

METRIC_COLUMNS = list(EpochMetrics.model_fields)


class RunStore:
    """Writes and reads the artifacts of one training run."""

    def __init__(self, root: Union[str, os.PathLike]):
        self.root = Path(root)
        self.metrics_csv = self.root / "metrics.csv"
        self.metrics_jsonl = self.root / "metrics.jsonl"
        self.manifest_path = self.root / "manifest.json"
        self.checkpoint_path = self.root / "model.ckpt"

    def create(self) -> None:
        """Make the directory and start empty metric files."""
        try:
            self.root.mkdir(parents=True, exist_ok=True)
            self.metrics_csv.write_text(",".join(METRIC_COLUMNS) + "\n")
            self.metrics_jsonl.write_text("")
        except OSError as e:
            raise StorageError(f"cannot create run directory {self.root}: {e}") from e

    # ========================================
    # Metrics
    # ========================================

    def append_metrics(self, metrics: EpochMetrics) -> None:
        row = pd.DataFrame([metrics.model_dump()], columns=METRIC_COLUMNS)
        try:
            row.to_csv(
                self.metrics_csv, mode="a", header=False, index=False, float_format=FLOAT_FORMAT, lineterminator="\n"
            )
            with self.metrics_jsonl.open("a") as handle:
                handle.write(metrics.model_dump_json() + "\n")
        except OSError as e:
            raise StorageError(f"cannot append metrics to {self.root}: {e}") from e

    def read_metrics(self) -> list[EpochMetrics]:
        """History as written, read back from the JSON lines file."""
        try:
            lines = self.metrics_jsonl.read_text().splitlines()
        except FileNotFoundError:
            raise StorageError(f"missing file {self.metrics_jsonl}")
        except OSError as e:
            raise StorageError(f"cannot read {self.metrics_jsonl}: {e}") from e
        try:
            return [EpochMetrics.model_validate_json(line) for line in lines if line.strip()]
        except ValidationError as e:
            raise DataFormatError(f"{self.metrics_jsonl} holds an invalid metrics row: {e.errors()[0]['msg']}") from e

    def read_metrics_table(self) -> pd.DataFrame:
        try:
            return pd.read_csv(self.metrics_csv, float_precision="round_trip")
        except FileNotFoundError:
            raise StorageError(f"missing file {self.metrics_csv}")
        except (OSError, pd.errors.ParserError) as e:
            raise DataFormatError(f"cannot parse {self.metrics_csv}: {e}") from e

    # ========================================
    # Manifest and checkpoint
    # ========================================

    def write_manifest(self, manifest: RunManifest) -> None:
        write_json(self.manifest_path, manifest.model_dump(mode="json"))

    def read_manifest(self) -> RunManifest:
        try:
            return RunManifest.model_validate(read_json(self.manifest_path))
        except ValidationError as e:
            raise DataFormatError(f"{self.manifest_path} is not a valid run manifest: {e.errors()[0]['msg']}") from e

    def save_parameters(self, params: dict[str, np.ndarray]) -> None:
        save_checkpoint(self.checkpoint_path, params)

    def load_parameters(self) -> dict[str, np.ndarray]:
        return load_checkpoint(self.checkpoint_path)
