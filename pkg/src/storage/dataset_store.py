"""
On-disk dataset format.

One directory holds any number of splits. For a split named ``train``:

- ``train.records.csv``: one line per subject with columns
  id,time,event,label,size,phi,offset. Floats are written with 17
  significant digits, missing values as empty fields, and ``offset`` is the
  byte offset of the subject's image in the pixel blob.
- ``train.pixels.f8``: every image back to back as little-endian float64
  in (H, W, C) row-major order.
- ``train.json``: DatasetMeta (shape, source, generator config).

Files are written deterministically, so the same seed gives byte-identical
datasets.
"""

import json
import logging
import os
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd
from pydantic import ValidationError

from errors import DataFormatError, StorageError
from models.schemas import DatasetMeta
from survival.dataset import SurvivalDataset

logger = logging.getLogger(__name__)

RECORD_COLUMNS = ["id", "time", "event", "label", "size", "phi", "offset"]
PIXEL_DTYPE = np.dtype("<f8")
FLOAT_FORMAT = "%.17g"


def write_json(path: Path, payload: dict) -> None:
    """Pretty JSON with sorted keys and a trailing newline."""
    try:
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    except OSError as e:
        raise StorageError(f"cannot write {path}: {e}") from e


def read_json(path: Path) -> dict:
    try:
        return json.loads(path.read_text())
    except FileNotFoundError:
        raise StorageError(f"missing file {path}")
    except OSError as e:
        raise StorageError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise DataFormatError(f"{path} is not valid JSON: {e.msg}", offset=e.pos) from e


class DatasetStore:
    """Reads and writes SurvivalDataset splits under one directory."""

    def __init__(self, root: Union[str, os.PathLike]):
        self.root = Path(root)

    def _paths(self, split: str) -> tuple[Path, Path, Path]:
        return (
            self.root / f"{split}.records.csv",
            self.root / f"{split}.pixels.f8",
            self.root / f"{split}.json",
        )

    # ========================================
    # Writing
    # ========================================

    def save(self, dataset: SurvivalDataset, split: Optional[str] = None) -> None:
        split = split or dataset.split
        records_path, pixels_path, meta_path = self._paths(split)
        try:
            self.root.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise StorageError(f"cannot create dataset directory {self.root}: {e}") from e

        n = len(dataset)
        image_shape: tuple[int, ...] = ()
        if dataset.images is not None:
            image_shape = tuple(int(d) for d in dataset.images.shape[1:])
        record_bytes = int(np.prod(image_shape, dtype=np.int64)) * PIXEL_DTYPE.itemsize if image_shape else 0

        frame = pd.DataFrame(
            {
                "id": dataset.ids,
                "time": dataset.times,
                "event": dataset.events.astype(np.int64),
                "label": dataset.labels.astype(np.int64),
                "size": dataset.sizes if dataset.sizes is not None else np.full(n, np.nan),
                "phi": dataset.phi if dataset.phi is not None else np.full(n, np.nan),
                "offset": np.arange(n, dtype=np.int64) * record_bytes,
            },
            columns=RECORD_COLUMNS,
        )
        meta = DatasetMeta(
            split=split,
            n=n,
            image_shape=image_shape,
            source=dataset.source,
            gen=dataset.gen,
        )

        try:
            frame.to_csv(records_path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
            pixels = dataset.images if dataset.images is not None else np.zeros(0)
            np.ascontiguousarray(pixels, dtype=PIXEL_DTYPE).tofile(pixels_path)
        except OSError as e:
            raise StorageError(f"cannot write dataset split '{split}' to {self.root}: {e}") from e
        write_json(meta_path, meta.model_dump(mode="json"))
        logger.info(f"Wrote {n} {split} records to {self.root}")

    def save_all(self, datasets: dict[str, SurvivalDataset]) -> None:
        for split, dataset in datasets.items():
            self.save(dataset, split)

    # ========================================
    # Reading
    # ========================================

    def splits(self) -> list[str]:
        """Split names present in the directory."""
        if not self.root.is_dir():
            return []
        return sorted(p.name[: -len(".records.csv")] for p in self.root.glob("*.records.csv"))

    def load_meta(self, split: str) -> DatasetMeta:
        _, _, meta_path = self._paths(split)
        try:
            return DatasetMeta.model_validate(read_json(meta_path))
        except ValidationError as e:
            raise DataFormatError(f"{meta_path} does not describe a dataset: {e.errors()[0]['msg']}") from e

    def load(self, split: str) -> SurvivalDataset:
        records_path, pixels_path, _ = self._paths(split)
        meta = self.load_meta(split)

        try:
            frame = pd.read_csv(records_path, dtype={"id": str}, float_precision="round_trip")
        except FileNotFoundError:
            raise StorageError(f"missing file {records_path}")
        except (OSError, pd.errors.ParserError) as e:
            raise DataFormatError(f"cannot parse {records_path}: {e}") from e

        if list(frame.columns) != RECORD_COLUMNS:
            raise DataFormatError(f"{records_path} header is {list(frame.columns)}, expected {RECORD_COLUMNS}", offset=0)
        if len(frame) != meta.n:
            raise DataFormatError(f"{records_path} has {len(frame)} records but metadata says {meta.n}")

        images = None
        if meta.image_shape:
            record_bytes = int(np.prod(meta.image_shape)) * PIXEL_DTYPE.itemsize
            offsets = frame["offset"].to_numpy(dtype=np.int64)
            expected = np.arange(meta.n, dtype=np.int64) * record_bytes
            if not np.array_equal(offsets, expected):
                bad = int(np.flatnonzero(offsets != expected)[0])
                raise DataFormatError(f"record {bad} points at pixel offset {offsets[bad]}", offset=int(offsets[bad]))
            try:
                pixels = np.fromfile(pixels_path, dtype=np.uint8)
            except FileNotFoundError:
                raise StorageError(f"missing file {pixels_path}")
            except OSError as e:
                raise StorageError(f"cannot read {pixels_path}: {e}") from e
            if pixels.size != meta.n * record_bytes:
                raise DataFormatError(
                    f"{pixels_path} holds {pixels.size} bytes, expected {meta.n * record_bytes}",
                    offset=min(pixels.size, meta.n * record_bytes),
                )
            images = pixels.view(PIXEL_DTYPE).reshape((meta.n,) + tuple(meta.image_shape))

        def optional(column: str) -> Optional[np.ndarray]:
            values = frame[column].to_numpy(dtype=np.float64)
            return None if np.isnan(values).all() else values

        return SurvivalDataset(
            times=frame["time"].to_numpy(dtype=np.float64),
            events=frame["event"].to_numpy(),
            labels=frame["label"].to_numpy(),
            ids=frame["id"].to_numpy(dtype=str),
            images=images,
            phi=optional("phi"),
            sizes=optional("size"),
            gen=meta.gen,
            source=meta.source,
            split=split,
        )

    def load_all(self) -> dict[str, SurvivalDataset]:
        splits = self.splits()
        if not splits:
            raise StorageError(f"no dataset splits found in {self.root}")
        return {split: self.load(split) for split in splits}
