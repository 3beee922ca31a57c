"""
Bit-exact loaders for the MNIST IDX and CIFAR-10 binary formats.

IDX (big endian):
    u32 | magic: 0x00000803 images, 0x00000801 labels
    u32 | item count
    u32 | rows, u32 | cols   (image files only)
    u8[] | payload, row-major

CIFAR-10 binary: consecutive 3073-byte records, one label byte followed by
1024 red, 1024 green and 1024 blue bytes (each plane row-major 32x32).

Pixels are scaled to [0, 1] by /255.
"""

import gzip
import logging
import struct
from pathlib import Path
from typing import Optional, Union

import numpy as np

from errors import DataFormatError, StorageError

logger = logging.getLogger(__name__)

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801
CIFAR_SIDE = 32
CIFAR_RECORD_BYTES = 1 + 3 * CIFAR_SIDE * CIFAR_SIDE

MNIST_FILES = {
    "train": ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    "test": ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
}
CIFAR_FILES = {
    "train": tuple(f"data_batch_{i}.bin" for i in range(1, 6)),
    "test": ("test_batch.bin",),
}


def _read_bytes(path: Union[str, Path]) -> bytes:
    path = Path(path)
    try:
        if path.suffix == ".gz":
            with gzip.open(path, "rb") as f:
                return f.read()
        return path.read_bytes()
    except FileNotFoundError as e:
        raise StorageError(f"file not found: {path}") from e
    except OSError as e:
        raise StorageError(f"cannot read {path}: {e}") from e


def load_idx(path: Union[str, Path]) -> np.ndarray:
    """
    Parse an IDX image or label file.

    Args:
        path: IDX file, optionally gzip-compressed (.gz)

    Returns:
        float64 images of shape (count, rows, cols, 1) in [0, 1], or
        uint8 labels of shape (count,)
    """
    raw = _read_bytes(path)
    if len(raw) < 8:
        raise DataFormatError(f"{path}: header truncated", offset=len(raw))

    magic, count = struct.unpack(">II", raw[:8])
    if magic == IDX_IMAGE_MAGIC:
        if len(raw) < 16:
            raise DataFormatError(f"{path}: image header truncated", offset=len(raw))
        rows, cols = struct.unpack(">II", raw[8:16])
        expected = count * rows * cols
        if len(raw) - 16 < expected:
            raise DataFormatError(
                f"{path}: payload truncated, expected {expected} pixel bytes, found {len(raw) - 16}",
                offset=len(raw),
            )
        payload = np.frombuffer(raw[16:16 + expected], dtype=np.uint8)
        return payload.reshape(count, rows, cols, 1).astype(np.float64) / 255.0

    if magic == IDX_LABEL_MAGIC:
        if len(raw) - 8 < count:
            raise DataFormatError(
                f"{path}: payload truncated, expected {count} label bytes, found {len(raw) - 8}",
                offset=len(raw),
            )
        return np.frombuffer(raw[8:8 + count], dtype=np.uint8).copy()

    raise DataFormatError(f"{path}: unexpected IDX magic 0x{magic:08x}", offset=0)


def load_mnist(images_path: Union[str, Path], labels_path: Union[str, Path]) -> tuple[np.ndarray, np.ndarray]:
    """Images and labels from a matching pair of IDX files."""
    images = load_idx(images_path)
    labels = load_idx(labels_path)
    if images.ndim != 4 or labels.ndim != 1:
        raise DataFormatError(f"{images_path} / {labels_path}: expected an image file and a label file")
    if images.shape[0] != labels.shape[0]:
        raise DataFormatError(f"{images.shape[0]} images but {labels.shape[0]} labels")
    return images, labels.astype(np.int64)


def load_cifar_binary(path: Union[str, Path]) -> tuple[np.ndarray, np.ndarray]:
    """
    Parse one CIFAR-10 binary batch file.

    Returns:
        float64 images (count, 32, 32, 3) in [0, 1] and int64 labels (count,)
    """
    raw = _read_bytes(path)
    if len(raw) == 0 or len(raw) % CIFAR_RECORD_BYTES:
        complete = len(raw) // CIFAR_RECORD_BYTES
        raise DataFormatError(
            f"{path}: size {len(raw)} is not a positive multiple of {CIFAR_RECORD_BYTES}",
            offset=complete * CIFAR_RECORD_BYTES,
        )
    records = np.frombuffer(raw, dtype=np.uint8).reshape(-1, CIFAR_RECORD_BYTES)
    labels = records[:, 0].astype(np.int64)
    planes = records[:, 1:].reshape(-1, 3, CIFAR_SIDE, CIFAR_SIDE)
    images = planes.transpose(0, 2, 3, 1).astype(np.float64) / 255.0
    return images, labels


def _find(directory: Path, name: str) -> Optional[Path]:
    for candidate in (directory / name, directory / f"{name}.gz"):
        if candidate.exists():
            return candidate
    return None


def find_mnist(source_dir: Union[str, Path, None], split: str) -> Optional[tuple[Path, Path]]:
    """Locate the IDX pair for ``split`` under ``source_dir``, if present."""
    if source_dir is None:
        return None
    images_name, labels_name = MNIST_FILES["test" if split == "test" else "train"]
    images_path = _find(Path(source_dir), images_name)
    labels_path = _find(Path(source_dir), labels_name)
    if images_path and labels_path:
        return images_path, labels_path
    return None


def find_cifar(source_dir: Union[str, Path, None], split: str) -> list[Path]:
    """Locate the CIFAR-10 batch files for ``split`` under ``source_dir``."""
    if source_dir is None:
        return []
    names = CIFAR_FILES["test" if split == "test" else "train"]
    return [p for p in (Path(source_dir) / name for name in names) if p.exists()]
