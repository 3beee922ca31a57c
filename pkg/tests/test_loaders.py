"""
Tests for the IDX and CIFAR-10 binary loaders.
"""

import gzip
import struct

import numpy as np
import pytest

from datagen.loaders import (
    CIFAR_RECORD_BYTES,
    IDX_IMAGE_MAGIC,
    IDX_LABEL_MAGIC,
    find_cifar,
    find_mnist,
    load_cifar_binary,
    load_idx,
    load_mnist,
)
from errors import DataFormatError, StorageError


def idx_images(pixels: np.ndarray, magic: int = IDX_IMAGE_MAGIC) -> bytes:
    count, rows, cols = pixels.shape
    return struct.pack(">IIII", magic, count, rows, cols) + pixels.astype(np.uint8).tobytes()


def idx_labels(labels) -> bytes:
    return struct.pack(">II", IDX_LABEL_MAGIC, len(labels)) + bytes(labels)


@pytest.fixture
def two_images():
    pixels = np.zeros((2, 28, 28), dtype=np.uint8)
    pixels[0, 0, 0] = 255
    pixels[1, 27, 27] = 51
    return pixels


class TestLoadIdx:
    """Tests for load_idx."""

    def test_image_fixture(self, tmp_path, two_images):
        path = tmp_path / "images-idx3-ubyte"
        path.write_bytes(idx_images(two_images))
        images = load_idx(path)
        assert images.shape == (2, 28, 28, 1)
        assert images[0, 0, 0, 0] == 1.0
        assert images[1, 27, 27, 0] == pytest.approx(0.2)
        assert images.sum() == pytest.approx(1.2)

    def test_label_fixture(self, tmp_path):
        path = tmp_path / "labels-idx1-ubyte"
        path.write_bytes(idx_labels([0, 1, 7]))
        assert load_idx(path).tolist() == [0, 1, 7]

    def test_gzip(self, tmp_path, two_images):
        path = tmp_path / "images-idx3-ubyte.gz"
        path.write_bytes(gzip.compress(idx_images(two_images)))
        assert load_idx(path).shape == (2, 28, 28, 1)

    def test_wrong_magic(self, tmp_path, two_images):
        path = tmp_path / "bad"
        path.write_bytes(idx_images(two_images, magic=0x00000802))
        with pytest.raises(DataFormatError) as e:
            load_idx(path)
        assert e.value.offset == 0

    def test_truncated_payload(self, tmp_path, two_images):
        path = tmp_path / "short"
        raw = idx_images(two_images)[:-10]
        path.write_bytes(raw)
        with pytest.raises(DataFormatError) as e:
            load_idx(path)
        assert e.value.offset == len(raw)

    def test_truncated_header(self, tmp_path):
        path = tmp_path / "tiny"
        path.write_bytes(b"\x00\x00")
        with pytest.raises(DataFormatError):
            load_idx(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(StorageError):
            load_idx(tmp_path / "absent")

    def test_mnist_pair(self, tmp_path, two_images):
        (tmp_path / "train-images-idx3-ubyte").write_bytes(idx_images(two_images))
        (tmp_path / "train-labels-idx1-ubyte").write_bytes(idx_labels([3, 8]))
        found = find_mnist(tmp_path, "train")
        images, labels = load_mnist(*found)
        assert images.shape[0] == 2
        assert labels.tolist() == [3, 8]
        assert find_mnist(tmp_path, "test") is None

    def test_mnist_count_mismatch(self, tmp_path, two_images):
        (tmp_path / "i").write_bytes(idx_images(two_images))
        (tmp_path / "l").write_bytes(idx_labels([3]))
        with pytest.raises(DataFormatError):
            load_mnist(tmp_path / "i", tmp_path / "l")


class TestLoadCifar:
    """Tests for load_cifar_binary."""

    @staticmethod
    def red_record(label: int) -> bytes:
        return bytes([label]) + b"\xff" * 1024 + b"\x00" * 2048

    def test_two_records(self, tmp_path):
        path = tmp_path / "data_batch_1.bin"
        path.write_bytes(self.red_record(3) + self.red_record(9))
        images, labels = load_cifar_binary(path)
        assert images.shape == (2, 32, 32, 3)
        assert labels.tolist() == [3, 9]

    def test_channel_planar_order(self, tmp_path):
        path = tmp_path / "red.bin"
        path.write_bytes(self.red_record(0))
        images, _ = load_cifar_binary(path)
        assert np.all(images[0, :, :, 0] == 1.0)
        assert np.all(images[0, :, :, 1:] == 0.0)

    def test_row_major_planes(self, tmp_path):
        record = bytearray(CIFAR_RECORD_BYTES)
        record[1 + 32 + 5] = 255
        path = tmp_path / "pixel.bin"
        path.write_bytes(bytes(record))
        images, _ = load_cifar_binary(path)
        assert images[0, 1, 5, 0] == 1.0
        assert images.sum() == 1.0

    def test_truncated_record(self, tmp_path):
        path = tmp_path / "short.bin"
        path.write_bytes(b"\x00" * 3072)
        with pytest.raises(DataFormatError):
            load_cifar_binary(path)

    def test_find_batches(self, tmp_path):
        (tmp_path / "test_batch.bin").write_bytes(self.red_record(1))
        assert [p.name for p in find_cifar(tmp_path, "test")] == ["test_batch.bin"]
        assert find_cifar(tmp_path, "train") == []
        assert find_cifar(None, "train") == []
