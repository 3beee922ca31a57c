"""
Image generators for the simulations.

Generates:
- two-class-shapes: 28x28x1 hollow circles (class 0) and vertical bars
  (class 1), offline stand-ins for MNIST zeros and ones
- noise32: 32x32x3 uniform-noise backgrounds, stand-ins for CIFAR-10
- nodules painted onto 32x32x3 backgrounds: small black/white benign dots
  on every image, large white malignant patches on disease images
"""

import logging
from typing import NamedTuple, Union

import numpy as np

from errors import ConfigError
from models.schemas import NoduleParams

logger = logging.getLogger(__name__)

SHAPES_SIDE = 28
NOISE_SIDE = 32
BACKGROUND_NOISE = 0.1
WHITE = 1.0
BLACK = 0.0

BASE_IMAGE_KINDS = ("two-class-shapes", "noise32")


class NoduleDraw(NamedTuple):
    """What was painted onto one image."""
    largest: int
    dot_sizes: tuple[int, ...]
    patch_sizes: tuple[int, ...]
    patch_corners: tuple[tuple[int, int], ...]


class ImageGenerator:
    """Generator for synthetic base images."""

    def __init__(self, rng: Union[np.random.Generator, int, None] = None):
        self.rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)

    def generate_shapes(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """
        Generate circles and bars with jittered geometry on faint noise.

        The classes are balanced: n // 2 circles, the rest bars, in seeded order.

        Returns:
            images of shape (n, 28, 28, 1) in [0, 1], and int class labels
        """
        labels = self.rng.permutation(np.repeat(np.array([0, 1], dtype=np.int64), [n // 2, n - n // 2]))
        images = self.rng.random((n, SHAPES_SIDE, SHAPES_SIDE, 1)) * BACKGROUND_NOISE
        rows, cols = np.mgrid[0:SHAPES_SIDE, 0:SHAPES_SIDE]

        for i in range(n):
            if labels[i] == 0:
                cy, cx = 14 + self.rng.integers(-2, 3, size=2)
                radius = self.rng.uniform(7.0, 10.0)
                dist = np.hypot(rows - cy, cols - cx)
                shape = np.abs(dist - radius) <= 1.0
            else:
                cx = 14 + self.rng.integers(-1, 2)
                top = self.rng.integers(3, 6)
                bottom = self.rng.integers(23, 26)
                shape = (np.abs(cols - cx) <= 1) & (rows >= top) & (rows < bottom)
            images[i, shape, 0] = WHITE
        return images, labels

    def generate_noise(self, n: int) -> np.ndarray:
        """Uniform [0, 1) noise of shape (n, 32, 32, 3)."""
        return self.rng.random((n, NOISE_SIDE, NOISE_SIDE, 3))


def synth_base_images(kind: str, n: int, rng: Union[np.random.Generator, int, None]) -> tuple[np.ndarray, np.ndarray]:
    """
    Seeded offline base images.

    Args:
        kind: 'two-class-shapes' or 'noise32'
        n: Number of images
        rng: numpy Generator or seed

    Returns:
        (images, class labels); noise32 labels are all zero
    """
    if n <= 0:
        raise ConfigError(f"number of images must be positive, got {n}")
    generator = ImageGenerator(rng)
    if kind == "two-class-shapes":
        return generator.generate_shapes(n)
    if kind == "noise32":
        return generator.generate_noise(n), np.zeros(n, dtype=np.int64)
    raise ConfigError(f"unknown base image kind '{kind}', expected one of {', '.join(BASE_IMAGE_KINDS)}")


class NoduleGenerator:
    """Paints benign dots and malignant patches onto an image in place."""

    def __init__(self, params: NoduleParams, rng: Union[np.random.Generator, int, None] = None):
        self.params = params
        self.rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)

    def _square(self, image: np.ndarray, side: int, value: float) -> tuple[int, int]:
        height, width = image.shape[:2]
        top = int(self.rng.integers(0, height - side + 1))
        left = int(self.rng.integers(0, width - side + 1))
        image[top:top + side, left:left + side, :] = value
        return top, left

    def _side(self, size_range: tuple[int, int]) -> int:
        low, high = size_range
        return int(self.rng.integers(low, high + 1))

    def paint(self, image: np.ndarray, disease: bool, event: bool) -> NoduleDraw:
        """
        Paint nodules onto ``image``.

        Args:
            image: (H, W, C) array, modified in place
            disease: Whether to add malignant patches
            event: Disease cases only; event cases draw from the larger patch range

        Returns:
            NoduleDraw with the largest painted side in pixels
        """
        params = self.params
        dot_sizes = []
        for _ in range(params.n_dots):
            side = self._side(params.dot_size)
            self._square(image, side, WHITE if self.rng.random() < 0.5 else BLACK)
            dot_sizes.append(side)

        patch_sizes, corners = [], []
        if disease:
            size_range = params.event_patch_size if event else params.censored_patch_size
            for _ in range(params.n_patches):
                side = self._side(size_range)
                corners.append(self._square(image, side, WHITE))
                patch_sizes.append(side)

        largest = max(dot_sizes + patch_sizes, default=0)
        return NoduleDraw(largest, tuple(dot_sizes), tuple(patch_sizes), tuple(corners))
