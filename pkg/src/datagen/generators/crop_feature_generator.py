"""
Toy per-crop feature generator for the integration head.

Each subject gets five 128-wide crop feature vectors of small Gaussian
noise. One crop, chosen uniformly, carries a signal of strength s on its
first SIGNAL_WIDTH features; the log relative hazard is s - 1, so the
subject's risk is driven by its dominant crop wherever it sits.
"""

from typing import Union

import numpy as np

N_CROPS = 5
FEATURE_WIDTH = 128
SIGNAL_WIDTH = 16
NOISE_SCALE = 0.1


class CropFeatureGenerator:
    """Generator for (128, 5) crop feature tensors."""

    def __init__(self, rng: Union[np.random.Generator, int, None] = None):
        self.rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)

    def generate(self, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Returns:
            features (n, 128, 5), signal strength (n,), dominant crop index (n,)
        """
        features = self.rng.normal(0.0, NOISE_SCALE, size=(n, FEATURE_WIDTH, N_CROPS))
        strength = self.rng.uniform(0.0, 2.0, size=n)
        dominant = self.rng.integers(0, N_CROPS, size=n)
        features[np.arange(n), :SIGNAL_WIDTH, dominant] += strength[:, None]
        return features, strength, dominant
