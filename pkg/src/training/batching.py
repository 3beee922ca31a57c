"""
Epoch partitions into mini-batches.
"""

import numpy as np

from errors import ArgumentError, ConfigError, UsageError


def make_batches(n: int, batch_size: int, rng: np.random.Generator) -> list[np.ndarray]:
    """
    Seeded random permutation of range(n) cut into consecutive batches.

    The last batch keeps the remainder, so sizes for n=5, batch_size=2 are (2, 2, 1).
    """
    if batch_size < 1:
        raise ConfigError(f"batch_size must be at least 1, got {batch_size}")
    if n < 1:
        raise ArgumentError(f"cannot batch an empty dataset (n={n})")
    order = rng.permutation(n)
    return [order[start : start + batch_size] for start in range(0, n, batch_size)]


def check_partition(batches: list[np.ndarray], n: int) -> None:
    """Every index in range(n) must appear exactly once."""
    seen = np.sort(np.concatenate(batches)) if batches else np.zeros(0, dtype=np.intp)
    if not np.array_equal(seen, np.arange(n)):
        raise UsageError(f"batches do not partition {n} records")
