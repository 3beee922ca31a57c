"""
Named random streams.

Every stream is a pure function of (seed, split, stream name), so two
presets that share a stream name (Simulations A and B share images and
times) draw identical values from it.
"""

import zlib

import numpy as np

SPLIT_CODES = {"train": 0, "test": 1}
STREAMS = {
    "images": 0,
    "times": 1,
    "censor": 2,
    "labels": 3,
    "events": 4,
    "paint": 5,
    "init": 6,
    "batches": 7,
}


def _split_code(split: str) -> int:
    return SPLIT_CODES.get(split, zlib.crc32(split.encode("utf-8")))


def stream(seed: int, split: str, name: str) -> np.random.Generator:
    """Independent numpy Generator for one named purpose."""
    return np.random.default_rng(np.random.SeedSequence([seed, _split_code(split), STREAMS[name]]))
