"""
Index-aligned survival data container.

A SurvivalDataset holds one entry per subject in parallel numpy arrays:
observed time, event indicator, class label, optional image tensor, and
the generating quantities the simulators know (true log relative hazard,
largest nodule size). Losses and metrics only read ``times``, ``events``
and ``labels``.
"""

from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

from errors import ArgumentError
from models.schemas import GenConfig, SurvivalRecord


@dataclass
class SurvivalDataset:
    times: np.ndarray
    events: np.ndarray
    labels: np.ndarray
    ids: np.ndarray
    images: Optional[np.ndarray] = None
    phi: Optional[np.ndarray] = None
    sizes: Optional[np.ndarray] = None
    gen: Optional[GenConfig] = None
    source: str = "synthetic"
    split: str = "all"
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        self.events = np.asarray(self.events, dtype=np.int8)
        self.labels = np.asarray(self.labels, dtype=np.int8)
        self.ids = np.asarray(self.ids, dtype=str)
        n = self.times.shape[0]

        if self.times.ndim != 1:
            raise ArgumentError(f"times must be one-dimensional, got shape {self.times.shape}")
        for name in ("events", "labels", "ids"):
            if getattr(self, name).shape != (n,):
                raise ArgumentError(f"{name} has length {getattr(self, name).shape[0]}, expected {n}")
        for name in ("images", "phi", "sizes"):
            value = getattr(self, name)
            if value is not None and len(value) != n:
                raise ArgumentError(f"{name} has length {len(value)}, expected {n}")

        if not np.all(np.isfinite(self.times)) or np.any(self.times < 0):
            raise ArgumentError("times must be finite and non-negative")
        if not np.isin(self.events, (0, 1)).all():
            raise ArgumentError("events must be 0 or 1")
        if not np.isin(self.labels, (0, 1)).all():
            raise ArgumentError("labels must be 0 or 1")

    @classmethod
    def from_arrays(
        cls,
        times: Sequence[float],
        events: Sequence[int],
        labels: Optional[Sequence[int]] = None,
        images: Optional[np.ndarray] = None,
        **kwargs,
    ) -> "SurvivalDataset":
        """Build a dataset from bare arrays, numbering ids 0..n-1."""
        times = np.asarray(times, dtype=np.float64)
        n = times.shape[0]
        if labels is None:
            labels = np.zeros(n, dtype=np.int8)
        ids = np.array([str(i) for i in range(n)])
        return cls(times=times, events=events, labels=labels, ids=ids, images=images, **kwargs)

    def __len__(self) -> int:
        return self.times.shape[0]

    def subset(self, index: Sequence[int]) -> "SurvivalDataset":
        """Return the records at ``index`` in that order."""
        index = np.asarray(index, dtype=np.intp)

        def take(arr):
            return None if arr is None else arr[index]

        return SurvivalDataset(
            times=self.times[index],
            events=self.events[index],
            labels=self.labels[index],
            ids=self.ids[index],
            images=take(self.images),
            phi=take(self.phi),
            sizes=take(self.sizes),
            gen=self.gen,
            source=self.source,
            split=self.split,
        )

    def records(self) -> Iterator[SurvivalRecord]:
        for i in range(len(self)):
            yield SurvivalRecord(
                id=str(self.ids[i]),
                time=float(self.times[i]),
                event=int(self.events[i]),
                label=int(self.labels[i]),
                size=None if self.sizes is None else float(self.sizes[i]),
            )

    @property
    def censoring_rate(self) -> float:
        return float(1.0 - self.events.mean()) if len(self) else 0.0
