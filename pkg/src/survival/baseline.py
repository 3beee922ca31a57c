"""
Baseline hazard representations and the Breslow estimator.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from errors import ArgumentError
from survival.losses import _unpack, log_risk_sums


@dataclass(frozen=True)
class StepFunction:
    """
    Right-continuous step function that is 0 before the first knot.

    Evaluating at t returns the value at the largest knot <= t.
    """
    knots: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=np.float64)
        values = np.asarray(self.values, dtype=np.float64)
        if knots.shape != values.shape or knots.ndim != 1:
            raise ArgumentError(f"knots {knots.shape} and values {values.shape} must be matching vectors")
        if np.any(np.diff(knots) <= 0):
            raise ArgumentError("knots must be strictly increasing")
        if np.any(values < 0) or np.any(np.diff(values) < 0):
            raise ArgumentError("values must be non-negative and non-decreasing")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "values", values)

    @classmethod
    def zero(cls) -> "StepFunction":
        return cls(np.empty(0), np.empty(0))

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        if self.knots.size == 0:
            return np.zeros_like(t)
        idx = np.searchsorted(self.knots, t, side="right") - 1
        return np.where(idx >= 0, self.values[np.clip(idx, 0, None)], 0.0)


@dataclass(frozen=True)
class BaselineHazard:
    """Instantaneous and cumulative baseline hazard as vectorized callables."""
    hazard: Callable[[np.ndarray], np.ndarray]
    cumulative: Callable[[np.ndarray], np.ndarray]

    @classmethod
    def constant(cls, rate: float = 1.0) -> "BaselineHazard":
        """Exponential baseline: hazard ``rate`` everywhere, cumulative ``rate * t``."""
        return cls(
            hazard=lambda t: np.full_like(np.asarray(t, dtype=np.float64), rate),
            cumulative=lambda t: rate * np.asarray(t, dtype=np.float64),
        )

    @classmethod
    def from_step(cls, cumhaz: StepFunction, hazard: Callable[[np.ndarray], np.ndarray]) -> "BaselineHazard":
        return cls(hazard=hazard, cumulative=cumhaz)


def breslow_cumhaz(f, data) -> StepFunction:
    """
    Breslow estimate of the cumulative baseline hazard.

    Jumps at each distinct event time by (number of events there) divided by
    the sum of exp(f) over that time's risk set. No events gives the zero
    function.
    """
    f, times, events = _unpack(f, data)
    is_event = events == 1
    if not is_event.any():
        return StepFunction.zero()

    log_risk = log_risk_sums(f, times)
    knots, first, counts = np.unique(times[is_event], return_index=True, return_counts=True)
    increments = counts * np.exp(-log_risk[is_event][first])
    return StepFunction(knots, np.cumsum(increments))


def predict_survival(f, cumhaz: StepFunction, t) -> np.ndarray:
    """S(t | x_i) = exp(-cumhaz(t) * exp(f_i)) as an (n_records, n_times) array."""
    f = np.asarray(f, dtype=np.float64)
    base = cumhaz(np.atleast_1d(np.asarray(t, dtype=np.float64)))
    return np.exp(-np.outer(np.exp(f), base))
