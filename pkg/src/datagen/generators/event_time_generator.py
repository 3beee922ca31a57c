"""
Event time generator for the simulations.

Draws survival times from exponential distributions whose rate is the
relative hazard exp(phi) on top of a unit baseline hazard, and assigns
censoring indicators after the fact:
- median-half: within each class, half of the subjects who lived beyond
  the class median are relabelled as censored (times unchanged)
"""

import logging
from typing import Union

import numpy as np

logger = logging.getLogger(__name__)


def sample_event_time(phi: float, rng: np.random.Generator) -> float:
    """One draw from Exponential(rate=exp(phi)) by inverse CDF."""
    # 1 - U lies in (0, 1], so the log is finite
    u = 1.0 - rng.random()
    return float(-np.log(u) / np.exp(phi))


class EventTimeGenerator:
    """Generator for exponential event times and label-only censoring."""

    def __init__(self, rng: Union[np.random.Generator, int, None] = None):
        """Initialize generator with a numpy Generator or a seed."""
        self.rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)

    def generate_times(self, phi: np.ndarray) -> np.ndarray:
        """
        Draw one time per entry of ``phi``.

        Args:
            phi: Log relative hazards, one per subject

        Returns:
            Event times, same shape as ``phi``
        """
        phi = np.asarray(phi, dtype=np.float64)
        u = 1.0 - self.rng.random(phi.shape)
        return -np.log(u) / np.exp(phi)

    def censor_median_half(self, times: np.ndarray, classes: np.ndarray) -> np.ndarray:
        """
        Event indicators after relabelling half of each class's upper half.

        Args:
            times: Observed times
            classes: Class of each subject; the median is taken per class

        Returns:
            int8 event indicators (1 = event, 0 = censored)
        """
        events = np.ones(times.shape[0], dtype=np.int8)
        for cls in np.unique(classes):
            members = np.flatnonzero(classes == cls)
            median = np.median(times[members])
            above = members[times[members] > median]
            chosen = self.rng.choice(above, size=above.shape[0] // 2, replace=False)
            events[chosen] = 0
            logger.debug(f"Class {cls}: censored {chosen.shape[0]} of {members.shape[0]} above median {median:.4f}")
        return events
