"""
Harrell's concordance index in the hazard-ordering form.

A pair (i, j) is comparable when T_i > T_j and j had the event. It is
concordant when the predicted hazard of i is lower than that of j; equal
predictions count one half. Pairs with equal times are never comparable.
"""

from typing import NamedTuple, Optional

import numpy as np

from errors import ArgumentError

# Upper bound on pair-matrix entries materialised per chunk
_PAIR_BLOCK = 4_000_000


class Concordance(NamedTuple):
    value: Optional[float]
    concordant: int
    tied: int
    comparable: int

    @property
    def n_pairs(self) -> int:
        return self.comparable


def _finish(concordant: int, tied: int, comparable: int) -> Concordance:
    value = (concordant + 0.5 * tied) / comparable if comparable else None
    return Concordance(value, int(concordant), int(tied), int(comparable))


def _arrays(f_hat, data) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    f_hat = np.asarray(f_hat, dtype=np.float64)
    times = np.asarray(data.times, dtype=np.float64)
    events = np.asarray(data.events)
    if f_hat.shape != times.shape:
        raise ArgumentError(f"predictions have {f_hat.shape[0]} entries but data has {times.shape[0]} records")
    return f_hat, times, events


def _count(f_hat: np.ndarray, times: np.ndarray, events: np.ndarray) -> Concordance:
    n = f_hat.shape[0]
    event_idx = np.flatnonzero(events == 1)
    block = max(1, _PAIR_BLOCK // max(n, 1))
    concordant = tied = comparable = 0
    for start in range(0, event_idx.shape[0], block):
        j = event_idx[start:start + block]
        later = times[None, :] > times[j][:, None]
        comparable += int(later.sum())
        concordant += int((later & (f_hat[None, :] < f_hat[j][:, None])).sum())
        tied += int((later & (f_hat[None, :] == f_hat[j][:, None])).sum())
    return _finish(concordant, tied, comparable)


def c_index(f_hat, data) -> Concordance:
    """Concordance of predicted log hazards with observed times over all records."""
    return _count(*_arrays(f_hat, data))


def c_index_subset(f_hat, data, mask) -> Concordance:
    """Concordance restricted to the records selected by a boolean mask."""
    f_hat, times, events = _arrays(f_hat, data)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != times.shape:
        raise ArgumentError(f"mask has {mask.shape[0]} entries but data has {times.shape[0]} records")
    return _count(f_hat[mask], times[mask], events[mask])


def c_index_bruteforce(f_hat, times, events) -> Concordance:
    """Reference double loop over ordered pairs."""
    concordant = tied = comparable = 0
    n = len(times)
    for i in range(n):
        for j in range(n):
            if i == j or not events[j] or not times[i] > times[j]:
                continue
            comparable += 1
            if f_hat[i] < f_hat[j]:
                concordant += 1
            elif f_hat[i] == f_hat[j]:
                tied += 1
    return _finish(concordant, tied, comparable)
