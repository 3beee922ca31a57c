"""
Plain stochastic gradient descent and the step-decay learning-rate schedule.
"""

import math

import numpy as np

from errors import ArgumentError, UsageError


def sgd_step(params: dict[str, np.ndarray], grads: dict[str, np.ndarray], lr: float) -> None:
    """p <- p - lr * g for every named parameter, in place."""
    if not lr > 0:
        raise ArgumentError(f"learning rate must be positive, got {lr}")
    missing = set(params) - set(grads)
    if missing:
        raise UsageError(f"no gradient for parameters {sorted(missing)}")
    for name, param in params.items():
        grad = grads[name]
        if grad.shape != param.shape:
            raise UsageError(f"gradient for {name} has shape {grad.shape}, parameter has {param.shape}")
        param -= lr * grad


def step_decay(lr: float, epoch: int, epochs: int, decay: float = 0.1, decay_at: float = 0.75) -> float:
    """Learning rate for 1-based ``epoch``: multiplied by ``decay`` once ``decay_at`` of the run has passed."""
    boundary = math.ceil(decay_at * epochs)
    return lr * decay if epoch > boundary else lr
