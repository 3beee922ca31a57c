"""
Finite-difference audit of every layer kind and every loss.

Each trial draws a small random instance, computes the analytic gradient
and compares it with central differences. The error of a trial is
max|analytic - numeric| / max(max|analytic|, max|numeric|, 1e-8).
Instances are drawn away from kinks: ReLU inputs keep |x| >= 0.1, pooled
values are spaced wider than the step, and crop-integrate instances are
redrawn until every max has a clear winner.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from errors import CheckFailure
from models.schemas import LayerKind, LayerSpec, LossKind, ModelConfig
from nn.layers import Conv2d, CropIntegrate, Dense, Flatten, Layer, MaxPool2d, ReLU, SigmoidHead
from nn.network import Network
from survival.dataset import SurvivalDataset
from survival.losses import loss_and_grad

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-4
PARAM_STEP = 1e-3
LOSS_STEP = 1e-5
NETWORK_STEP = 1e-6

LAYER_KINDS = [LayerKind.CONV2D, LayerKind.MAXPOOL2D, LayerKind.DENSE, LayerKind.RELU, LayerKind.FLATTEN]
HEAD_KINDS = [LayerKind.SIGMOID_HEAD, LayerKind.CROP_INTEGRATE]
CHECKED_LOSSES = [LossKind.FULL_BATCHED, LossKind.MINI_BATCHED, LossKind.ORACLE, LossKind.TWO_TASK]


@dataclass
class CheckResult:
    op: str
    trials: int
    max_rel_err: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_rel_err <= self.tolerance


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    scale = max(np.abs(analytic).max(initial=0.0), np.abs(numeric).max(initial=0.0), 1e-8)
    return float(np.abs(analytic - numeric).max(initial=0.0) / scale)


def numeric_gradient(fn: Callable[[], float], array: np.ndarray, step: float) -> np.ndarray:
    """Central differences of ``fn()`` with respect to every entry of ``array``, perturbed in place."""
    grad = np.zeros_like(array)
    for index in np.ndindex(array.shape):
        original = array[index]
        array[index] = original + step
        plus = fn()
        array[index] = original - step
        minus = fn()
        array[index] = original
        grad[index] = (plus - minus) / (2.0 * step)
    return grad


# ========================================
# Layer instances
# ========================================

def _conv_instance(rng: np.random.Generator) -> tuple[Layer, np.ndarray]:
    height, width = rng.integers(3, 9, size=2)
    kernel = int(rng.choice([k for k in (1, 3, 5) if k <= min(height, width)]))
    padding = rng.choice(["same", "valid", "1"])
    layer = Conv2d(
        filters=int(rng.integers(1, 4)),
        kernel=kernel,
        stride=int(rng.integers(1, 3)),
        padding=int(padding) if padding.isdigit() else str(padding),
    )
    channels = int(rng.integers(1, 3))
    layer.build((int(height), int(width), channels), rng)
    return layer, rng.random((2, height, width, channels))


def _maxpool_instance(rng: np.random.Generator) -> tuple[Layer, np.ndarray]:
    height, width = rng.integers(2, 9, size=2)
    channels = int(rng.integers(1, 3))
    shape = (2, int(height), int(width), channels)
    size = int(np.prod(shape))
    layer = MaxPool2d(kernel=2, stride=2)
    layer.build(shape[1:], rng)
    return layer, (rng.permutation(size) / size).reshape(shape)


def _dense_instance(rng: np.random.Generator) -> tuple[Layer, np.ndarray]:
    features = int(rng.integers(2, 9))
    layer = Dense(units=int(rng.integers(1, 5)))
    layer.build((features,), rng)
    return layer, rng.random((3, features))


def _relu_instance(rng: np.random.Generator) -> tuple[Layer, np.ndarray]:
    features = int(rng.integers(3, 9))
    layer = ReLU()
    layer.build((features,), rng)
    magnitude = rng.uniform(0.1, 1.0, size=(3, features))
    return layer, np.where(rng.random((3, features)) < 0.5, -magnitude, magnitude)


def _flatten_instance(rng: np.random.Generator) -> tuple[Layer, np.ndarray]:
    shape = tuple(int(d) for d in rng.integers(1, 5, size=3))
    layer = Flatten()
    layer.build(shape, rng)
    return layer, rng.random((2,) + shape)


def _sigmoid_instance(rng: np.random.Generator) -> tuple[Layer, np.ndarray]:
    layer = SigmoidHead()
    layer.build((1,), rng)
    return layer, rng.normal(size=(4, 1))


def _crop_instance(rng: np.random.Generator) -> tuple[Layer, np.ndarray]:
    features, crops, hidden = (int(d) for d in rng.integers((3, 2, 2), (9, 6, 7)))
    for _ in range(100):
        layer = CropIntegrate(hidden=hidden)
        layer.build((features, crops), rng)
        layer.params["bias"] = rng.normal(scale=0.1, size=hidden)
        x = rng.random((2, features, crops))
        ranked = np.sort(layer.hidden_units(x), axis=1)
        margin = (ranked[:, -1, :] - ranked[:, -2, :]).min()
        if margin > 4 * PARAM_STEP * max(1.0, np.abs(layer.params["weight"]).max()):
            return layer, x
    raise RuntimeError("could not draw a crop-integrate instance with separated maxima")


INSTANCES: dict[LayerKind, Callable[[np.random.Generator], tuple[Layer, np.ndarray]]] = {
    LayerKind.CONV2D: _conv_instance,
    LayerKind.MAXPOOL2D: _maxpool_instance,
    LayerKind.DENSE: _dense_instance,
    LayerKind.RELU: _relu_instance,
    LayerKind.FLATTEN: _flatten_instance,
    LayerKind.SIGMOID_HEAD: _sigmoid_instance,
    LayerKind.CROP_INTEGRATE: _crop_instance,
}


def check_layer(kind: LayerKind, rng: np.random.Generator, flip_sign: bool = False) -> float:
    """Relative error of one random instance of ``kind`` (input and parameter gradients)."""
    layer, x = INSTANCES[kind](rng)
    upstream = rng.normal(size=(x.shape[0],) + layer.output_shape)

    def objective() -> float:
        return float(np.sum(layer.forward(x, cache=False) * upstream))

    layer.forward(x)
    analytic = {"input": layer.backward(upstream), **layer.grads}
    numeric = {"input": numeric_gradient(objective, x, PARAM_STEP)}
    for name, param in layer.params.items():
        numeric[name] = numeric_gradient(objective, param, PARAM_STEP)

    sign = -1.0 if flip_sign else 1.0
    return max(relative_error(sign * analytic[name], numeric[name]) for name in numeric)


# ========================================
# Loss instances
# ========================================

def _survival_instance(rng: np.random.Generator) -> tuple[np.ndarray, SurvivalDataset]:
    n = int(rng.integers(2, 13))
    times = rng.integers(1, 7, size=n) / 2.0 if rng.random() < 0.5 else rng.exponential(size=n)
    events = (rng.random(n) < 0.7).astype(np.int8)
    events[rng.integers(n)] = 1
    labels = (rng.random(n) < 0.5).astype(np.int8)
    return rng.normal(size=n), SurvivalDataset.from_arrays(times, events, labels)


def check_loss(kind: LossKind, rng: np.random.Generator, flip_sign: bool = False) -> float:
    f, data = _survival_instance(rng)
    if kind == LossKind.MINI_BATCHED and len(data) > 2:
        size = int(rng.integers(2, len(data) + 1))
        index = rng.choice(len(data), size=size, replace=False)
        f, data = f[index], data.subset(index)

    analytic = loss_and_grad(kind, f, data).grad
    numeric = numeric_gradient(lambda: loss_and_grad(kind, f, data).value, f, LOSS_STEP)
    return relative_error(-analytic if flip_sign else analytic, numeric)


# ========================================
# Whole network
# ========================================

NETWORK_CONFIG = ModelConfig(
    input_shape=(8, 8, 1),
    layers=[
        LayerSpec(kind=LayerKind.CONV2D, filters=2, kernel=3, padding="same"),
        LayerSpec(kind=LayerKind.RELU),
        LayerSpec(kind=LayerKind.MAXPOOL2D, kernel=2),
        LayerSpec(kind=LayerKind.CONV2D, filters=2, kernel=3, padding="valid"),
        LayerSpec(kind=LayerKind.RELU),
        LayerSpec(kind=LayerKind.FLATTEN),
        LayerSpec(kind=LayerKind.DENSE, units=1),
    ],
)


def check_network(rng: np.random.Generator, flip_sign: bool = False, n: int = 5) -> float:
    """Parameter gradients of a two-conv network under the mini-batched Cox loss."""
    network = Network(NETWORK_CONFIG, rng)
    x = rng.random((n,) + network.input_shape)
    times = rng.exponential(size=n)
    data = SurvivalDataset.from_arrays(times, np.ones(n, dtype=np.int8))

    def objective() -> float:
        return loss_and_grad(LossKind.MINI_BATCHED, network.forward(x, cache=False), data).value

    upstream = loss_and_grad(LossKind.MINI_BATCHED, network.forward(x), data).grad
    analytic = network.backward(upstream)
    errors = []
    for name, param in network.parameters().items():
        numeric = numeric_gradient(objective, param, NETWORK_STEP)
        errors.append(relative_error(-analytic[name] if flip_sign else analytic[name], numeric))
    return max(errors)


# ========================================
# Suite
# ========================================

def run_suite(
    trials: int = 50,
    seed: int = 1,
    tolerance: float = DEFAULT_TOLERANCE,
    flip_sign: Optional[str] = None,
) -> list[CheckResult]:
    """
    Run every check ``trials`` times.

    ``flip_sign`` names one op (a layer kind, a loss kind or ``"network"``)
    whose analytic gradient is negated, as a negative control.
    """
    rng = np.random.default_rng(seed)
    results = []

    for kind in LAYER_KINDS + HEAD_KINDS:
        worst = max(check_layer(kind, rng, flip_sign == kind.value) for _ in range(trials))
        results.append(CheckResult(kind.value, trials, worst, tolerance))
    for kind in CHECKED_LOSSES:
        worst = max(check_loss(kind, rng, flip_sign == kind.value) for _ in range(trials))
        results.append(CheckResult(kind.value, trials, worst, tolerance))

    network_trials = max(1, trials // 10)
    worst = max(check_network(rng, flip_sign == "network") for _ in range(network_trials))
    results.append(CheckResult("network", network_trials, worst, tolerance))

    for result in results:
        logger.debug(f"{result.op}: max rel err {result.max_rel_err:.3e} over {result.trials} trials")
    return results


def assert_passed(results: list[CheckResult]) -> None:
    """Raise CheckFailure for the worst failing op, if any."""
    failures = [r for r in results if not r.passed]
    if failures:
        worst = max(failures, key=lambda r: r.max_rel_err)
        raise CheckFailure(worst.op, worst.max_rel_err, worst.tolerance)


def summary_line(results: list[CheckResult]) -> str:
    tolerance = results[0].tolerance if results else DEFAULT_TOLERANCE
    worst = max((r.max_rel_err for r in results), default=0.0)
    return (
        f"PASS {len(CHECKED_LOSSES)} losses, {len(LAYER_KINDS)} layer kinds, {len(HEAD_KINDS)} heads, "
        f"1 network, max rel err {worst:.1e} <= {tolerance:.0e}"
    )
