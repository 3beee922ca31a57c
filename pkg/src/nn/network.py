"""
Sequential network mapping a batch of inputs to one log relative hazard each.

Presets:
- table1: 28x28x1 digits, two same-padded 5x5 convolutions
- simc: 32x32x3 nodule images, valid first convolution and same second
- integrate-head: five 128-D crop features, shared dense + max + dense

ReLU follows every convolution and every dense layer except the final one.
"""

import logging
from typing import Optional

import numpy as np

from errors import ConfigError, NumericAbort
from models.schemas import LayerKind, LayerSpec, ModelConfig, ModelPreset
from nn.layers import Layer, Shape, layer_from_spec

logger = logging.getLogger(__name__)

CROP_FEATURES = 128
CROP_COUNT = 5


def _conv(filters: int, padding: str) -> list[LayerSpec]:
    return [
        LayerSpec(kind=LayerKind.CONV2D, filters=filters, kernel=5, padding=padding),
        LayerSpec(kind=LayerKind.RELU),
        LayerSpec(kind=LayerKind.MAXPOOL2D, kernel=2, stride=2),
    ]


def _dense(*units: int) -> list[LayerSpec]:
    specs = []
    for width in units[:-1]:
        specs += [LayerSpec(kind=LayerKind.DENSE, units=width), LayerSpec(kind=LayerKind.RELU)]
    specs.append(LayerSpec(kind=LayerKind.DENSE, units=units[-1]))
    return specs


PRESETS: dict[ModelPreset, ModelConfig] = {
    ModelPreset.TABLE1: ModelConfig(
        preset=ModelPreset.TABLE1,
        input_shape=(28, 28, 1),
        layers=_conv(32, "same") + _conv(64, "same") + [LayerSpec(kind=LayerKind.FLATTEN)] + _dense(1024, 128, 1),
    ),
    ModelPreset.SIMC: ModelConfig(
        preset=ModelPreset.SIMC,
        input_shape=(32, 32, 3),
        layers=_conv(32, "valid") + _conv(64, "same") + [LayerSpec(kind=LayerKind.FLATTEN)] + _dense(100, 10, 1),
    ),
    ModelPreset.INTEGRATE_HEAD: ModelConfig(
        preset=ModelPreset.INTEGRATE_HEAD,
        input_shape=(CROP_FEATURES, CROP_COUNT),
        layers=[LayerSpec(kind=LayerKind.CROP_INTEGRATE, hidden=32)] + _dense(1),
    ),
}

# Architecture tables as printed, ReLU rows omitted.
PRESET_SHAPES: dict[ModelPreset, list[Shape]] = {
    ModelPreset.TABLE1: [
        (28, 28, 32), (14, 14, 32), (14, 14, 64), (7, 7, 64), (3136,), (1024,), (128,), (1,),
    ],
    ModelPreset.SIMC: [
        (28, 28, 32), (14, 14, 32), (14, 14, 64), (7, 7, 64), (3136,), (100,), (10,), (1,),
    ],
    ModelPreset.INTEGRATE_HEAD: [(32, 5), (1, 5), (1,)],
}


def preset_config(preset: ModelPreset) -> ModelConfig:
    try:
        return PRESETS[ModelPreset(preset)].model_copy(deep=True)
    except KeyError:
        raise ConfigError(f"no built-in model for preset '{ModelPreset(preset).value}'")


class Network:
    """
    Layer stack built from a ModelConfig with seeded He-uniform weights.

    Parameters are addressed as ``"<layer index>.<name>"``, e.g. ``"0.weight"``.
    """

    def __init__(self, config: ModelConfig, rng: Optional[np.random.Generator] = None):
        if config.init != "he-uniform":
            raise ConfigError(f"unknown init scheme '{config.init}'")
        self.config = config
        self.input_shape: Shape = tuple(config.input_shape)
        self.input_grad: Optional[np.ndarray] = None
        rng = rng if rng is not None else np.random.default_rng(0)

        self.layers: list[Layer] = []
        shape = self.input_shape
        for spec in config.layers:
            layer = layer_from_spec(spec)
            shape = layer.build(shape, rng)
            self.layers.append(layer)
        if shape != (1,):
            raise ConfigError(f"model must end in one scalar per sample, final shape is {shape}")

        expected = PRESET_SHAPES.get(config.preset)
        if expected is not None and self.shape_table() != expected:
            raise ConfigError(f"{config.preset.value} shapes {self.shape_table()} differ from {expected}")

        logger.debug(f"Built {config.preset.value} network with {self.n_parameters} parameters")

    @classmethod
    def from_preset(cls, preset: ModelPreset, rng: Optional[np.random.Generator] = None) -> "Network":
        return cls(preset_config(preset), rng)

    # ----------------------------------------
    # Introspection
    # ----------------------------------------

    def shape_table(self) -> list[Shape]:
        """Per-sample output shapes of every non-ReLU layer, as an architecture table prints them."""
        shapes = []
        for layer in self.layers:
            if layer.kind != LayerKind.RELU:
                shapes.extend(layer.stage_shapes())
        return shapes

    def parameters(self) -> dict[str, np.ndarray]:
        """Live views of every parameter array."""
        return {f"{i}.{name}": value for i, layer in enumerate(self.layers) for name, value in layer.params.items()}

    def gradients(self) -> dict[str, np.ndarray]:
        return {f"{i}.{name}": value for i, layer in enumerate(self.layers) for name, value in layer.grads.items()}

    @property
    def n_parameters(self) -> int:
        return int(sum(value.size for value in self.parameters().values()))

    def load_parameters(self, values: dict[str, np.ndarray]) -> None:
        """Copy arrays into the network; names and shapes must match exactly."""
        current = self.parameters()
        if set(values) != set(current):
            raise ConfigError(f"parameter names differ: expected {sorted(current)}, got {sorted(values)}")
        for name, target in current.items():
            source = np.asarray(values[name], dtype=np.float64)
            if source.shape != target.shape:
                raise ConfigError(f"parameter {name} has shape {source.shape}, expected {target.shape}")
            target[...] = source

    # ----------------------------------------
    # Passes
    # ----------------------------------------

    def forward(self, x: np.ndarray, cache: bool = True) -> np.ndarray:
        """(N, *input_shape) -> (N,) log relative hazards."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape[1:] != self.input_shape:
            raise ConfigError(f"input shape mismatch: expected (N, {', '.join(map(str, self.input_shape))}), got {x.shape}")
        if not cache:
            self.clear_cache()
        out = x
        for i, layer in enumerate(self.layers):
            out = layer.forward(out, cache=cache)
            if not np.isfinite(out).all():
                raise NumericAbort(f"non-finite activation after layer {i} ({layer.kind.value})")
        return out.reshape(x.shape[0])

    def backward(self, upstream: np.ndarray) -> dict[str, np.ndarray]:
        """Backpropagate dL/df through the cached forward pass; returns parameter gradients."""
        grad = np.asarray(upstream, dtype=np.float64).reshape(-1, 1)
        for i in reversed(range(len(self.layers))):
            layer = self.layers[i]
            grad = layer.backward(grad)
            if not np.isfinite(grad).all():
                raise NumericAbort(f"non-finite gradient at layer {i} ({layer.kind.value})")
        self.input_grad = grad
        return {name: value.copy() for name, value in self.gradients().items()}

    def clear_cache(self) -> None:
        for layer in self.layers:
            layer.clear_cache()

    def predict(self, x: np.ndarray, chunk_size: int = 64) -> np.ndarray:
        """Cache-free forward pass in chunks of ``chunk_size`` samples."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape[0] == 0:
            return np.zeros(0)
        return np.concatenate(
            [self.forward(x[start : start + chunk_size], cache=False) for start in range(0, x.shape[0], chunk_size)]
        )


def integrate_crop_features(network: Network, features: np.ndarray) -> np.ndarray:
    """
    Log relative hazard from each subject's five 128-D crop features.

    Accepts one subject (128, 5) or a batch (N, 128, 5).
    """
    features = np.asarray(features, dtype=np.float64)
    single = features.ndim == 2
    batch = features[None] if single else features
    if batch.shape[1:] != (CROP_FEATURES, CROP_COUNT):
        raise ConfigError(f"expected {CROP_COUNT} crop features of width {CROP_FEATURES}, got {batch.shape[1:]}")
    out = network.forward(batch, cache=False)
    return out[0] if single else out
