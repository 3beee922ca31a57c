"""
Differentiable layers over float64 numpy arrays in NHWC layout.

Every layer follows the same protocol:
- ``build(input_shape, rng)`` creates parameters and returns the
  per-sample output shape, raising ConfigError when the shape is unusable
- ``forward(x, cache=True)`` maps a batch (N, *input_shape) to
  (N, *output_shape), keeping what backward needs when ``cache`` is set
- ``backward(upstream)`` returns dL/dx and stores parameter gradients in
  ``grads`` (overwritten, never accumulated)
"""

import logging
from typing import Optional, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import expit

from errors import ConfigError, UsageError
from models.schemas import LayerKind, LayerSpec

logger = logging.getLogger(__name__)

Shape = tuple[int, ...]


def he_uniform(shape: Shape, fan_in: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform on [-sqrt(6 / fan_in), sqrt(6 / fan_in)]."""
    limit = np.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=shape)


class Layer:
    """Base class: parameterless identity with the cache bookkeeping."""

    kind: LayerKind

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}
        self.input_shape: Optional[Shape] = None
        self.output_shape: Optional[Shape] = None
        self._cache = None

    def build(self, input_shape: Shape, rng: np.random.Generator) -> Shape:
        self.input_shape = tuple(input_shape)
        self.output_shape = self._infer_shape(self.input_shape)
        self._init_params(rng)
        return self.output_shape

    def _infer_shape(self, input_shape: Shape) -> Shape:
        return input_shape

    def _init_params(self, rng: np.random.Generator) -> None:
        pass

    def stage_shapes(self) -> list[Shape]:
        """Per-sample shapes this layer prints in an architecture table."""
        return [self.output_shape]

    def forward(self, x: np.ndarray, cache: bool = True) -> np.ndarray:
        raise NotImplementedError

    def backward(self, upstream: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def clear_cache(self) -> None:
        self._cache = None

    def _cached(self):
        if self._cache is None:
            raise UsageError(f"{self.kind.value} backward called without a forward cache")
        return self._cache

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.input_shape} -> {self.output_shape})"


# ========================================
# Convolution and pooling
# ========================================

def _padding_amounts(padding: Union[int, str, None], kernel: int) -> tuple[int, int]:
    if padding in (None, "valid"):
        return 0, 0
    if padding == "same":
        low = (kernel - 1) // 2
        return low, kernel - 1 - low
    return int(padding), int(padding)


class Conv2d(Layer):
    """
    2D convolution, weights (kh, kw, C_in, C_out), computed as one matmul
    over im2col windows.
    """

    kind = LayerKind.CONV2D

    def __init__(self, filters: int, kernel: int, stride: int = 1, padding: Union[int, str, None] = "same"):
        super().__init__()
        if filters <= 0 or kernel <= 0 or stride <= 0:
            raise ConfigError(f"conv2d dims must be positive, got filters={filters} kernel={kernel} stride={stride}")
        self.filters = filters
        self.kernel = kernel
        self.stride = stride
        self.padding = padding
        self.pad = _padding_amounts(padding, kernel)

    def _infer_shape(self, input_shape: Shape) -> Shape:
        if len(input_shape) != 3:
            raise ConfigError(f"conv2d expects (H, W, C) input, got {input_shape}")
        height, width, _ = input_shape
        out_h = (height + sum(self.pad) - self.kernel) // self.stride + 1
        out_w = (width + sum(self.pad) - self.kernel) // self.stride + 1
        if out_h <= 0 or out_w <= 0:
            raise ConfigError(f"conv2d kernel {self.kernel} does not fit input {input_shape}")
        return (out_h, out_w, self.filters)

    def _init_params(self, rng: np.random.Generator) -> None:
        channels = self.input_shape[2]
        fan_in = self.kernel * self.kernel * channels
        self.params = {
            "weight": he_uniform((self.kernel, self.kernel, channels, self.filters), fan_in, rng),
            "bias": np.zeros(self.filters),
        }

    def _columns(self, x: np.ndarray) -> np.ndarray:
        low, high = self.pad
        padded = np.pad(x, ((0, 0), (low, high), (low, high), (0, 0)))
        windows = sliding_window_view(padded, (self.kernel, self.kernel), axis=(1, 2))
        windows = windows[:, :: self.stride, :: self.stride]
        out_h, out_w, _ = self.output_shape
        windows = windows[:, :out_h, :out_w]
        # (N, Ho, Wo, C, kh, kw) -> rows ordered like weight.reshape(-1, C_out)
        return windows.transpose(0, 1, 2, 4, 5, 3).reshape(-1, self.kernel * self.kernel * x.shape[3])

    def forward(self, x: np.ndarray, cache: bool = True) -> np.ndarray:
        cols = self._columns(x)
        weight = self.params["weight"].reshape(-1, self.filters)
        out = cols @ weight + self.params["bias"]
        if cache:
            self._cache = (x.shape, cols)
        return out.reshape((x.shape[0],) + self.output_shape)

    def backward(self, upstream: np.ndarray) -> np.ndarray:
        x_shape, cols = self._cached()
        n, height, width, channels = x_shape
        out_h, out_w, _ = self.output_shape
        grad_out = upstream.reshape(-1, self.filters)

        weight = self.params["weight"]
        self.grads = {
            "weight": (cols.T @ grad_out).reshape(weight.shape),
            "bias": grad_out.sum(axis=0),
        }

        grad_cols = (grad_out @ weight.reshape(-1, self.filters).T).reshape(
            n, out_h, out_w, self.kernel, self.kernel, channels
        )
        low, high = self.pad
        grad_padded = np.zeros((n, height + low + high, width + low + high, channels))
        s = self.stride
        for i in range(self.kernel):
            for j in range(self.kernel):
                grad_padded[:, i : i + s * out_h : s, j : j + s * out_w : s, :] += grad_cols[:, :, :, i, j, :]
        return grad_padded[:, low : low + height, low : low + width, :]


class MaxPool2d(Layer):
    """Max pooling; ties go to the first element in row-major window order."""

    kind = LayerKind.MAXPOOL2D

    def __init__(self, kernel: int = 2, stride: Optional[int] = None):
        super().__init__()
        self.kernel = kernel
        self.stride = stride or kernel
        if self.kernel <= 0 or self.stride <= 0:
            raise ConfigError(f"maxpool2d dims must be positive, got kernel={kernel} stride={stride}")

    def _infer_shape(self, input_shape: Shape) -> Shape:
        if len(input_shape) != 3:
            raise ConfigError(f"maxpool2d expects (H, W, C) input, got {input_shape}")
        height, width, channels = input_shape
        out_h = (height - self.kernel) // self.stride + 1
        out_w = (width - self.kernel) // self.stride + 1
        if out_h <= 0 or out_w <= 0:
            raise ConfigError(f"maxpool2d window {self.kernel} does not fit input {input_shape}")
        return (out_h, out_w, channels)

    def forward(self, x: np.ndarray, cache: bool = True) -> np.ndarray:
        out_h, out_w, _ = self.output_shape
        windows = sliding_window_view(x, (self.kernel, self.kernel), axis=(1, 2))
        windows = windows[:, :: self.stride, :: self.stride][:, :out_h, :out_w]
        flat = windows.reshape(windows.shape[:4] + (-1,))
        argmax = flat.argmax(axis=-1)
        out = np.take_along_axis(flat, argmax[..., None], axis=-1)[..., 0]
        if cache:
            self._cache = (x.shape, argmax)
        return out

    def backward(self, upstream: np.ndarray) -> np.ndarray:
        x_shape, argmax = self._cached()
        n, out_h, out_w, channels = argmax.shape
        di, dj = np.divmod(argmax, self.kernel)
        batch_idx, row, col, chan = np.indices((n, out_h, out_w, channels), sparse=True)
        grad = np.zeros(x_shape)
        np.add.at(grad, (batch_idx, row * self.stride + di, col * self.stride + dj, chan), upstream)
        return grad


# ========================================
# Dense layers and elementwise maps
# ========================================

class Dense(Layer):
    kind = LayerKind.DENSE

    def __init__(self, units: int):
        super().__init__()
        if units <= 0:
            raise ConfigError(f"dense units must be positive, got {units}")
        self.units = units

    def _infer_shape(self, input_shape: Shape) -> Shape:
        if len(input_shape) != 1:
            raise ConfigError(f"dense expects a flat input, got {input_shape}; add a flatten layer")
        return (self.units,)

    def _init_params(self, rng: np.random.Generator) -> None:
        fan_in = self.input_shape[0]
        self.params = {
            "weight": he_uniform((fan_in, self.units), fan_in, rng),
            "bias": np.zeros(self.units),
        }

    def forward(self, x: np.ndarray, cache: bool = True) -> np.ndarray:
        if cache:
            self._cache = x
        return x @ self.params["weight"] + self.params["bias"]

    def backward(self, upstream: np.ndarray) -> np.ndarray:
        x = self._cached()
        self.grads = {"weight": x.T @ upstream, "bias": upstream.sum(axis=0)}
        return upstream @ self.params["weight"].T


class ReLU(Layer):
    kind = LayerKind.RELU

    def forward(self, x: np.ndarray, cache: bool = True) -> np.ndarray:
        if cache:
            self._cache = x > 0
        return np.maximum(x, 0.0)

    def backward(self, upstream: np.ndarray) -> np.ndarray:
        return upstream * self._cached()


class Flatten(Layer):
    kind = LayerKind.FLATTEN

    def _infer_shape(self, input_shape: Shape) -> Shape:
        return (int(np.prod(input_shape)),)

    def forward(self, x: np.ndarray, cache: bool = True) -> np.ndarray:
        if cache:
            self._cache = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, upstream: np.ndarray) -> np.ndarray:
        return upstream.reshape(self._cached())


class SigmoidHead(Layer):
    """Elementwise logistic map, used to expose probabilities from a logit."""

    kind = LayerKind.SIGMOID_HEAD

    def forward(self, x: np.ndarray, cache: bool = True) -> np.ndarray:
        out = expit(x)
        if cache:
            self._cache = out
        return out

    def backward(self, upstream: np.ndarray) -> np.ndarray:
        out = self._cached()
        return upstream * out * (1.0 - out)


class CropIntegrate(Layer):
    """
    Shared dense map applied to each crop's feature vector, then a max over
    the hidden units of each crop.

    Input (features, crops), e.g. 128 x 5; hidden (hidden, crops); output (crops,).
    """

    kind = LayerKind.CROP_INTEGRATE

    def __init__(self, hidden: int):
        super().__init__()
        if hidden <= 0:
            raise ConfigError(f"crop-integrate hidden units must be positive, got {hidden}")
        self.hidden = hidden

    def _infer_shape(self, input_shape: Shape) -> Shape:
        if len(input_shape) != 2:
            raise ConfigError(f"crop-integrate expects (features, crops) input, got {input_shape}")
        return (input_shape[1],)

    def _init_params(self, rng: np.random.Generator) -> None:
        features = self.input_shape[0]
        self.params = {
            "weight": he_uniform((features, self.hidden), features, rng),
            "bias": np.zeros(self.hidden),
        }

    def stage_shapes(self) -> list[Shape]:
        crops = self.input_shape[1]
        return [(self.hidden, crops), (1, crops)]

    def hidden_units(self, x: np.ndarray) -> np.ndarray:
        """(N, hidden, crops) activations before the max."""
        return np.einsum("nfk,fh->nhk", x, self.params["weight"]) + self.params["bias"][:, None]

    def forward(self, x: np.ndarray, cache: bool = True) -> np.ndarray:
        hidden = self.hidden_units(x)
        argmax = hidden.argmax(axis=1)
        if cache:
            self._cache = (x, argmax)
        return np.take_along_axis(hidden, argmax[:, None, :], axis=1)[:, 0, :]

    def backward(self, upstream: np.ndarray) -> np.ndarray:
        x, argmax = self._cached()
        grad_hidden = np.zeros((x.shape[0], self.hidden, x.shape[2]))
        np.put_along_axis(grad_hidden, argmax[:, None, :], upstream[:, None, :], axis=1)
        self.grads = {
            "weight": np.einsum("nfk,nhk->fh", x, grad_hidden),
            "bias": grad_hidden.sum(axis=(0, 2)),
        }
        return np.einsum("nhk,fh->nfk", grad_hidden, self.params["weight"])


# ========================================
# Construction from specs
# ========================================

def layer_from_spec(spec: LayerSpec) -> Layer:
    """Instantiate an unbuilt layer from its declarative spec."""
    if spec.kind == LayerKind.CONV2D:
        padding = "same" if spec.padding is None else spec.padding
        return Conv2d(spec.filters, spec.kernel, stride=spec.stride or 1, padding=padding)
    if spec.kind == LayerKind.MAXPOOL2D:
        return MaxPool2d(kernel=spec.kernel or 2, stride=spec.stride)
    if spec.kind == LayerKind.DENSE:
        return Dense(spec.units)
    if spec.kind == LayerKind.CROP_INTEGRATE:
        return CropIntegrate(spec.hidden)
    return {
        LayerKind.RELU: ReLU,
        LayerKind.FLATTEN: Flatten,
        LayerKind.SIGMOID_HEAD: SigmoidHead,
    }[spec.kind]()
