"""
Tests for the differentiable layers and the gradient audit.
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from errors import CheckFailure, ConfigError, UsageError
from models.schemas import LayerKind, LayerSpec, LossKind
from nn.gradcheck import (
    CHECKED_LOSSES,
    DEFAULT_TOLERANCE,
    HEAD_KINDS,
    LAYER_KINDS,
    assert_passed,
    check_layer,
    check_loss,
    check_network,
    relative_error,
    run_suite,
    summary_line,
)
from nn.layers import Conv2d, CropIntegrate, Dense, Flatten, MaxPool2d, ReLU, SigmoidHead, layer_from_spec


@pytest.fixture
def rng():
    return np.random.default_rng(0)


class TestConv2d:
    """Tests for Conv2d."""

    def test_identity_kernel(self, rng):
        conv = Conv2d(filters=1, kernel=1)
        conv.build((6, 5, 1), rng)
        conv.params["weight"][...] = 1.0
        x = rng.random((3, 6, 5, 1))
        assert_array_equal(conv.forward(x), x)

    def test_same_padding_shape(self, rng):
        conv = Conv2d(filters=32, kernel=5, padding="same")
        assert conv.build((28, 28, 1), rng) == (28, 28, 32)

    def test_valid_padding_shape(self, rng):
        conv = Conv2d(filters=32, kernel=5, padding="valid")
        assert conv.build((32, 32, 3), rng) == (28, 28, 32)

    def test_strided_shape(self, rng):
        conv = Conv2d(filters=2, kernel=3, stride=2, padding=1)
        assert conv.build((7, 7, 1), rng) == (4, 4, 2)

    def test_matches_direct_sum(self, rng):
        conv = Conv2d(filters=2, kernel=3, padding="valid")
        conv.build((4, 4, 2), rng)
        x = rng.random((1, 4, 4, 2))
        out = conv.forward(x)
        weight = conv.params["weight"]
        expected = np.einsum("ijc,ijcf->f", x[0, 1:4, 0:3, :], weight)
        assert_allclose(out[0, 1, 0], expected)

    def test_non_positive_dims(self):
        with pytest.raises(ConfigError):
            Conv2d(filters=0, kernel=3)

    def test_kernel_larger_than_input(self, rng):
        with pytest.raises(ConfigError):
            Conv2d(filters=1, kernel=5, padding="valid").build((3, 3, 1), rng)

    def test_backward_without_forward(self, rng):
        conv = Conv2d(filters=1, kernel=3)
        conv.build((4, 4, 1), rng)
        with pytest.raises(UsageError):
            conv.backward(np.zeros((1, 4, 4, 1)))

    def test_zero_upstream_gives_zero_gradients(self, rng):
        conv = Conv2d(filters=2, kernel=3)
        conv.build((5, 5, 1), rng)
        conv.forward(rng.random((2, 5, 5, 1)))
        grad_x = conv.backward(np.zeros((2, 5, 5, 2)))
        assert not grad_x.any()
        assert not conv.grads["weight"].any()


class TestMaxPool2d:
    """Tests for MaxPool2d."""

    def test_block_max_and_routing(self, rng):
        pool = MaxPool2d(kernel=2)
        pool.build((2, 2, 1), rng)
        x = np.array([1.0, 2.0, 3.0, 4.0]).reshape(1, 2, 2, 1)
        assert pool.forward(x).item() == 4.0
        grad = pool.backward(np.full((1, 1, 1, 1), 7.0))
        assert grad.reshape(-1).tolist() == [0.0, 0.0, 0.0, 7.0]

    def test_ties_go_to_first_element(self, rng):
        pool = MaxPool2d(kernel=2)
        pool.build((2, 2, 1), rng)
        pool.forward(np.ones((1, 2, 2, 1)))
        grad = pool.backward(np.ones((1, 1, 1, 1)))
        assert grad.reshape(-1).tolist() == [1.0, 0.0, 0.0, 0.0]

    def test_odd_size_floors(self, rng):
        assert MaxPool2d(kernel=2).build((7, 7, 64), rng) == (3, 3, 64)


class TestDense:
    """Tests for Dense."""

    def test_closed_form_gradient(self, rng):
        dense = Dense(units=3)
        dense.build((4,), rng)
        x = rng.random((1, 4))
        upstream = rng.normal(size=(1, 3))
        dense.forward(x)
        grad_x = dense.backward(upstream)
        assert_allclose(dense.grads["weight"], np.outer(x[0], upstream[0]))
        assert_allclose(grad_x, upstream @ dense.params["weight"].T)

    def test_needs_flat_input(self, rng):
        with pytest.raises(ConfigError):
            Dense(units=2).build((2, 2), rng)

    def test_he_uniform_bounds(self, rng):
        dense = Dense(units=50)
        dense.build((24,), rng)
        assert np.abs(dense.params["weight"]).max() <= np.sqrt(6.0 / 24)
        assert not dense.params["bias"].any()


class TestElementwise:
    """Tests for ReLU, Flatten and SigmoidHead."""

    def test_relu_identity(self, rng):
        relu = ReLU()
        x = rng.normal(size=(4, 6))
        assert_allclose(relu.forward(x, cache=False) - relu.forward(-x, cache=False), x)

    def test_flatten_round_trip_shape(self, rng):
        flatten = Flatten()
        assert flatten.build((7, 7, 64), rng) == (3136,)
        x = rng.random((2, 7, 7, 64))
        flatten.forward(x)
        assert flatten.backward(np.ones((2, 3136))).shape == x.shape

    def test_sigmoid_head(self, rng):
        head = SigmoidHead()
        head.build((1,), rng)
        assert_allclose(head.forward(np.zeros((2, 1))), 0.5)


class TestCropIntegrate:
    """Tests for CropIntegrate."""

    def test_stage_shapes(self, rng):
        layer = CropIntegrate(hidden=32)
        assert layer.build((128, 5), rng) == (5,)
        assert layer.stage_shapes() == [(32, 5), (1, 5)]

    def test_max_over_hidden_units(self, rng):
        layer = CropIntegrate(hidden=4)
        layer.build((3, 2), rng)
        x = rng.random((2, 3, 2))
        assert_allclose(layer.forward(x), layer.hidden_units(x).max(axis=1))

    def test_wrong_rank(self, rng):
        with pytest.raises(ConfigError):
            CropIntegrate(hidden=4).build((128,), rng)


class TestLayerFromSpec:
    """Tests for layer_from_spec."""

    def test_conv_defaults_to_same(self):
        layer = layer_from_spec(LayerSpec(kind=LayerKind.CONV2D, filters=4, kernel=5))
        assert layer.padding == "same"

    def test_pool_defaults(self):
        layer = layer_from_spec(LayerSpec(kind=LayerKind.MAXPOOL2D))
        assert (layer.kernel, layer.stride) == (2, 2)

    def test_dense_requires_units(self):
        with pytest.raises(ValueError):
            LayerSpec(kind=LayerKind.DENSE)


class TestGradientAudit:
    """Tests for the finite-difference audit."""

    @pytest.mark.parametrize("kind", LAYER_KINDS + HEAD_KINDS)
    def test_layers_pass(self, kind):
        rng = np.random.default_rng(21)
        for _ in range(10):
            assert check_layer(kind, rng) <= DEFAULT_TOLERANCE

    @pytest.mark.parametrize("kind", CHECKED_LOSSES)
    def test_losses_pass(self, kind):
        rng = np.random.default_rng(22)
        for _ in range(10):
            assert check_loss(kind, rng) <= DEFAULT_TOLERANCE

    def test_network_passes(self):
        assert check_network(np.random.default_rng(23)) <= DEFAULT_TOLERANCE

    def test_flipped_sign_fails(self):
        assert check_layer(LayerKind.DENSE, np.random.default_rng(24), flip_sign=True) > 1.0

    def test_relative_error_scale_floor(self):
        assert relative_error(np.zeros(3), np.full(3, 1e-9)) == pytest.approx(0.1)

    def test_suite_summary(self):
        results = run_suite(trials=3, seed=2)
        assert_passed(results)
        assert len(results) == len(LAYER_KINDS) + len(HEAD_KINDS) + len(CHECKED_LOSSES) + 1
        assert summary_line(results).startswith("PASS 4 losses, 5 layer kinds, 2 heads, 1 network")

    def test_suite_negative_control(self):
        results = run_suite(trials=2, seed=3, flip_sign=LossKind.ORACLE.value)
        with pytest.raises(CheckFailure) as e:
            assert_passed(results)
        assert e.value.op == "oracle"
        assert e.value.exit_code == 5
