"""
Tests for the error-map network: layers, forward pass, gradients, surgery
"""

import numpy as np
import pytest

from mlnn.nn.layers import ConvLayer, DenseLayer, conv_forward, relu
from mlnn.nn.network import (
    Batch,
    append_fc_layer,
    build_network,
    freeze_all,
    gradients,
    loss,
    loss_and_gradients,
    network_forward,
)
from mlnn.utils.exceptions import ShapeError, ValidationError


def finite_difference(net, batch, lam, name, eps=1e-6):
    """Central-difference gradient of the loss for one parameter block."""
    param = net.parameters()[name]
    approx = np.zeros_like(param)
    flat = param.reshape(-1)
    for k in range(flat.size):
        saved = flat[k]
        flat[k] = saved + eps
        up = loss(net, batch, lam)
        flat[k] = saved - eps
        down = loss(net, batch, lam)
        flat[k] = saved
        approx.reshape(-1)[k] = (up - down) / (2 * eps)
    return approx


class TestLayers:
    """Test convolution and dense layers."""

    def test_relu(self):
        """ReLU clamps negatives to zero."""
        assert relu(np.array([-1.0, 0.0, 2.5])).tolist() == [0.0, 0.0, 2.5]

    def test_conv_1d_zero_padding(self):
        """A ones kernel over ones sees two neighbours inside, one at the edges."""
        layer = ConvLayer(np.ones((1, 1, 3)), np.zeros(1))
        out = conv_forward(layer, np.ones((1, 4)))
        assert out.shape == (1, 4)
        np.testing.assert_array_equal(out[0], [2.0, 3.0, 3.0, 2.0])

    def test_conv_2d_zero_padding(self):
        """Corners, edges and the centre of a 3x3 field see 4, 6 and 9 cells."""
        layer = ConvLayer(np.ones((1, 1, 3, 3)), np.zeros(1))
        out = conv_forward(layer, np.ones((1, 3, 3)))
        np.testing.assert_array_equal(
            out[0], [[4.0, 6.0, 4.0], [6.0, 9.0, 6.0], [4.0, 6.0, 4.0]]
        )

    def test_conv_applies_relu(self):
        """Negative pre-activations are clamped."""
        layer = ConvLayer(-np.ones((1, 1, 3)), np.zeros(1))
        out = conv_forward(layer, np.ones((1, 5)))
        assert np.all(out == 0.0)

    def test_conv_channel_mismatch(self):
        """Wrong channel count raises ShapeError."""
        layer = ConvLayer(np.ones((2, 3, 3)), np.zeros(2))
        with pytest.raises(ShapeError):
            conv_forward(layer, np.ones((1, 5)))

    def test_conv_rejects_wide_kernel(self):
        """Only 3-wide kernels are allowed."""
        with pytest.raises(ShapeError):
            ConvLayer(np.ones((1, 1, 5)), np.zeros(1))

    def test_dense_linear(self):
        """A linear dense layer is W x + b."""
        layer = DenseLayer(np.array([[1.0, 2.0], [0.0, -1.0]]), np.array([0.5, 0.0]), "linear")
        out, _ = layer.forward(np.array([[1.0, 1.0]]))
        np.testing.assert_array_equal(out, [[3.5, -1.0]])

    def test_dense_unknown_activation(self):
        """Only relu and linear are supported."""
        with pytest.raises(ValidationError):
            DenseLayer(np.ones((1, 1)), np.zeros(1), "tanh")


class TestBuildNetwork:
    """Test network construction and the forward pass."""

    def test_filters_double_per_layer(self):
        """Conv layer j has 4 * 2**(j-1) filters."""
        net = build_network((1, 11), z_dim=1, n_cnn=3, n_fc=1, width=5, seed=0)
        assert [c.out_channels for c in net.conv_layers] == [4, 8, 16]

    def test_head_is_linear_with_field_outputs(self):
        """The head has one linear output per field entry."""
        net = build_network((2, 4, 5), z_dim=3, n_cnn=1, n_fc=2, width=7, seed=0)
        assert net.output_layer.activation == "linear"
        assert net.output_layer.n_out == 40
        assert [d.activation for d in net.fc_layers] == ["relu", "relu"]

    def test_output_shape_matches_field(self):
        """The correction has the same shape as the input field."""
        net = build_network((1, 9), z_dim=1, n_cnn=2, n_fc=1, width=4, seed=1)
        field = np.linspace(0.0, 1.0, 9)
        assert network_forward(net, field, np.array([5.0])).shape == (9,)

    def test_2d_network(self):
        """A two-channel 2-D field works end to end."""
        net = build_network((2, 6, 6), z_dim=2, n_cnn=2, n_fc=1, width=8, seed=1)
        out = net.predict(np.ones((2, 6, 6)), np.array([0.1, 0.2]))
        assert out.shape == (2, 6, 6)

    def test_z_enters_the_dense_stack(self):
        """Different parameter points give different outputs."""
        net = build_network((1, 9), z_dim=1, n_cnn=1, n_fc=1, width=6, seed=2)
        field = np.linspace(0.0, 1.0, 9)
        a = net.predict(field, np.array([1.0]))
        b = net.predict(field, np.array([50.0]))
        assert not np.allclose(a, b)

    def test_same_seed_same_network(self):
        """Initialization is reproducible."""
        a = build_network((1, 9), 1, 2, 2, 5, seed=4)
        b = build_network((1, 9), 1, 2, 2, 5, seed=4)
        for name, value in a.parameters().items():
            np.testing.assert_array_equal(value, b.parameters()[name])

    def test_wrong_z_length(self, small_network):
        """A z of the wrong length raises ShapeError."""
        with pytest.raises(ShapeError):
            small_network.predict(np.zeros(9), np.array([1.0, 2.0]))

    def test_wrong_field_shape(self, small_network):
        """A field of the wrong length raises ShapeError."""
        with pytest.raises(ShapeError):
            small_network.predict(np.zeros(10), np.array([1.0]))

    def test_batch_matches_single(self, small_network, small_batch):
        """Batched prediction equals per-sample prediction."""
        batched = small_network.predict_batch(small_batch.fields, small_batch.zs)
        for k in range(len(small_batch)):
            single = small_network.predict(small_batch.fields[k], small_batch.zs[k])
            np.testing.assert_allclose(batched[k], single, rtol=1e-12, atol=1e-14)


class TestLoss:
    """Test the penalized loss and its gradient."""

    def test_zero_lambda_is_sum_of_squares(self, small_network, small_batch):
        """Without a penalty the loss is the plain squared error."""
        out = small_network.predict_batch(small_batch.fields, small_batch.zs)
        expected = float(np.sum((out - small_batch.targets) ** 2))
        assert loss(small_network, small_batch, 0.0) == pytest.approx(expected, rel=1e-12)

    def test_penalty_skips_biases(self, small_network, small_batch):
        """The penalty is lambda times the squared kernels and weights."""
        penalty = sum(
            float(np.sum(p * p))
            for name, p in small_network.parameters().items()
            if not name.endswith("bias")
        )
        base = loss(small_network, small_batch, 0.0)
        assert loss(small_network, small_batch, 0.5) == pytest.approx(
            base + 0.5 * penalty, rel=1e-12
        )

    def test_loss_accepts_pairs(self, small_network, small_batch):
        """A list of (field, z, target) triples is stacked into a Batch."""
        pairs = list(zip(small_batch.fields, small_batch.zs, small_batch.targets))
        assert loss(small_network, pairs, 1e-3) == pytest.approx(
            loss(small_network, small_batch, 1e-3), rel=1e-12
        )

    def test_negative_lambda(self, small_network, small_batch):
        """A negative penalty weight is rejected."""
        with pytest.raises(ValidationError):
            loss(small_network, small_batch, -1.0)

    def test_mismatched_targets(self):
        """Targets must have the inputs' shape."""
        with pytest.raises(ShapeError):
            Batch(np.zeros((2, 9)), np.zeros((2, 1)), np.zeros((2, 8)))

    @pytest.mark.parametrize("lam", [0.0, 1e-3])
    def test_gradient_matches_finite_differences(self, small_network, small_batch, lam):
        """Every gradient block agrees with central differences."""
        grads = gradients(small_network, small_batch, lam)
        assert set(grads.keys()) == set(small_network.parameters())
        for name in grads.keys():
            approx = finite_difference(small_network, small_batch, lam, name)
            np.testing.assert_allclose(grads[name], approx, rtol=1e-4, atol=1e-6)

    def test_gradient_2d(self):
        """Gradients are exact for 2-D convolutions too."""
        rng = np.random.default_rng(5)
        net = build_network((2, 4, 4), z_dim=2, n_cnn=2, n_fc=1, width=5, seed=8)
        batch = Batch(
            rng.normal(size=(3, 2, 4, 4)),
            rng.normal(size=(3, 2)),
            rng.normal(size=(3, 2, 4, 4)),
        )
        grads = gradients(net, batch, 1e-3)
        for name in ("conv1.kernel", "conv2.bias", "fc1.weights", "head.bias"):
            approx = finite_difference(net, batch, 1e-3, name)
            np.testing.assert_allclose(grads[name], approx, rtol=1e-4, atol=1e-6)


def relu_pattern(net, batch):
    """On/off state of every ReLU unit over the batch."""
    _, caches = net.forward_batch(batch.fields, batch.zs, keep_caches=True)
    return [cache["pre"] > 0 for cache in caches[:-1]]


def random_case(seed):
    """A random network of at most 500 parameters with a matching batch."""
    rng = np.random.default_rng(seed)
    if rng.integers(2):
        input_shape = (1, 3, 3)
    else:
        input_shape = (int(rng.integers(1, 3)), int(rng.integers(5, 9)))
    z_dim = int(rng.integers(1, 3))
    net = build_network(
        input_shape,
        z_dim=z_dim,
        n_cnn=int(rng.integers(0, 3)),
        n_fc=int(rng.integers(0, 3)),
        width=int(rng.integers(2, 6)),
        seed=seed,
        filters_first_layer=int(rng.integers(1, 3)),
    )
    size = int(rng.integers(2, 5))
    batch = Batch(
        rng.normal(size=(size, *input_shape)),
        rng.uniform(-1.0, 1.0, size=(size, z_dim)),
        0.5 * rng.normal(size=(size, *input_shape)),
    )
    lam = float(rng.choice([0.0, 1e-3]))
    return net, batch, lam


class TestGradientCheck:
    """Compare analytic gradients with central differences on random networks."""

    STEP = 1e-3

    @pytest.mark.parametrize("seed", range(20))
    def test_random_network(self, seed):
        """Every component agrees to relative 1e-5, denominator max(|g|, 1e-8)."""
        net, batch, lam = random_case(seed)
        assert net.parameter_count() <= 500
        grads = gradients(net, batch, lam)

        compared = skipped = 0
        for name, param in net.parameters().items():
            flat = param.reshape(-1)
            analytic = grads[name].reshape(-1)
            for k in range(flat.size):
                saved = flat[k]
                flat[k] = saved + self.STEP
                up, up_pattern = loss(net, batch, lam), relu_pattern(net, batch)
                flat[k] = saved - self.STEP
                down, down_pattern = loss(net, batch, lam), relu_pattern(net, batch)
                flat[k] = saved
                # loss is quadratic in one parameter while no ReLU switches
                if any(np.any(a != b) for a, b in zip(up_pattern, down_pattern)):
                    skipped += 1
                    continue
                numeric = (up - down) / (2.0 * self.STEP)
                g = analytic[k]
                assert abs(g - numeric) / max(abs(g), 1e-8) <= 1e-5, (name, k, g, numeric)
                compared += 1

        assert compared > 0
        assert skipped <= 0.1 * (compared + skipped)


class TestTransferSurgery:
    """Test freezing and appending a dense layer."""

    def test_freeze_all_copies(self, small_network):
        """freeze_all leaves the original trainable."""
        frozen = freeze_all(small_network)
        assert all(layer.frozen for layer in frozen.layers)
        assert not any(layer.frozen for layer in small_network.layers)
        assert frozen.parameter_count(trainable_only=True) == 0

    def test_append_keeps_old_output(self, small_network):
        """The frozen old head still computes the old prediction inside the new net."""
        extended = append_fc_layer(small_network, 7, seed=1)
        field = np.linspace(-1.0, 1.0, 9)
        z = np.array([3.0])
        upto = len(small_network.fc_layers) + 1
        np.testing.assert_allclose(
            extended.hidden_output(field, z, upto),
            small_network.predict(field, z),
            rtol=1e-13,
        )

    def test_append_trains_only_new_layers(self, small_network, small_batch):
        """Only the new dense layer and the new head get gradients."""
        extended = append_fc_layer(small_network, 7, seed=1)
        old_head = extended.fc_layers[-2]
        assert old_head.frozen and old_head.activation == "linear"
        new_fc = extended.fc_layers[-1]
        assert new_fc.weights.shape == (7, 9)
        grads = gradients(extended, small_batch, 1e-3)
        assert set(grads.keys()) == {"fc3.weights", "fc3.bias", "head.weights", "head.bias"}
        for name in grads.keys():
            approx = finite_difference(extended, small_batch, 1e-3, name)
            np.testing.assert_allclose(grads[name], approx, rtol=1e-4, atol=1e-6)

    def test_transfer_trains_few_parameters(self):
        """A deep level-2 network grows by well under 10% trainable parameters."""
        net = build_network((1, 101), z_dim=1, n_cnn=4, n_fc=3, width=100, seed=0)
        extended = append_fc_layer(net, 100, seed=1)
        trainable = extended.parameter_count(trainable_only=True)
        assert trainable == (100 * 101 + 100) + (101 * 100 + 101)
        assert trainable < 0.1 * net.parameter_count()

    def test_append_rejects_zero_width(self, small_network):
        """The new layer needs at least one neuron."""
        with pytest.raises(ValidationError):
            append_fc_layer(small_network, 0, seed=1)

    def test_frozen_loss_has_no_gradients(self, small_network, small_batch):
        """A fully frozen network has an empty gradient."""
        value, grads = loss_and_gradients(freeze_all(small_network), small_batch, 0.0)
        assert np.isfinite(value)
        assert grads.flat().size == 0
