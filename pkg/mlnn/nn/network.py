"""
Error-map network

One network predicts the correction between two grid levels from the
restricted coarser-level field and the parameter point z:

    field -> conv stack -> flatten -> concat z -> dense stack -> linear head

The head has one output per field entry, so the output is reshaped back to
the field's shape. Loss, exact reverse-mode gradients and the transfer
learning surgery (freeze everything, append one dense layer and a new head)
live here too.
"""

import copy
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..constants import FILTERS_FIRST_LAYER, KERNEL_WIDTH
from ..utils.exceptions import ShapeError, ValidationError
from .layers import ConvLayer, DenseLayer

Layer = Union[ConvLayer, DenseLayer]
PENALIZED = ("kernel", "weights")


def _as_z_matrix(zs: np.ndarray) -> np.ndarray:
    """Parameter points as [B, z_dim]; a 1-D input is one scalar z per sample."""
    zs = np.asarray(zs, dtype=np.float64)
    return zs[:, None] if zs.ndim == 1 else zs


@dataclass
class Batch:
    """Stacked training pairs.

    Attributes:
        fields: [B, *field_shape] network inputs
        zs: [B, z_dim] parameter points
        targets: [B, *field_shape] expected outputs
    """

    fields: np.ndarray
    zs: np.ndarray
    targets: np.ndarray

    def __post_init__(self) -> None:
        self.fields = np.asarray(self.fields, dtype=np.float64)
        self.zs = _as_z_matrix(self.zs)
        self.targets = np.asarray(self.targets, dtype=np.float64)
        if len(self.fields) == 0:
            raise ValidationError("Batch must not be empty")
        if self.targets.shape != self.fields.shape:
            raise ShapeError(
                f"Targets {self.targets.shape} do not match inputs {self.fields.shape}"
            )

    def __len__(self) -> int:
        return len(self.fields)

    @classmethod
    def from_pairs(
        cls, pairs: Sequence[Tuple[np.ndarray, np.ndarray, np.ndarray]]
    ) -> "Batch":
        """Stack (field_in, z, target) triples."""
        if not pairs:
            raise ValidationError("Batch must not be empty")
        fields, zs, targets = zip(*pairs)
        return cls(
            np.stack([np.asarray(f, dtype=np.float64) for f in fields]),
            np.stack([np.atleast_1d(np.asarray(z, dtype=np.float64)) for z in zs]),
            np.stack([np.asarray(t, dtype=np.float64) for t in targets]),
        )

    def subset(self, index: np.ndarray) -> "Batch":
        return Batch(self.fields[index], self.zs[index], self.targets[index])


@dataclass
class Gradients:
    """Gradient of the loss, one block per trainable parameter array."""

    blocks: Dict[str, np.ndarray] = field(default_factory=dict)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.blocks[name]

    def __contains__(self, name: object) -> bool:
        return name in self.blocks

    def keys(self) -> Iterable[str]:
        return self.blocks.keys()

    def flat(self) -> np.ndarray:
        if not self.blocks:
            return np.zeros(0)
        return np.concatenate([g.ravel() for g in self.blocks.values()])


@dataclass
class ErrorMapNetwork:
    """Conv + dense network mapping a restricted field and z to a correction.

    Attributes:
        conv_layers: Convolution stack (may be empty)
        fc_layers: Hidden dense layers (ReLU, or linear for a frozen old head)
        output_layer: Linear head with one output per field entry
        z_dim: Length of the parameter vector
        input_shape: [channels, *spatial] seen by the first conv layer
        filters_first_layer: Filter count of the first conv layer
    """

    conv_layers: List[ConvLayer]
    fc_layers: List[DenseLayer]
    output_layer: DenseLayer
    z_dim: int
    input_shape: Tuple[int, ...]
    filters_first_layer: int = FILTERS_FIRST_LAYER

    def __post_init__(self) -> None:
        self.input_shape = tuple(int(s) for s in self.input_shape)
        if self.output_layer.activation != "linear":
            raise ValidationError("The output layer must be linear")
        if self.output_layer.n_out != self.field_size:
            raise ShapeError(
                f"Head has {self.output_layer.n_out} outputs for a field of "
                f"{self.field_size} entries"
            )

    @property
    def rank(self) -> int:
        return len(self.input_shape) - 1

    @property
    def field_size(self) -> int:
        return int(np.prod(self.input_shape))

    @property
    def layers(self) -> List[Layer]:
        return [*self.conv_layers, *self.fc_layers, self.output_layer]

    def named_layers(self) -> Iterator[Tuple[str, Layer]]:
        for j, conv in enumerate(self.conv_layers, start=1):
            yield f"conv{j}", conv
        for j, dense in enumerate(self.fc_layers, start=1):
            yield f"fc{j}", dense
        yield "head", self.output_layer

    def parameters(self, trainable_only: bool = False) -> Dict[str, np.ndarray]:
        """Parameter arrays by name ("conv1.kernel", "fc2.bias", "head.weights")."""
        params: Dict[str, np.ndarray] = {}
        for prefix, layer in self.named_layers():
            if trainable_only and layer.frozen:
                continue
            if isinstance(layer, ConvLayer):
                params[f"{prefix}.kernel"] = layer.kernel
            else:
                params[f"{prefix}.weights"] = layer.weights
            params[f"{prefix}.bias"] = layer.bias
        return params

    def parameter_count(self, trainable_only: bool = False) -> int:
        return sum(p.size for p in self.parameters(trainable_only).values())

    def copy(self) -> "ErrorMapNetwork":
        return copy.deepcopy(self)

    def _as_batch(self, fields: np.ndarray) -> np.ndarray:
        """Accept [B, *input_shape] or, for one channel, [B, *spatial]."""
        if fields.shape[1:] == self.input_shape:
            return fields
        if self.input_shape[0] == 1 and fields.shape[1:] == self.input_shape[1:]:
            return fields[:, None]
        raise ShapeError(
            f"Field shape {fields.shape[1:]} does not match network input "
            f"{self.input_shape}"
        )

    def forward_batch(
        self, fields: np.ndarray, zs: np.ndarray, keep_caches: bool = False
    ) -> Tuple[np.ndarray, List[dict]]:
        """Batched forward pass; returns flat outputs [B, field_size]."""
        fields = np.asarray(fields, dtype=np.float64)
        zs = _as_z_matrix(zs)
        if zs.shape[1] != self.z_dim:
            raise ShapeError(f"z has length {zs.shape[1]}, expected {self.z_dim}")
        h = self._as_batch(fields)
        caches = []
        for conv in self.conv_layers:
            h, cache = conv.forward(h)
            caches.append(cache)
        a = np.concatenate([h.reshape(len(h), -1), zs], axis=1)
        for dense in [*self.fc_layers, self.output_layer]:
            a, cache = dense.forward(a)
            caches.append(cache)
        return a, (caches if keep_caches else [])

    def predict(self, field: np.ndarray, z: np.ndarray) -> np.ndarray:
        """Correction for one field, shaped like the field."""
        field = np.asarray(field, dtype=np.float64)
        z = np.atleast_1d(np.asarray(z, dtype=np.float64))
        out, _ = self.forward_batch(field[None], z[None])
        return out[0].reshape(field.shape)

    def predict_batch(self, fields: np.ndarray, zs: np.ndarray) -> np.ndarray:
        fields = np.asarray(fields, dtype=np.float64)
        out, _ = self.forward_batch(fields, zs)
        return out.reshape(fields.shape)

    def hidden_output(self, field: np.ndarray, z: np.ndarray, upto: int) -> np.ndarray:
        """Activations after the first `upto` dense layers (conv stack included)."""
        field = np.asarray(field, dtype=np.float64)
        h = self._as_batch(field[None])
        for conv in self.conv_layers:
            h, _ = conv.forward(h)
        a = np.concatenate([h.reshape(1, -1), np.atleast_1d(z)[None]], axis=1)
        for dense in [*self.fc_layers, self.output_layer][:upto]:
            a, _ = dense.forward(a)
        return a[0]


def _he(rng: np.random.Generator, shape: Tuple[int, ...], fan_in: int) -> np.ndarray:
    return rng.normal(0.0, np.sqrt(2.0 / fan_in), size=shape)


def _xavier(rng: np.random.Generator, n_out: int, n_in: int) -> np.ndarray:
    return rng.normal(0.0, np.sqrt(2.0 / (n_in + n_out)), size=(n_out, n_in))


def build_network(
    input_shape: Sequence[int],
    z_dim: int,
    n_cnn: int,
    n_fc: int,
    width: int,
    seed: int,
    filters_first_layer: int = FILTERS_FIRST_LAYER,
) -> ErrorMapNetwork:
    """
    Build a freshly initialized error-map network.

    Conv layer j has filters_first_layer * 2**(j-1) filters. ReLU layers get
    He-scaled normal weights, the linear head Xavier-scaled ones; biases
    start at zero.

    Args:
        input_shape: [channels, *spatial] of the network input
        z_dim: Parameter-vector length
        n_cnn: Number of conv layers
        n_fc: Number of hidden dense layers
        width: Neurons per hidden dense layer
        seed: Initialization seed
        filters_first_layer: Base filter count

    Returns:
        ErrorMapNetwork
    """
    input_shape = tuple(int(s) for s in input_shape)
    if len(input_shape) not in (2, 3):
        raise ShapeError(f"Input shape must be [channels, 1 or 2 spatial], got {input_shape}")
    if n_cnn < 0 or n_fc < 0 or z_dim < 0:
        raise ValidationError("Layer counts and z_dim must be non-negative")
    if n_fc > 0 and width < 1:
        raise ValidationError(f"Dense width must be positive, got {width}")
    rng = np.random.default_rng(seed)
    rank = len(input_shape) - 1
    spatial = input_shape[1:]

    conv_layers = []
    channels = input_shape[0]
    for j in range(n_cnn):
        filters = filters_first_layer * 2**j
        shape = (filters, channels) + (KERNEL_WIDTH,) * rank
        fan_in = channels * KERNEL_WIDTH**rank
        conv_layers.append(ConvLayer(_he(rng, shape, fan_in), np.zeros(filters)))
        channels = filters

    n_prev = channels * int(np.prod(spatial)) + z_dim
    fc_layers = []
    for _ in range(n_fc):
        fc_layers.append(
            DenseLayer(_he(rng, (width, n_prev), n_prev), np.zeros(width), "relu")
        )
        n_prev = width

    n_out = int(np.prod(input_shape))
    head = DenseLayer(_xavier(rng, n_out, n_prev), np.zeros(n_out), "linear")
    return ErrorMapNetwork(
        conv_layers, fc_layers, head, z_dim, input_shape, filters_first_layer
    )


def network_forward(
    net: ErrorMapNetwork, field: np.ndarray, z: np.ndarray
) -> np.ndarray:
    """Forward evaluation for one field; output has the field's shape."""
    return net.predict(field, z)


def loss_and_gradients(
    net: ErrorMapNetwork, batch: Batch, lam: float, need_gradients: bool = True
) -> Tuple[float, Optional[Gradients]]:
    """
    Sum of squared errors plus lam times the squared trainable weights.

    Biases are not penalized. Gradients cover trainable blocks only; the
    backward sweep stops at the earliest trainable layer.
    """
    if lam < 0:
        raise ValidationError(f"lambda must be non-negative, got {lam}")
    out, caches = net.forward_batch(batch.fields, batch.zs, keep_caches=need_gradients)
    targets = batch.targets.reshape(len(batch), -1)
    if targets.shape != out.shape:
        raise ShapeError(f"Targets {batch.targets.shape} do not match outputs")
    residual = out - targets
    trainable = net.parameters(trainable_only=True)
    penalty = sum(
        float(np.sum(p * p))
        for name, p in trainable.items()
        if name.endswith(PENALIZED)
    )
    value = float(np.sum(residual * residual)) + lam * penalty
    if not need_gradients:
        return value, None

    named = list(net.named_layers())
    trainable_index = [k for k, (_, layer) in enumerate(named) if not layer.frozen]
    blocks: Dict[str, np.ndarray] = {}
    if not trainable_index:
        return value, Gradients(blocks)
    first = trainable_index[0]
    n_conv = len(net.conv_layers)

    grad = 2.0 * residual
    for k in range(len(named) - 1, first - 1, -1):
        prefix, layer = named[k]
        need_input = k > first
        grad, layer_grads = layer.backward(grad, caches[k], need_input)
        if not layer.frozen:
            for part, g in layer_grads.items():
                blocks[f"{prefix}.{part}"] = g
        if k == n_conv and need_input:
            # strip the z columns and restore the conv output layout
            grad = grad[:, : grad.shape[1] - net.z_dim]
            if n_conv:
                grad = grad.reshape(caches[n_conv - 1]["pre"].shape)

    for name, g in blocks.items():
        if name.endswith(PENALIZED):
            g += 2.0 * lam * trainable[name]
    ordered = {name: blocks[name] for name in trainable}
    return value, Gradients(ordered)


def loss(net: ErrorMapNetwork, batch: Union[Batch, Sequence], lam: float) -> float:
    """Penalized sum-of-squares loss over a batch of (field_in, z, target)."""
    if not isinstance(batch, Batch):
        batch = Batch.from_pairs(batch)
    value, _ = loss_and_gradients(net, batch, lam, need_gradients=False)
    return value


def gradients(
    net: ErrorMapNetwork, batch: Union[Batch, Sequence], lam: float
) -> Gradients:
    """Exact gradient of loss() with respect to every trainable block."""
    if not isinstance(batch, Batch):
        batch = Batch.from_pairs(batch)
    _, grads = loss_and_gradients(net, batch, lam)
    assert grads is not None
    return grads


def freeze_all(net: ErrorMapNetwork) -> ErrorMapNetwork:
    """Return a copy with every layer frozen."""
    frozen = net.copy()
    for layer in frozen.layers:
        layer.frozen = True
    return frozen


def append_fc_layer(net: ErrorMapNetwork, n_new: int, seed: int) -> ErrorMapNetwork:
    """
    Freeze net and extend it for the next level.

    The old linear head becomes a frozen hidden layer; one new ReLU layer of
    width n_new and a fresh linear head follow it. Only the two new layers
    train.
    """
    if n_new < 1:
        raise ValidationError(f"New layer width must be positive, got {n_new}")
    rng = np.random.default_rng(seed)
    extended = freeze_all(net)
    old_head = extended.output_layer
    n_prev = old_head.n_out
    new_fc = DenseLayer(_he(rng, (n_new, n_prev), n_prev), np.zeros(n_new), "relu")
    new_head = DenseLayer(
        _xavier(rng, net.field_size, n_new), np.zeros(net.field_size), "linear"
    )
    extended.fc_layers = [*extended.fc_layers, old_head, new_fc]
    extended.output_layer = new_head
    return extended
