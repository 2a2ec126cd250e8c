"""
Layers of the error-map network

Convolution layers (rank 1 or 2, 3-wide kernels, zero padding of width 1,
ReLU) and dense layers (ReLU or linear). Every layer works on a batch: the
leading axis of every input is the sample index. Backward passes return the
input gradient together with the parameter gradients.
"""

from dataclasses import dataclass
from typing import Any, Dict, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..constants import KERNEL_WIDTH
from ..utils.exceptions import ShapeError, ValidationError

ACTIVATIONS = ("relu", "linear")

Cache = Dict[str, Any]


def relu(x: np.ndarray) -> np.ndarray:
    """Elementwise max(0, x)."""
    return np.maximum(x, 0.0)


@dataclass
class ConvLayer:
    """Zero-padded cross-correlation followed by ReLU.

    Attributes:
        kernel: [out_channels, in_channels, 3] or [out_channels, in_channels, 3, 3]
        bias: [out_channels]
        frozen: Excluded from training when set
    """

    kernel: np.ndarray
    bias: np.ndarray
    frozen: bool = False

    def __post_init__(self) -> None:
        self.kernel = np.asarray(self.kernel, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.kernel.ndim not in (3, 4):
            raise ShapeError(f"Kernel must have rank 3 or 4, got {self.kernel.shape}")
        if any(w != KERNEL_WIDTH for w in self.kernel.shape[2:]):
            raise ShapeError(f"Kernel spatial width must be 3, got {self.kernel.shape}")
        if self.bias.shape != (self.out_channels,):
            raise ShapeError(
                f"Bias shape {self.bias.shape} does not match {self.out_channels} filters"
            )

    @property
    def rank(self) -> int:
        return self.kernel.ndim - 2

    @property
    def in_channels(self) -> int:
        return int(self.kernel.shape[1])

    @property
    def out_channels(self) -> int:
        return int(self.kernel.shape[0])

    @property
    def parameter_count(self) -> int:
        return int(self.kernel.size + self.bias.size)

    def _check(self, x: np.ndarray) -> None:
        if x.ndim != self.rank + 2:
            raise ShapeError(
                f"Rank-{self.rank} convolution needs input [batch, channels, "
                f"{self.rank} spatial], got shape {x.shape}"
            )
        if x.shape[1] != self.in_channels:
            raise ShapeError(
                f"Expected {self.in_channels} input channels, got {x.shape[1]}"
            )

    def forward(self, x: np.ndarray) -> Tuple[np.ndarray, Cache]:
        self._check(x)
        if self.rank == 1:
            padded = np.pad(x, ((0, 0), (0, 0), (1, 1)))
            windows = sliding_window_view(padded, KERNEL_WIDTH, axis=2)
            pre = np.einsum("bclk,ock->bol", windows, self.kernel)
            pre += self.bias[None, :, None]
        else:
            padded = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
            windows = sliding_window_view(
                padded, (KERNEL_WIDTH, KERNEL_WIDTH), axis=(2, 3)
            )
            pre = np.einsum("bchwij,ocij->bohw", windows, self.kernel)
            pre += self.bias[None, :, None, None]
        return relu(pre), {"windows": windows, "pre": pre, "shape": x.shape}

    def backward(
        self, grad_out: np.ndarray, cache: Cache, need_input_grad: bool = True
    ) -> Tuple[np.ndarray, Dict[str, np.ndarray]]:
        g = grad_out * (cache["pre"] > 0)
        windows = cache["windows"]
        spatial_axes = tuple(range(2, g.ndim))
        grads = {"bias": g.sum(axis=(0,) + spatial_axes)}
        if self.rank == 1:
            grads["kernel"] = np.einsum("bol,bclk->ock", g, windows)
        else:
            grads["kernel"] = np.einsum("bohw,bchwij->ocij", g, windows)

        if not need_input_grad:
            return np.empty(0), grads

        batch, _, *spatial = cache["shape"]
        grad_padded = np.zeros((batch, self.in_channels, *(s + 2 for s in spatial)))
        if self.rank == 1:
            (length,) = spatial
            for k in range(KERNEL_WIDTH):
                grad_padded[:, :, k : k + length] += np.einsum(
                    "bol,oc->bcl", g, self.kernel[:, :, k]
                )
            return grad_padded[:, :, 1:-1], grads
        height, width = spatial
        for i in range(KERNEL_WIDTH):
            for j in range(KERNEL_WIDTH):
                grad_padded[:, :, i : i + height, j : j + width] += np.einsum(
                    "bohw,oc->bchw", g, self.kernel[:, :, i, j]
                )
        return grad_padded[:, :, 1:-1, 1:-1], grads


@dataclass
class DenseLayer:
    """Fully-connected layer y = act(W x + b).

    Attributes:
        weights: [n_out, n_in]
        bias: [n_out]
        activation: "relu" or "linear"
        frozen: Excluded from training when set
    """

    weights: np.ndarray
    bias: np.ndarray
    activation: str = "relu"
    frozen: bool = False

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.activation not in ACTIVATIONS:
            raise ValidationError(f"Unknown activation '{self.activation}'")
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise ShapeError(
                f"Dense weights {self.weights.shape} and bias {self.bias.shape} disagree"
            )

    @property
    def n_in(self) -> int:
        return int(self.weights.shape[1])

    @property
    def n_out(self) -> int:
        return int(self.weights.shape[0])

    @property
    def parameter_count(self) -> int:
        return int(self.weights.size + self.bias.size)

    def forward(self, x: np.ndarray) -> Tuple[np.ndarray, Cache]:
        if x.ndim != 2 or x.shape[1] != self.n_in:
            raise ShapeError(f"Dense layer expects [batch, {self.n_in}], got {x.shape}")
        pre = x @ self.weights.T + self.bias
        out = relu(pre) if self.activation == "relu" else pre
        return out, {"input": x, "pre": pre}

    def backward(
        self, grad_out: np.ndarray, cache: Cache, need_input_grad: bool = True
    ) -> Tuple[np.ndarray, Dict[str, np.ndarray]]:
        g = grad_out * (cache["pre"] > 0) if self.activation == "relu" else grad_out
        grads = {"weights": g.T @ cache["input"], "bias": g.sum(axis=0)}
        grad_in = g @ self.weights if need_input_grad else np.empty(0)
        return grad_in, grads


def conv_forward(layer: ConvLayer, x: np.ndarray) -> np.ndarray:
    """Apply a convolution layer to one unbatched input [channels, *spatial]."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != layer.rank + 1:
        raise ShapeError(
            f"Rank-{layer.rank} convolution needs input [channels, "
            f"{layer.rank} spatial], got shape {x.shape}"
        )
    out, _ = layer.forward(x[None])
    return out[0]
