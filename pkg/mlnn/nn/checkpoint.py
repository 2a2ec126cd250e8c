"""
Network checkpoints

A checkpoint is one JSON document holding the architecture, per-layer frozen
flags, every parameter array as a flat list, the seed and free-form training
metadata. Floats go through Python's shortest round-trip repr, so a
save/load cycle reproduces every parameter bit for bit.
"""

from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from ..utils.exceptions import ConfigurationError
from ..utils.io import read_json, write_json
from .layers import ConvLayer, DenseLayer
from .network import ErrorMapNetwork

CHECKPOINT_FORMAT = "mlnn-error-map"
CHECKPOINT_VERSION = 1


def network_to_dict(
    net: ErrorMapNetwork, seed: int = 0, metadata: Optional[Dict[str, Any]] = None
) -> Dict[str, Any]:
    """Serialize a network to plain JSON types."""
    layers = []
    for name, layer in net.named_layers():
        if isinstance(layer, ConvLayer):
            layers.append(
                {
                    "name": name,
                    "type": "conv",
                    "shape": list(layer.kernel.shape),
                    "frozen": layer.frozen,
                }
            )
        else:
            layers.append(
                {
                    "name": name,
                    "type": "dense",
                    "shape": list(layer.weights.shape),
                    "activation": layer.activation,
                    "frozen": layer.frozen,
                }
            )
    return {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "architecture": {
            "input_shape": list(net.input_shape),
            "z_dim": net.z_dim,
            "filters_first_layer": net.filters_first_layer,
            "layers": layers,
        },
        "parameters": {
            name: [float(v) for v in array.ravel()]
            for name, array in net.parameters().items()
        },
        "seed": seed,
        "metadata": metadata or {},
    }


def network_from_dict(data: Dict[str, Any]) -> Tuple[ErrorMapNetwork, Dict[str, Any]]:
    """Rebuild a network; returns it with {"seed", "metadata"}."""
    if data.get("format") != CHECKPOINT_FORMAT:
        raise ConfigurationError("Not a network checkpoint")
    arch = data["architecture"]
    params = data["parameters"]
    conv_layers, dense_layers = [], []
    try:
        for entry in arch["layers"]:
            name = entry["name"]
            shape = tuple(entry["shape"])
            if entry["type"] == "conv":
                conv_layers.append(
                    ConvLayer(
                        np.asarray(params[f"{name}.kernel"]).reshape(shape),
                        np.asarray(params[f"{name}.bias"]),
                        entry["frozen"],
                    )
                )
            else:
                dense_layers.append(
                    DenseLayer(
                        np.asarray(params[f"{name}.weights"]).reshape(shape),
                        np.asarray(params[f"{name}.bias"]),
                        entry["activation"],
                        entry["frozen"],
                    )
                )
    except (KeyError, ValueError) as e:
        raise ConfigurationError(f"Corrupt network checkpoint: {e}") from e
    if not dense_layers:
        raise ConfigurationError("Checkpoint has no output layer")
    net = ErrorMapNetwork(
        conv_layers,
        dense_layers[:-1],
        dense_layers[-1],
        int(arch["z_dim"]),
        tuple(arch["input_shape"]),
        int(arch["filters_first_layer"]),
    )
    return net, {"seed": data.get("seed", 0), "metadata": data.get("metadata", {})}


def save_network(
    net: ErrorMapNetwork,
    path: Union[str, Path],
    seed: int = 0,
    metadata: Optional[Dict[str, Any]] = None,
) -> Path:
    """Write a checkpoint file."""
    return write_json(path, network_to_dict(net, seed, metadata))


def load_network(path: Union[str, Path]) -> Tuple[ErrorMapNetwork, Dict[str, Any]]:
    """Read a checkpoint file written by save_network."""
    return network_from_dict(read_json(path))
