"""Network container and the adopted CNN architecture.

The full network takes 28x28 grayscale inputs through
Conv(10,5x5) -> BN -> ReLU -> Pool -> Conv(20,5x5) -> BN -> ReLU -> Pool
-> FC(50) -> BN -> ReLU -> FC(10), with intermediate shapes
(10,24,24), (10,12,12), (20,8,8), (20,4,4), (50), (10).
"""

from __future__ import annotations

import numpy as np

from ..rng import RngState
from .layers import BatchNorm, Conv2d, Flatten, Linear, MaxPool2x2, ReLU

__all__ = ["Network", "table1_network", "reduced_network"]


class Network:
    """An ordered stack of layers with dict-addressed trainable tensors."""

    def __init__(self, layers, input_shape):
        self.layers = layers
        self.input_shape = tuple(input_shape)  # (C, H, W) without batch

    def forward(self, x, training=False):
        """Run the stack; returns (logits, caches) for a later backward."""
        if x.ndim != 4 or x.shape[1:] != self.input_shape:
            raise ValueError(f"expected batch of shape (B, {self.input_shape}), got {x.shape}")
        caches = []
        for layer in self.layers:
            x, cache = layer.forward(x, training)
            caches.append(cache)
        return x, caches

    def backward(self, caches, dlogits):
        """Gradients for every trainable tensor, keyed '<layer>.<param>'."""
        if len(caches) != len(self.layers):
            raise ValueError("cache does not match this network's layer stack")
        grads = {}
        dy = dlogits
        for i in range(len(self.layers) - 1, -1, -1):
            layer = self.layers[i]
            dy, layer_grads = layer.backward(dy, caches[i], need_dx=(i > 0))
            for key, g in layer_grads.items():
                grads[f"{layer.name}.{key}"] = g
        return grads

    def params(self):
        """Live parameter arrays keyed '<layer>.<param>' (update in place)."""
        out = {}
        for layer in self.layers:
            if hasattr(layer, "params"):
                for key, arr in layer.params().items():
                    out[f"{layer.name}.{key}"] = arr
        return out

    def num_params(self):
        return sum(a.size for a in self.params().values())


def table1_network(rng: RngState, dtype=np.float32) -> Network:
    """The adopted 28x28 CNN."""
    return Network(
        [
            Conv2d("conv1", 1, 10, 5, rng.split("conv1"), dtype),
            BatchNorm("bn1", 10, dtype),
            ReLU("relu1"),
            MaxPool2x2("pool1"),
            Conv2d("conv2", 10, 20, 5, rng.split("conv2"), dtype),
            BatchNorm("bn2", 20, dtype),
            ReLU("relu2"),
            MaxPool2x2("pool2"),
            Flatten(),
            Linear("fc1", 20 * 4 * 4, 50, rng.split("fc1"), dtype),
            BatchNorm("bn3", 50, dtype),
            ReLU("relu3"),
            Linear("fc2", 50, 10, rng.split("fc2"), dtype),
        ],
        input_shape=(1, 28, 28),
    )


def reduced_network(rng: RngState, dtype=np.float64) -> Network:
    """A 6x6-input miniature with every layer type, for gradient checking."""
    return Network(
        [
            Conv2d("conv1", 1, 3, 3, rng.split("conv1"), dtype),
            BatchNorm("bn1", 3, dtype),
            ReLU("relu1"),
            MaxPool2x2("pool1"),
            Flatten(),
            Linear("fc1", 3 * 2 * 2, 6, rng.split("fc1"), dtype),
            BatchNorm("bn2", 6, dtype),
            ReLU("relu2"),
            Linear("fc2", 6, 3, rng.split("fc2"), dtype),
        ],
        input_shape=(1, 6, 6),
    )
