"""Layer specifications and network forward pass for encoder/decoder nets.

A network is a plain sequence of layer specs.  Parameters live outside the
specs (lists of dicts of ``Var``) so the same architecture description can be
reused for initialization, shape checking, and checkpointing.
"""

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad

__all__ = [
    "Affine", "Conv", "ConvT", "LeakyReLU", "Sigmoid", "Reshape",
    "Network", "forward",
]


@dataclass(frozen=True)
class Affine:
    n_in: int
    n_out: int


@dataclass(frozen=True)
class Conv:
    c_in: int
    c_out: int
    kernel: int
    stride: int = 1
    pad: int = 0


@dataclass(frozen=True)
class ConvT:
    c_in: int
    c_out: int
    kernel: int
    stride: int = 1
    pad: int = 0


@dataclass(frozen=True)
class LeakyReLU:
    slope: float = 0.2


@dataclass(frozen=True)
class Sigmoid:
    pass


@dataclass(frozen=True)
class Reshape:
    shape: tuple  # per-sample shape, batch axis excluded


def _out_shape(layer, shape):
    """Propagate a per-sample shape through one layer, validating extents."""
    if isinstance(layer, Affine):
        if shape != (layer.n_in,):
            raise ValueError(f"affine expects flat input of {layer.n_in}, got {shape}")
        return (layer.n_out,)
    if isinstance(layer, Conv):
        c, h, w = shape
        if c != layer.c_in:
            raise ValueError(f"conv expects {layer.c_in} channels, got {c}")
        oh = (h + 2 * layer.pad - layer.kernel) // layer.stride + 1
        ow = (w + 2 * layer.pad - layer.kernel) // layer.stride + 1
        if oh < 1 or ow < 1:
            raise ValueError(f"conv output collapsed: input {shape}, spec {layer}")
        return (layer.c_out, oh, ow)
    if isinstance(layer, ConvT):
        c, h, w = shape
        if c != layer.c_in:
            raise ValueError(f"conv_transpose expects {layer.c_in} channels, got {c}")
        oh = (h - 1) * layer.stride - 2 * layer.pad + layer.kernel
        ow = (w - 1) * layer.stride - 2 * layer.pad + layer.kernel
        return (layer.c_out, oh, ow)
    if isinstance(layer, Reshape):
        if int(np.prod(shape)) != int(np.prod(layer.shape)):
            raise ValueError(f"reshape size mismatch: {shape} -> {layer.shape}")
        return tuple(layer.shape)
    if isinstance(layer, (LeakyReLU, Sigmoid)):
        return shape
    raise TypeError(f"unknown layer spec {layer!r}")


def _init_layer(layer, rng):
    if isinstance(layer, Affine):
        bound = 1.0 / np.sqrt(layer.n_in)
        return {"w": rng.uniform(-bound, bound, (layer.n_in, layer.n_out)),
                "b": np.zeros(layer.n_out)}
    if isinstance(layer, Conv):
        k = layer.kernel
        bound = 1.0 / np.sqrt(layer.c_in * k * k)
        return {"w": rng.uniform(-bound, bound, (layer.c_out, layer.c_in, k, k)),
                "b": np.zeros(layer.c_out)}
    if isinstance(layer, ConvT):
        k = layer.kernel
        bound = 1.0 / np.sqrt(layer.c_in * k * k)
        return {"w": rng.uniform(-bound, bound, (layer.c_in, layer.c_out, k, k)),
                "b": np.zeros(layer.c_out)}
    return {}


def _apply(layer, params, x):
    if isinstance(layer, Affine):
        return ad.matmul(x, params["w"]) + params["b"]
    if isinstance(layer, Conv):
        out = ad.conv2d(x, params["w"], stride=layer.stride, pad=layer.pad)
        return out + ad.reshape(params["b"], (1, layer.c_out, 1, 1))
    if isinstance(layer, ConvT):
        out = ad.conv_transpose2d(x, params["w"], stride=layer.stride, pad=layer.pad)
        return out + ad.reshape(params["b"], (1, layer.c_out, 1, 1))
    if isinstance(layer, LeakyReLU):
        return ad.leaky_relu(x, slope=layer.slope)
    if isinstance(layer, Sigmoid):
        return ad.sigmoid(x)
    if isinstance(layer, Reshape):
        return ad.reshape(x, (x.shape[0],) + tuple(layer.shape))
    raise TypeError(f"unknown layer spec {layer!r}")


class Network:
    """A shape-checked chain of layers."""

    def __init__(self, layers, in_shape):
        self.layers = tuple(layers)
        self.in_shape = tuple(in_shape)
        shape = self.in_shape
        for layer in self.layers:
            shape = _out_shape(layer, shape)
        self.out_shape = shape

    def init_params(self, rng):
        """Seeded parameter arrays, one dict per layer (empty for stateless)."""
        return [_init_layer(layer, rng) for layer in self.layers]

    def forward(self, params, x):
        """Run the chain on a batch, recording the differentiation graph."""
        if not isinstance(x, ad.Var):
            x = ad.Var(x)
        if tuple(x.shape[1:]) != self.in_shape:
            raise ValueError(f"input shape {tuple(x.shape[1:])} does not match "
                             f"declared {self.in_shape}")
        for layer, p in zip(self.layers, params):
            x = _apply(layer, p, x)
        return x


def forward(net, params, x):
    return net.forward(params, x)
