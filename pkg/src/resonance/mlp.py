"""Minimal fully connected ReLU network with exact backpropagation.

Architecture is fixed at [d_in, 20, 20, 1] (He-initialized weights, zero
biases, identity output).  Parameters can be flattened to a single
vector so the same optimizer steps drive linear and network models.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import Rng

HIDDEN = (20, 20)


@dataclass
class MlpParams:
    weights: list  # per layer, shape (fan_out, fan_in)
    biases: list   # per layer, shape (fan_out,)

    @property
    def layer_dims(self) -> list[int]:
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]

    def copy(self) -> "MlpParams":
        return MlpParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])


def he_init(d_in: int, rng: Rng, hidden=HIDDEN) -> MlpParams:
    """Weights ~ N(0, 2/fan_in), biases zero."""
    if d_in < 1:
        raise ValueError(f"need d_in >= 1, got {d_in}")
    dims = [d_in, *hidden, 1]
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        weights.append(rng.normals((fan_out, fan_in)) * np.sqrt(2.0 / fan_in))
        biases.append(np.zeros(fan_out))
    return MlpParams(weights, biases)


def forward(params: MlpParams, x: np.ndarray) -> np.ndarray:
    """Network output for a batch, shape (n,). ReLU hidden, identity out."""
    h = np.atleast_2d(np.asarray(x, dtype=float))
    if h.shape[1] != params.weights[0].shape[1]:
        raise ValueError(f"input dim {h.shape[1]} != {params.weights[0].shape[1]}")
    for w, b in zip(params.weights[:-1], params.biases[:-1]):
        h = np.maximum(0.0, h @ w.T + b)
    return (h @ params.weights[-1].T + params.biases[-1])[:, 0]


def grad(params: MlpParams, x: np.ndarray, y: np.ndarray):
    """Exact gradients of mean squared error over the batch.

    Returns (weight_grads, bias_grads) shaped like the parameters.  The
    ReLU subgradient at 0 is taken as 0.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape[0] == 0:
        raise ValueError("empty batch")
    acts = [x]
    h = x
    for w, b in zip(params.weights[:-1], params.biases[:-1]):
        h = np.maximum(0.0, h @ w.T + b)
        acts.append(h)
    yhat = (h @ params.weights[-1].T + params.biases[-1])[:, 0]
    n = y.size
    delta = (2.0 / n) * (yhat - y)[:, None]
    gw = [None] * len(params.weights)
    gb = [None] * len(params.biases)
    for layer in range(len(params.weights) - 1, -1, -1):
        gw[layer] = delta.T @ acts[layer]
        gb[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = (delta @ params.weights[layer]) * (acts[layer] > 0.0)
    return gw, gb


def flatten(weights: list, biases: list) -> np.ndarray:
    """Concatenate per-layer arrays into one parameter vector."""
    return np.concatenate([a.ravel() for a in weights] + [a.ravel() for a in biases])


def unflatten(vec: np.ndarray, like: MlpParams) -> MlpParams:
    """Inverse of :func:`flatten` against a template's shapes."""
    weights, biases = [], []
    pos = 0
    for w in like.weights:
        weights.append(vec[pos : pos + w.size].reshape(w.shape).copy())
        pos += w.size
    for b in like.biases:
        biases.append(vec[pos : pos + b.size].reshape(b.shape).copy())
        pos += b.size
    return MlpParams(weights, biases)
