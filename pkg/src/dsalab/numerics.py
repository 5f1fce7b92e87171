"""Minimal dense network core used by the learning agents.

Implements exactly what the agents need and nothing more: affine layers with
ReLU / Softmax / Identity activations, a forward pass that retains a trace
for backpropagation, and gradient steps for the two loss shapes in play,

* squared temporal-difference error for a scalar-head value network, and
* TD-weighted log-probability ascent for a softmax-head policy network.

Gradients are verified against central finite differences (``grad_check``).
All updates are plain SGD; there is deliberately no momentum or adaptive
state to carry around.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

ACTIVATIONS = ("relu", "softmax", "identity")

# Softmax probabilities are floored at this value (then renormalized) so that
# log-probabilities stay finite no matter how peaked the policy becomes.
PROB_FLOOR = 1e-12


@dataclass
class Layer:
    weights: np.ndarray   # (fan_in, fan_out)
    biases: np.ndarray    # (fan_out,)
    activation: str

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.biases = np.asarray(self.biases, dtype=np.float64)
        if self.weights.ndim != 2 or self.biases.shape != (self.weights.shape[1],):
            raise ValueError("layer shapes do not chain")


@dataclass
class Mlp:
    """A stack of affine layers. Softmax may only cap the final layer."""

    input_dim: int
    layers: List[Layer]

    def __post_init__(self):
        if not self.layers:
            raise ValueError("need at least one layer")
        fan_in = self.input_dim
        for i, layer in enumerate(self.layers):
            if layer.weights.shape[0] != fan_in:
                raise ValueError(
                    f"layer {i} expects fan_in {layer.weights.shape[0]}, got {fan_in}")
            if layer.activation == "softmax" and i != len(self.layers) - 1:
                raise ValueError("softmax may only appear on the final layer")
            fan_in = layer.weights.shape[1]

    @property
    def output_dim(self) -> int:
        return self.layers[-1].weights.shape[1]

    @property
    def dims(self) -> Tuple[int, ...]:
        return (self.input_dim,) + tuple(l.weights.shape[1] for l in self.layers)

    def parameters(self) -> List[np.ndarray]:
        out: List[np.ndarray] = []
        for layer in self.layers:
            out.append(layer.weights)
            out.append(layer.biases)
        return out

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(p)) for p in self.parameters())

    def copy(self) -> "Mlp":
        return Mlp(self.input_dim,
                   [Layer(l.weights.copy(), l.biases.copy(), l.activation)
                    for l in self.layers])


@dataclass(frozen=True)
class ForwardTrace:
    """Per-layer tensors from one forward pass, kept for backpropagation."""

    inputs: np.ndarray                     # (B, input_dim)
    pre_activations: Tuple[np.ndarray, ...]
    activations: Tuple[np.ndarray, ...]
    squeezed: bool                         # input arrived 1-D

    @property
    def output(self) -> np.ndarray:
        out = self.activations[-1]
        return out[0] if self.squeezed else out


def init_mlp(dims: Sequence[int], activations: Sequence[str], seed: int) -> Mlp:
    """Build an Mlp with uniform fan-scaled weights and zero biases.

    Weights are drawn uniform in [-s, s] with s = sqrt(6 / (fan_in + fan_out)),
    which keeps activations at unit scale for ReLU stacks of this depth.
    """
    dims = [int(d) for d in dims]
    if len(dims) < 2 or any(d <= 0 for d in dims):
        raise ValueError("dims must chain at least input -> output, all positive")
    acts = [a.lower() for a in activations]
    if len(acts) != len(dims) - 1:
        raise ValueError("need one activation per layer")
    rng = np.random.default_rng(seed)
    layers = []
    for fan_in, fan_out, act in zip(dims[:-1], dims[1:], acts):
        scale = np.sqrt(6.0 / (fan_in + fan_out))
        weights = rng.uniform(-scale, scale, size=(fan_in, fan_out))
        layers.append(Layer(weights, np.zeros(fan_out), act))
    return Mlp(dims[0], layers)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise stable softmax, floored away from exact zero."""
    z = np.asarray(logits, dtype=np.float64)
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    probs = e / e.sum(axis=-1, keepdims=True)
    probs = np.maximum(probs, PROB_FLOOR)
    return probs / probs.sum(axis=-1, keepdims=True)


def _apply_activation(tag: str, z: np.ndarray) -> np.ndarray:
    if tag == "relu":
        return np.maximum(z, 0.0)
    if tag == "softmax":
        return softmax(z)
    return z


def forward(net: Mlp, x: np.ndarray) -> Tuple[np.ndarray, ForwardTrace]:
    """Run the network on one input row or a (B, input_dim) batch."""
    x = np.asarray(x, dtype=np.float64)
    squeezed = x.ndim == 1
    batch = x[None, :] if squeezed else x
    if batch.ndim != 2 or batch.shape[1] != net.input_dim:
        raise ValueError(f"input width {x.shape} does not match input_dim {net.input_dim}")
    if not np.all(np.isfinite(batch)):
        raise ValueError("non-finite input")
    pres = []
    acts = []
    h = batch
    for layer in net.layers:
        z = h @ layer.weights + layer.biases
        h = _apply_activation(layer.activation, z)
        pres.append(z)
        acts.append(h)
    trace = ForwardTrace(batch, tuple(pres), tuple(acts), squeezed)
    return trace.output, trace


def backprop(net: Mlp, trace: ForwardTrace, head_grad: np.ndarray
             ) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Gradients of a loss w.r.t. every (weights, biases) pair.

    ``head_grad`` is dLoss/d(final pre-activation), shaped like the final
    layer output (batched rows are summed into the returned gradients). For
    a softmax head pass the logit-space gradient directly; the log-softmax
    algebra below collapses the Jacobian for the caller.
    """
    g = np.asarray(head_grad, dtype=np.float64)
    if g.ndim == 1:
        g = g[None, :]
    if g.shape != trace.pre_activations[-1].shape:
        raise ValueError("head_grad shape does not match the final layer")
    grads: List[Tuple[np.ndarray, np.ndarray]] = [None] * len(net.layers)
    for idx in range(len(net.layers) - 1, -1, -1):
        below = trace.activations[idx - 1] if idx > 0 else trace.inputs
        grads[idx] = (below.T @ g, g.sum(axis=0))
        if idx > 0:
            g = g @ net.layers[idx].weights.T
            if net.layers[idx - 1].activation == "relu":
                g = g * (trace.pre_activations[idx - 1] > 0.0)
    return grads


def apply_gradients(net: Mlp, grads, lr: float) -> None:
    """In-place descent step: p <- p - lr * grad."""
    for layer, (dw, db) in zip(net.layers, grads):
        layer.weights -= lr * dw
        layer.biases -= lr * db


def critic_update(net: Mlp, trace: ForwardTrace, target: float, lr: float) -> float:
    """One SGD step on the squared TD error (target - V)^2; returns the loss.

    The network must have a scalar identity head; ``trace`` must come from a
    forward pass of this same net on the state being updated.
    """
    if net.output_dim != 1 or net.layers[-1].activation != "identity":
        raise ValueError("critic_update needs a scalar identity head")
    if not np.isfinite(target):
        raise ValueError("non-finite target")
    value = float(trace.activations[-1][0, 0])
    delta = target - value
    # d/dV (target - V)^2 = -2 delta
    head_grad = np.full((1, 1), -2.0 * delta)
    apply_gradients(net, backprop(net, trace, head_grad), lr)
    return delta * delta


def actor_update(net: Mlp, trace: ForwardTrace, action_index: int,
                 delta: float, lr: float) -> None:
    """Ascent step theta += lr * delta * grad(log pi(action)).

    With a softmax head the log-probability gradient at the logits is
    onehot(action) - pi, so the ascent direction is delta * (onehot - pi);
    implemented as a descent step on the negated quantity.
    """
    if net.layers[-1].activation != "softmax":
        raise ValueError("actor_update needs a softmax head")
    probs = trace.activations[-1][0]
    if not 0 <= action_index < probs.shape[0]:
        raise ValueError(f"action index {action_index} out of range")
    if not np.isfinite(delta):
        raise ValueError("non-finite TD error")
    onehot = np.zeros_like(probs)
    onehot[action_index] = 1.0
    head_grad = (delta * (probs - onehot))[None, :]
    apply_gradients(net, backprop(net, trace, head_grad), lr)


def _loss_and_head_grad(net: Mlp, trace: ForwardTrace, kind: str,
                        target: float, action_index: int, delta: float):
    """Scalar loss plus analytic head gradient for the two supported shapes."""
    if kind == "critic":
        value = float(trace.activations[-1][0, 0])
        loss = (target - value) ** 2
        head_grad = np.full((1, 1), -2.0 * (target - value))
    elif kind == "actor":
        probs = trace.activations[-1][0]
        loss = -delta * float(np.log(probs[action_index]))
        onehot = np.zeros_like(probs)
        onehot[action_index] = 1.0
        head_grad = (delta * (probs - onehot))[None, :]
    else:
        raise ValueError(f"unknown loss kind {kind!r}")
    return loss, head_grad


def grad_check(net: Mlp, x: np.ndarray, kind: str, eps: float = 1e-5,
               target: float = 0.0, action_index: int = 0,
               delta: float = 1.0) -> float:
    """Max relative error between analytic and central-difference gradients.

    ``kind`` is "critic" (squared TD error against ``target``) or "actor"
    (negated delta-weighted log-probability of ``action_index``). The error
    metric is max |analytic - numeric| / max(1, |numeric|).
    """
    if not 0.0 < eps <= 1e-3:
        raise ValueError("eps must lie in (0, 1e-3]")

    def loss_at() -> float:
        _, trace = forward(net, x)
        loss, _ = _loss_and_head_grad(net, trace, kind, target, action_index, delta)
        return loss

    _, trace = forward(net, x)
    _, head_grad = _loss_and_head_grad(net, trace, kind, target, action_index, delta)
    analytic = backprop(net, trace, head_grad)

    worst = 0.0
    for layer, (dw, db) in zip(net.layers, analytic):
        for param, grad in ((layer.weights, dw), (layer.biases, db)):
            it = np.nditer(param, flags=["multi_index"])
            for _ in it:
                ix = it.multi_index
                saved = param[ix]
                param[ix] = saved + eps
                hi = loss_at()
                param[ix] = saved - eps
                lo = loss_at()
                param[ix] = saved
                numeric = (hi - lo) / (2.0 * eps)
                err = abs(grad[ix] - numeric) / max(1.0, abs(numeric))
                worst = max(worst, err)
    return worst


# ---------------------------------------------------------------------------
# Weight snapshots (bit-exact checkpoint/restore)


def save_weights(net: Mlp, path) -> None:
    """Dump dims, activations and row-major weight arrays to an .npz file."""
    payload = {
        "dims": np.asarray(net.dims, dtype=np.int64),
        "activations": np.asarray([l.activation for l in net.layers]),
    }
    for i, layer in enumerate(net.layers):
        payload[f"weights_{i}"] = layer.weights
        payload[f"biases_{i}"] = layer.biases
    np.savez(path, **payload)


def load_weights(path) -> Mlp:
    with np.load(path, allow_pickle=False) as data:
        dims = data["dims"]
        acts = [str(a) for a in data["activations"]]
        layers = [Layer(data[f"weights_{i}"], data[f"biases_{i}"], act)
                  for i, act in enumerate(acts)]
    return Mlp(int(dims[0]), layers)
