"""Minimal feed-forward Q-value network with analytic backpropagation.

ReLU hidden layers, linear output, trained by plain mini-batch gradient
descent on the squared Bellman residual. The selected-action output unit is
the only one that receives error signal per sample; targets are constants
with respect to differentiation (semi-gradient).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "MlpNetwork",
    "GradientSet",
    "SgdConfig",
    "AdamOptimizer",
    "init_network",
    "forward",
    "loss_and_gradients",
    "apply_gradients",
    "copy_parameters",
    "network_to_dict",
    "network_from_dict",
]

NETWORK_FORMAT = "mlp-v1"


class MlpNetwork:
    """Layer sizes plus per-layer weight matrices (fan_in, fan_out) and bias vectors."""

    def __init__(self, layer_sizes, weights, biases):
        self.layer_sizes = [int(s) for s in layer_sizes]
        self.weights = [np.asarray(w, dtype=float) for w in weights]
        self.biases = [np.asarray(b, dtype=float) for b in biases]
        if len(self.layer_sizes) < 2 or any(s < 1 for s in self.layer_sizes):
            raise ValueError("need at least two layers, all sizes >= 1")
        expected = list(zip(self.layer_sizes[:-1], self.layer_sizes[1:]))
        if len(self.weights) != len(expected) or len(self.biases) != len(expected):
            raise ValueError("parameter count does not match layer_sizes")
        for (n_in, n_out), w, b in zip(expected, self.weights, self.biases):
            if w.shape != (n_in, n_out) or b.shape != (n_out,):
                raise ValueError(f"parameter shapes inconsistent with layer sizes {n_in}->{n_out}")

    @property
    def input_size(self) -> int:
        return self.layer_sizes[0]

    @property
    def output_size(self) -> int:
        return self.layer_sizes[-1]

    def num_parameters(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))


@dataclass
class GradientSet:
    """Per-layer gradients, shape-congruent with the network they came from."""

    weights: list
    biases: list


@dataclass(frozen=True)
class SgdConfig:
    learning_rate: float
    batch_size: int

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError("learning rate must be non-negative")
        if self.batch_size < 1:
            raise ValueError("batch size must be positive")


def init_network(layer_sizes, rng: np.random.Generator) -> MlpNetwork:
    """Weights ~ U[-1/sqrt(fan_in), +1/sqrt(fan_in)], biases zero."""
    sizes = [int(s) for s in layer_sizes]
    if len(sizes) < 2 or any(s < 1 for s in sizes):
        raise ValueError("need at least two layers, all sizes >= 1")
    weights, biases = [], []
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / np.sqrt(n_in)
        weights.append(rng.uniform(-bound, bound, size=(n_in, n_out)))
        biases.append(np.zeros(n_out))
    return MlpNetwork(sizes, weights, biases)


def forward(net: MlpNetwork, x) -> np.ndarray:
    """Q-values for one state vector (n_in,) or a batch (n, n_in)."""
    h = np.asarray(x, dtype=float)
    if h.shape[-1] != net.input_size:
        raise ValueError(f"input length {h.shape[-1]} does not match network input {net.input_size}")
    last = len(net.weights) - 1
    for l, (w, b) in enumerate(zip(net.weights, net.biases)):
        h = h @ w + b
        if l < last:
            h = np.maximum(h, 0.0)
    return h


def loss_and_gradients(net: MlpNetwork, states, actions, targets):
    """Mean squared Bellman residual over a batch and its exact parameter gradients.

    Loss = (1/N) sum_i (y_i - Q(s_i, a_i))^2, differentiated through the
    selected Q outputs only. Returns (loss, GradientSet).
    """
    s = np.atleast_2d(np.asarray(states, dtype=float))
    a = np.asarray(actions, dtype=int).reshape(-1)
    y = np.asarray(targets, dtype=float).reshape(-1)
    n = s.shape[0]
    if a.shape[0] != n or y.shape[0] != n:
        raise ValueError("states, actions, and targets must have equal batch size")
    if s.shape[1] != net.input_size:
        raise ValueError("state width does not match network input size")
    if a.min(initial=0) < 0 or a.max(initial=0) >= net.output_size:
        raise ValueError("action index out of range")

    last = len(net.weights) - 1
    pre = []          # pre-activations per layer
    post = [s]        # layer inputs (post-activation of previous layer)
    h = s
    for l, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = h @ w + b
        pre.append(z)
        h = np.maximum(z, 0.0) if l < last else z
        if l < last:
            post.append(h)
    q = h
    rows = np.arange(n)
    residual = y - q[rows, a]
    loss = float(np.mean(residual ** 2))

    delta = np.zeros_like(q)
    delta[rows, a] = -2.0 * residual / n
    grad_w = [None] * len(net.weights)
    grad_b = [None] * len(net.biases)
    for l in range(last, -1, -1):
        grad_w[l] = post[l].T @ delta
        grad_b[l] = delta.sum(axis=0)
        if l > 0:
            delta = (delta @ net.weights[l].T) * (pre[l - 1] > 0.0)
    return loss, GradientSet(weights=grad_w, biases=grad_b)


def apply_gradients(net: MlpNetwork, grads: GradientSet, cfg: SgdConfig) -> MlpNetwork:
    """In-place descent step theta <- theta - alpha * grad; returns the network."""
    if len(grads.weights) != len(net.weights):
        raise ValueError("gradient/network layer count mismatch")
    for w, gw in zip(net.weights, grads.weights):
        if w.shape != gw.shape:
            raise ValueError("gradient shape mismatch")
        w -= cfg.learning_rate * gw
    for b, gb in zip(net.biases, grads.biases):
        if b.shape != gb.shape:
            raise ValueError("gradient shape mismatch")
        b -= cfg.learning_rate * gb
    return net


class AdamOptimizer:
    """Adam with the usual bias-corrected first/second moments.

    Plain gradient descent at the reference learning rate trains far too
    slowly for the Q-network to resolve per-action value differences (it
    plateaus well below the reproduction targets), so this is the default
    optimizer for the training harness; ``apply_gradients`` remains the
    plain-descent alternative.
    """

    def __init__(self, learning_rate: float, beta1: float = 0.9, beta2: float = 0.999, epsilon: float = 1e-8):
        if learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        self.learning_rate = float(learning_rate)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.epsilon = float(epsilon)
        self.t = 0
        self._m: dict = {}
        self._v: dict = {}

    def _slot(self, group: str, index: int, like: np.ndarray):
        key = (group, index)
        if key not in self._m:
            self._m[key] = np.zeros_like(like)
            self._v[key] = np.zeros_like(like)
        return self._m[key], self._v[key]

    def step(self, net: MlpNetwork, grads: GradientSet) -> MlpNetwork:
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for group, params, gs in (("w", net.weights, grads.weights), ("b", net.biases, grads.biases)):
            for i, (p, g) in enumerate(zip(params, gs)):
                if p.shape != g.shape:
                    raise ValueError("gradient shape mismatch")
                m, v = self._slot(group, i, p)
                m *= self.beta1
                m += (1.0 - self.beta1) * g
                v *= self.beta2
                v += (1.0 - self.beta2) * g * g
                p -= self.learning_rate * (m / c1) / (np.sqrt(v / c2) + self.epsilon)
        return net

    def to_dict(self) -> dict:
        return {
            "name": "adam",
            "learning_rate": self.learning_rate,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "epsilon": self.epsilon,
            "t": self.t,
            "m": {f"{g}{i}": m.tolist() for (g, i), m in self._m.items()},
            "v": {f"{g}{i}": v.tolist() for (g, i), v in self._v.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AdamOptimizer":
        opt = cls(d["learning_rate"], d["beta1"], d["beta2"], d["epsilon"])
        opt.t = int(d["t"])
        for key, val in d["m"].items():
            opt._m[(key[0], int(key[1:]))] = np.asarray(val, dtype=float)
        for key, val in d["v"].items():
            opt._v[(key[0], int(key[1:]))] = np.asarray(val, dtype=float)
        return opt


def copy_parameters(src: MlpNetwork, dst: MlpNetwork) -> None:
    """Deep-copy parameters src -> dst (architectures must match)."""
    if src.layer_sizes != dst.layer_sizes:
        raise ValueError("cannot copy parameters between different architectures")
    for d, s in zip(dst.weights, src.weights):
        np.copyto(d, s)
    for d, s in zip(dst.biases, src.biases):
        np.copyto(d, s)


def network_to_dict(net: MlpNetwork) -> dict:
    """Versioned serialization: layer sizes, then row-major weights and biases per layer."""
    return {
        "format": NETWORK_FORMAT,
        "layer_sizes": list(net.layer_sizes),
        "weights": [w.tolist() for w in net.weights],
        "biases": [b.tolist() for b in net.biases],
    }


def network_from_dict(d: dict) -> MlpNetwork:
    if d.get("format") != NETWORK_FORMAT:
        raise ValueError(f"unsupported network record format {d.get('format')!r}")
    return MlpNetwork(d["layer_sizes"], d["weights"], d["biases"])
