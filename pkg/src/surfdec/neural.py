"""One-hidden-layer feedforward classifier and the hardware step model.

The activation is sigma(v) = 1 / (1 + exp(v)) on every neuron - note the
sign: this is the mirror of the conventional logistic, implemented verbatim.
Training runs minibatch stochastic gradient descent with exact
backpropagation on the average cross-entropy between target class
distributions and the network outputs, in the two-term per-output form
-p.ln(y) - (1-p).ln(1-y).  The complement term matters: outputs are
independent sigmoids rather than a normalized distribution, and under the
bare -p.ln(y) every output with any target mass drifts monotonically to 1,
so no classifier can emerge.  :func:`cross_entropy` reports the bare form.

The latency helpers count the serial arithmetic steps of a fully parallel
fixed-function evaluation of such a network: one multiplication per layer,
a log-depth adder tree per inner product, and one sigmoid evaluation per
layer.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import expit

from .code import LogicalClass

CLASS_ORDER = ("I", "X", "Z", "Y")  # output index -> class, fixed everywhere

LOG_CLAMP = 1e-12  # floor inside ln() so empty outputs cannot produce inf


def sigmoid(v):
    """sigma(v) = 1 / (1 + exp(v)), the decreasing logistic."""
    return expit(-np.asarray(v, dtype=np.float64))


@dataclass
class Network:
    """Dense one-hidden-layer net: y = sigma(W_o sigma(W_h x + b_h) + b_o)."""

    w_hidden: np.ndarray  # (hidden, input)
    b_hidden: np.ndarray  # (hidden,)
    w_out: np.ndarray  # (output, hidden)
    b_out: np.ndarray  # (output,)

    def __post_init__(self):
        self.w_hidden = np.asarray(self.w_hidden, dtype=np.float64)
        self.b_hidden = np.asarray(self.b_hidden, dtype=np.float64)
        self.w_out = np.asarray(self.w_out, dtype=np.float64)
        self.b_out = np.asarray(self.b_out, dtype=np.float64)
        h, i = self.w_hidden.shape
        o, h2 = self.w_out.shape
        if h2 != h or self.b_hidden.shape != (h,) or self.b_out.shape != (o,):
            raise ValueError("inconsistent layer shapes")
        for arr in (self.w_hidden, self.b_hidden, self.w_out, self.b_out):
            if not np.all(np.isfinite(arr)):
                raise ValueError("network parameters must be finite")

    @property
    def input_size(self) -> int:
        return self.w_hidden.shape[1]

    @property
    def hidden_size(self) -> int:
        return self.w_hidden.shape[0]

    @property
    def output_size(self) -> int:
        return self.w_out.shape[0]


def new_network(
    input_size: int,
    hidden_size: int,
    output_size: int,
    rng: np.random.Generator,
    init_scale: float = 1.0,
) -> Network:
    """Fresh network with uniform(-r, r) weights, r = init_scale / sqrt(fan-in)."""
    rh = init_scale / np.sqrt(input_size)
    ro = init_scale / np.sqrt(hidden_size)
    return Network(
        w_hidden=rng.uniform(-rh, rh, size=(hidden_size, input_size)),
        b_hidden=rng.uniform(-rh, rh, size=hidden_size),
        w_out=rng.uniform(-ro, ro, size=(output_size, hidden_size)),
        b_out=rng.uniform(-ro, ro, size=output_size),
    )


def forward_batch(net: Network, x: np.ndarray) -> np.ndarray:
    """Outputs for a batch of input rows (n, input_size)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != net.input_size:
        raise ValueError(f"expected inputs of width {net.input_size}, got shape {x.shape}")
    hidden = sigmoid(x @ net.w_hidden.T + net.b_hidden)
    return sigmoid(hidden @ net.w_out.T + net.b_out)


def forward(net: Network, x) -> np.ndarray:
    """Output vector for a single input; every component lies in (0, 1)."""
    return forward_batch(net, np.asarray(x, dtype=np.float64).reshape(1, -1))[0]


def classify_batch(net: Network, x: np.ndarray) -> np.ndarray:
    """Argmax class indices for a batch (ties resolve to the lowest index)."""
    return np.argmax(forward_batch(net, x), axis=1).astype(np.uint8)


def classify(net: Network, x) -> LogicalClass:
    """Class label for one input.

    Four-output nets use the fixed order I, X, Z, Y.  Two-output nets encode
    {no logical flip, logical flip} for the single relevant logical operator
    (X for the channel-capacity scenario), so a flip maps to class X.
    """
    if net.output_size not in (2, 4):
        raise ValueError(f"classification needs 2 or 4 outputs, net has {net.output_size}")
    return LogicalClass(int(np.argmax(forward(net, x))))


@dataclass
class TrainingSet:
    """Unique input rows with target class distributions.

    ``weights`` are optional relative row weights (e.g. observation counts);
    they are normalized internally. Uniform weights reproduce the plain
    average cross-entropy over the set.
    """

    inputs: np.ndarray  # (n, input_size) float
    targets: np.ndarray  # (n, output_size) rows summing to 1
    weights: np.ndarray | None = None

    def __post_init__(self):
        self.inputs = np.asarray(self.inputs, dtype=np.float64)
        self.targets = np.asarray(self.targets, dtype=np.float64)
        if len(self.inputs) != len(self.targets) or len(self.inputs) == 0:
            raise ValueError("inputs and targets must be equally many and nonempty")
        if np.any(self.targets < 0) or not np.allclose(self.targets.sum(axis=1), 1.0):
            raise ValueError("targets must be probability distributions")
        if self.weights is not None:
            self.weights = np.asarray(self.weights, dtype=np.float64)
            if self.weights.shape != (len(self.inputs),) or np.any(self.weights < 0):
                raise ValueError("weights must be one nonnegative value per row")

    def normalized_weights(self) -> np.ndarray:
        if self.weights is None:
            return np.full(len(self.inputs), 1.0 / len(self.inputs))
        total = self.weights.sum()
        if total <= 0:
            raise ValueError("row weights sum to zero")
        return self.weights / total


@dataclass
class TrainConfig:
    learning_rate: float = 0.05
    minibatch: int = 64
    epochs: int = 1000
    init_scale: float = 1.0
    seed: int = 0
    # Stop once this many consecutive epochs fail to improve the best loss
    # by the relative tolerance (robust to minibatch wiggle).
    plateau_window: int = 5
    plateau_rel_tol: float = 1e-4

    def __post_init__(self):
        if self.learning_rate <= 0 or self.minibatch <= 0 or self.epochs <= 0:
            raise ValueError("learning rate, minibatch and epochs must be positive")
        if self.init_scale <= 0:
            raise ValueError("init scale must be positive")


class TrainingDiverged(RuntimeError):
    """Raised when the loss turns non-finite during training."""


def _loss_and_grads(net: Network, x, p, w):
    """Weighted-mean training cross-entropy and its exact parameter gradients.

    The loss is the two-term per-output cross-entropy; with the mirrored
    sigmoid its output-layer gradient reduces to d(loss)/d(z_out) = p - y,
    so gradient descent drives each output toward its target probability.
    """
    zh = x @ net.w_hidden.T + net.b_hidden
    h = sigmoid(zh)
    zo = h @ net.w_out.T + net.b_out
    y = sigmoid(zo)
    loss = float(
        np.sum(
            w
            * -(
                p * np.log(np.maximum(y, LOG_CLAMP))
                + (1.0 - p) * np.log(np.maximum(1.0 - y, LOG_CLAMP))
            ).sum(axis=1)
        )
    )

    # The clamps zero their term's gradient wherever they are active.
    go = (
        np.where(y > LOG_CLAMP, p * (1.0 - y), 0.0)
        - np.where(y < 1.0 - LOG_CLAMP, (1.0 - p) * y, 0.0)
    ) * w[:, None]
    gw_out = go.T @ h
    gb_out = go.sum(axis=0)
    gh = (go @ net.w_out) * (-h * (1.0 - h))  # sigma'(v) = -sigma(1-sigma)
    gw_hidden = gh.T @ x
    gb_hidden = gh.sum(axis=0)
    return loss, (gw_hidden, gb_hidden, gw_out, gb_out)


def cross_entropy(targets, inputs, net: Network) -> float:
    """Mean of -p.ln(y(x)) over (target, input) pairs."""
    p = np.asarray(targets, dtype=np.float64)
    x = np.asarray(inputs, dtype=np.float64)
    if np.any(p < 0) or not np.allclose(p.sum(axis=1), 1.0):
        raise ValueError("targets must be probability distributions")
    y = np.maximum(forward_batch(net, x), LOG_CLAMP)
    return float(np.mean(-(p * np.log(y)).sum(axis=1)))


def dataset_loss(net: Network, training: TrainingSet) -> float:
    """Weighted-mean training loss (two-term cross-entropy) over a set."""
    w = training.normalized_weights()
    loss, _ = _loss_and_grads(net, training.inputs, training.targets, w)
    return loss


@dataclass
class TrainResult:
    losses: list[float] = field(default_factory=list)  # index 0 = before training
    epochs_run: int = 0


def train_sgd(net: Network, training: TrainingSet, config: TrainConfig) -> TrainResult:
    """Minibatch SGD on the cross-entropy, updating the network in place.

    Each epoch visits every row once in a fresh random order; a batch's
    gradient is the weighted mean over its rows. Training stops at the epoch
    cap or when the loss plateaus. Raises :class:`TrainingDiverged` if the
    loss becomes non-finite.
    """
    rng = np.random.default_rng(config.seed)
    x = training.inputs
    p = training.targets
    w = training.normalized_weights()
    n = len(x)
    batch = min(config.minibatch, n)

    result = TrainResult()
    result.losses.append(dataset_loss(net, training))
    best = result.losses[0]
    stalled = 0
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch):
            idx = order[start : start + batch]
            wb = w[idx]
            total = wb.sum()
            if total <= 0:
                continue  # all-zero-weight batch contributes nothing
            loss, grads = _loss_and_grads(net, x[idx], p[idx], wb / total)
            if not np.isfinite(loss):
                raise TrainingDiverged(
                    f"non-finite loss at epoch {epoch}, rows {idx[:8].tolist()}...; "
                    f"lr={config.learning_rate}, batch={batch}"
                )
            gw_h, gb_h, gw_o, gb_o = grads
            net.w_hidden -= config.learning_rate * gw_h
            net.b_hidden -= config.learning_rate * gb_h
            net.w_out -= config.learning_rate * gw_o
            net.b_out -= config.learning_rate * gb_o

        epoch_loss = dataset_loss(net, training)
        if not np.isfinite(epoch_loss):
            raise TrainingDiverged(f"non-finite loss after epoch {epoch}")
        result.losses.append(epoch_loss)
        result.epochs_run = epoch + 1

        if best - epoch_loss > config.plateau_rel_tol * max(abs(best), 1e-30):
            best = epoch_loss
            stalled = 0
        else:
            stalled += 1
            if stalled >= config.plateau_window:
                break
    return result


# ---------------------------------------------------------------------------
# Hardware latency model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LatencyShape:
    input_size: int
    hidden_size: int

    def __post_init__(self):
        if self.input_size < 1 or self.hidden_size < 1:
            raise ValueError("layer sizes must be positive")


def parity_depth(b: int) -> int:
    """Depth of a tree of XOR gates computing the parity of b bits."""
    if b < 1:
        raise ValueError(f"need at least one bit, got {b}")
    return (b - 1).bit_length()  # == ceil(log2(b)), exactly


def latency_steps(shape: LatencyShape) -> int:
    """Serial steps to evaluate the network with fully parallel hardware.

    One multiplication step per layer, an adder tree of depth ceil(log2(n))
    per inner product, and one sigmoid evaluation per layer:
    2 + ceil(log2(input)) + ceil(log2(hidden)) + 2.
    """
    return 2 + parity_depth(shape.input_size) + parity_depth(shape.hidden_size) + 2


# ---------------------------------------------------------------------------
# Model files
# ---------------------------------------------------------------------------

MODEL_FORMAT = "surfdec-model-v1"


def save_model(
    path,
    net: Network,
    *,
    model_tag: str,
    distance: int,
    train_config: TrainConfig | None = None,
    extra: dict | None = None,
) -> None:
    """Write a self-describing JSON model file (fair game for hand editing)."""
    doc = {
        "format": MODEL_FORMAT,
        "model": model_tag,
        "distance": distance,
        "input_size": net.input_size,
        "hidden_size": net.hidden_size,
        "output_size": net.output_size,
        "class_order": list(CLASS_ORDER[: net.output_size]),
        "train_config": asdict(train_config) if train_config else None,
        "w_hidden": net.w_hidden.tolist(),
        "b_hidden": net.b_hidden.tolist(),
        "w_out": net.w_out.tolist(),
        "b_out": net.b_out.tolist(),
    }
    if extra:
        doc.update(extra)
    Path(path).write_text(json.dumps(doc))


def load_model(path) -> tuple[Network, dict]:
    """Read a model file; returns the network and its metadata dict."""
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != MODEL_FORMAT:
        raise ValueError(f"{path}: not a {MODEL_FORMAT} file")
    net = Network(
        w_hidden=np.array(doc["w_hidden"]),
        b_hidden=np.array(doc["b_hidden"]),
        w_out=np.array(doc["w_out"]),
        b_out=np.array(doc["b_out"]),
    )
    meta = {k: v for k, v in doc.items() if not k.startswith(("w_", "b_"))}
    return net, meta
