"""Federated Averaging on a synthetic seven-class task.

Clients hold private Gaussian-cluster data (one cluster per emotion
class), train a small MLP locally with SGD, and a server aggregates the
resulting parameters sample-weighted. A centralized baseline trains the
same model on the pooled data so the two accuracy trajectories can be
compared round for round.

Gradient math runs in float64, and every training boundary (init, each
SGD step, each aggregation) rounds parameters to exactly
float32-representable values. The container keeps double width so
derivative checks on parameters stay exact, while the rounding invariant
makes in-process results bit-identical to results that travelled over the
4-byte-per-parameter wire format.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

NUM_CLASSES = 7  # fixed seven-way emotion label set

# RNG stream tags so data, init, local shuffling, and centralized
# shuffling never share a sequence.
_STREAM_DATA = 3
_STREAM_INIT = 7
_STREAM_CLIENT = 11
_STREAM_CENTRAL = 13


@dataclass(frozen=True)
class ModelLayout:
    """One-hidden-layer perceptron shape: tanh hidden layer, softmax
    output. hidden_dim 0 with num_classes 1 degenerates to the scalar
    mean-estimation toy model."""

    input_dim: int
    hidden_dim: int
    num_classes: int = NUM_CLASSES

    def __post_init__(self):
        if self.input_dim < 1 or self.hidden_dim < 0 or self.num_classes < 1:
            raise ValueError("invalid model layout")

    @property
    def param_count(self) -> int:
        d, h, c = self.input_dim, self.hidden_dim, self.num_classes
        return d * h + h + h * c + c


@dataclass(frozen=True)
class ModelParams:
    layout: ModelLayout
    values: np.ndarray
    version: int = 0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size != self.layout.param_count:
            raise ValueError(
                f"expected {self.layout.param_count} parameters, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("parameters must be finite")
        if self.version < 0:
            raise ValueError("version must be non-negative")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class ClientDataset:
    client_id: int
    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.labels, dtype=np.int64)
        if f.ndim != 2 or y.ndim != 1 or f.shape[0] != y.shape[0]:
            raise ValueError("features must be n x d with n matching labels")
        if f.shape[0] < 1:
            raise ValueError("dataset must hold at least one sample")
        if not np.all(np.isfinite(f)):
            raise ValueError("feature rows must be finite")
        if np.any(y < 0) or np.any(y >= NUM_CLASSES):
            raise ValueError(f"labels must lie in [0, {NUM_CLASSES})")
        object.__setattr__(self, "features", f)
        object.__setattr__(self, "labels", y)

    @property
    def n_samples(self) -> int:
        return int(self.labels.shape[0])


@dataclass(frozen=True)
class ClientUpdate:
    client_id: int
    params: ModelParams
    n_samples: int
    round: int

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("an update must cover at least one sample")
        if self.round < 0:
            raise ValueError("round must be non-negative")


@dataclass(frozen=True)
class FLConfig:
    """Experiment knobs with declared defaults. The headline metric is
    the federated-vs-centralized accuracy gap; convergence_tol_pp holds
    the tolerance (percentage points) so it stays config, not code."""

    num_clients: int = 10
    rounds: int = 20
    local_epochs: int = 1
    batch_size: int = 32
    learning_rate: float = 0.05
    partition: str = "iid"
    alpha: float = 0.5
    seed: int = 42
    samples_per_client: int = 100
    input_dim: int = 16
    hidden_dim: int = 32
    separation: float = 5.0
    test_samples: int = 1400
    model_kind: str = "mlp"
    convergence_tol_pp: float = 2.0

    def __post_init__(self):
        if self.num_clients < 1:
            raise ValueError("num_clients must be >= 1")
        if self.rounds < 0:
            raise ValueError("rounds must be >= 0")
        if self.local_epochs < 1:
            raise ValueError("local_epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        # zero rate is allowed: the no-learning identity step is a clean oracle
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if self.partition not in ("iid", "dirichlet"):
            raise ValueError("partition must be iid or dirichlet")
        if self.partition == "dirichlet" and self.alpha <= 0:
            raise ValueError("alpha must be > 0 for dirichlet partitioning")
        if self.samples_per_client < 1 or self.test_samples < 1:
            raise ValueError("sample counts must be >= 1")
        if self.model_kind not in ("mlp", "mean"):
            raise ValueError("model_kind must be mlp or mean")
        if self.model_kind == "mlp" and self.input_dim < NUM_CLASSES:
            raise ValueError(
                f"input_dim must be >= {NUM_CLASSES} to place the class means")

    @property
    def layout(self) -> ModelLayout:
        if self.model_kind == "mean":
            return ModelLayout(input_dim=1, hidden_dim=0, num_classes=1)
        return ModelLayout(self.input_dim, self.hidden_dim, NUM_CLASSES)


def _balanced_labels(n: int, rng: np.random.Generator) -> np.ndarray:
    labels = np.tile(np.arange(NUM_CLASSES), n // NUM_CLASSES + 1)[:n]
    return labels[rng.permutation(n)]


def gen_synthetic(cfg: FLConfig) -> tuple[list[ClientDataset], ClientDataset]:
    """Draw per-client datasets and a held-out IID test set.

    Class means sit at separation * e_c (vertices of a scaled simplex),
    features are unit-variance Gaussians around the mean of their label.
    IID partitioning gives every client a balanced label mix; dirichlet
    draws per-client label proportions from Dirichlet(alpha).
    """
    rng = np.random.default_rng([cfg.seed, _STREAM_DATA])
    d = cfg.input_dim
    means = np.zeros((NUM_CLASSES, d))
    for c in range(NUM_CLASSES):
        means[c, c] = cfg.separation
    clients = []
    for client_id in range(cfg.num_clients):
        n = cfg.samples_per_client
        if cfg.partition == "iid":
            labels = _balanced_labels(n, rng)
        else:
            props = rng.dirichlet(np.full(NUM_CLASSES, cfg.alpha))
            labels = rng.choice(NUM_CLASSES, size=n, p=props)
        features = means[labels] + rng.standard_normal((n, d))
        clients.append(ClientDataset(client_id, features, labels))
    test_labels = _balanced_labels(cfg.test_samples, rng)
    test_features = means[test_labels] + rng.standard_normal((cfg.test_samples, d))
    return clients, ClientDataset(-1, test_features, test_labels)


def init_params(cfg: FLConfig) -> ModelParams:
    """Seeded He-style Gaussian weights, zero biases, version 0."""
    layout = cfg.layout
    if cfg.model_kind == "mean":
        return ModelParams(layout, np.zeros(1), version=0)
    rng = np.random.default_rng([cfg.seed, _STREAM_INIT])
    d, h, c = layout.input_dim, layout.hidden_dim, layout.num_classes
    w1 = rng.normal(0.0, 1.0 / np.sqrt(d), size=(d, h))
    w2 = rng.normal(0.0, 1.0 / np.sqrt(h), size=(h, c))
    values = np.concatenate([w1.ravel(), np.zeros(h), w2.ravel(), np.zeros(c)])
    return ModelParams(layout, values.astype(np.float32), version=0)


def _unpack(values: np.ndarray, layout: ModelLayout):
    d, h, c = layout.input_dim, layout.hidden_dim, layout.num_classes
    v = np.asarray(values, dtype=np.float64)
    i = 0
    w1 = v[i:i + d * h].reshape(d, h)
    i += d * h
    b1 = v[i:i + h]
    i += h
    w2 = v[i:i + h * c].reshape(h, c)
    i += h * c
    b2 = v[i:i + c]
    return w1, b1, w2, b2


def _forward(values: np.ndarray, layout: ModelLayout, features: np.ndarray):
    w1, b1, w2, b2 = _unpack(values, layout)
    hidden = np.tanh(features @ w1 + b1)
    logits = hidden @ w2 + b2
    logits -= logits.max(axis=1, keepdims=True)
    exp = np.exp(logits)
    return hidden, exp / exp.sum(axis=1, keepdims=True)


def _check_batch(params: ModelParams, features: np.ndarray, labels: np.ndarray):
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if features.ndim != 2 or labels.ndim != 1 or features.shape[0] != labels.shape[0]:
        raise ValueError("batch must be n x d features with n labels")
    if features.shape[0] == 0:
        raise ValueError("batch must be non-empty")
    want = params.layout.input_dim
    if params.layout.hidden_dim > 0 and features.shape[1] != want:
        raise ValueError(f"feature dim {features.shape[1]} != layout dim {want}")
    return features, labels


def loss(params: ModelParams, features: np.ndarray, labels: np.ndarray) -> float:
    """Mean cross-entropy (MLP) or mean squared deviation/2 (toy mode)."""
    features, labels = _check_batch(params, features, labels)
    if params.layout.hidden_dim == 0:
        w = float(params.values[0])
        return float(0.5 * np.mean((w - labels.astype(np.float64)) ** 2))
    _, probs = _forward(params.values, params.layout, features)
    picked = probs[np.arange(labels.size), labels]
    return float(-np.mean(np.log(picked + 1e-300)))


def grad(params: ModelParams, features: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Exact gradient of `loss` with respect to the flat parameter vector."""
    features, labels = _check_batch(params, features, labels)
    layout = params.layout
    if layout.hidden_dim == 0:
        w = float(params.values[0])
        return np.array([w - float(np.mean(labels))], dtype=np.float64)
    w1, b1, w2, b2 = _unpack(params.values, layout)
    hidden, probs = _forward(params.values, layout, features)
    n = labels.size
    dlogits = probs.copy()
    dlogits[np.arange(n), labels] -= 1.0
    dlogits /= n
    dw2 = hidden.T @ dlogits
    db2 = dlogits.sum(axis=0)
    dhidden = dlogits @ w2.T
    dpre = dhidden * (1.0 - hidden * hidden)
    dw1 = features.T @ dpre
    db1 = dpre.sum(axis=0)
    return np.concatenate([dw1.ravel(), db1, dw2.ravel(), db2])


def predict(params: ModelParams, features: np.ndarray) -> np.ndarray:
    if params.layout.hidden_dim == 0:
        w = float(params.values[0])
        return np.full(np.asarray(features).shape[0], np.rint(w), dtype=np.int64)
    _, probs = _forward(params.values, params.layout,
                        np.asarray(features, dtype=np.float64))
    return probs.argmax(axis=1)


def evaluate(params: ModelParams, data: ClientDataset) -> float:
    """Classification accuracy on a dataset (fraction correct)."""
    if params.layout.hidden_dim == 0:
        w = float(params.values[0])
        return float(np.mean(np.abs(w - data.labels.astype(np.float64)) < 0.5))
    return float(np.mean(predict(params, data.features) == data.labels))


def _sgd_epochs(values: np.ndarray, layout: ModelLayout, features: np.ndarray,
                labels: np.ndarray, epochs: int, batch_size: int,
                learning_rate: float, rng: np.random.Generator | None) -> np.ndarray:
    """Mini-batch SGD, rounding to float32 precision after every step.
    Full-batch runs consume no shuffle randomness at all."""
    n = labels.shape[0]
    w = np.asarray(values, dtype=np.float64).copy()
    for _ in range(epochs):
        if batch_size >= n or rng is None:
            order = np.arange(n)
        else:
            order = rng.permutation(n)
        for start in range(0, n, batch_size):
            idx = order[start:start + batch_size]
            g = grad(ModelParams(layout, w), features[idx], labels[idx])
            w = (w - learning_rate * g).astype(np.float32).astype(np.float64)
    return w


def client_update(global_params: ModelParams, data: ClientDataset,
                  cfg: FLConfig) -> ClientUpdate:
    """Local training pass: E epochs of mini-batch SGD from the global
    parameters. Shuffling derives from (seed, client, global version), so
    reruns with the same inputs are bit-identical."""
    if global_params.layout != cfg.layout:
        raise ValueError("global parameter layout does not match the config")
    rng = np.random.default_rng(
        [cfg.seed, _STREAM_CLIENT, data.client_id, global_params.version])
    w = _sgd_epochs(global_params.values, cfg.layout, data.features, data.labels,
                    cfg.local_epochs, cfg.batch_size, cfg.learning_rate, rng)
    params = ModelParams(cfg.layout, w, version=global_params.version)
    return ClientUpdate(client_id=data.client_id, params=params,
                        n_samples=data.n_samples, round=global_params.version)


def aggregate(updates: Sequence[ClientUpdate]) -> ModelParams:
    """Sample-weighted mean of client parameters, summed in ascending
    client-id order so the result never depends on arrival order."""
    if not updates:
        raise ValueError("cannot aggregate zero updates")
    first = updates[0]
    for u in updates[1:]:
        if u.params.layout != first.params.layout:
            raise ValueError("updates disagree on model layout")
        if u.round != first.round:
            raise ValueError("updates disagree on round index")
    ordered = sorted(updates, key=lambda u: u.client_id)
    total = sum(u.n_samples for u in ordered)
    acc = np.zeros(first.params.values.size, dtype=np.float64)
    for u in ordered:
        acc += u.params.values * (u.n_samples / total)
    return ModelParams(first.params.layout, acc.astype(np.float32),
                       version=first.round + 1)


@dataclass(frozen=True)
class TrainingRun:
    """Per-round accuracy trace plus the parameters that produced it."""

    accuracy_history: tuple[float, ...]
    params: ModelParams
    params_history: tuple[ModelParams, ...]
    initial_params: ModelParams


def run_fedavg(cfg: FLConfig) -> TrainingRun:
    """T rounds of broadcast, local training on every client, and
    sample-weighted aggregation, evaluating on the held-out test set
    after each round."""
    clients, test = gen_synthetic(cfg)
    params = init_params(cfg)
    initial = params
    history: list[float] = []
    snapshots: list[ModelParams] = []
    for _ in range(cfg.rounds):
        updates = [client_update(params, c, cfg) for c in clients]
        params = aggregate(updates)
        history.append(evaluate(params, test))
        snapshots.append(params)
    return TrainingRun(tuple(history), params, tuple(snapshots), initial)


def run_centralized(cfg: FLConfig) -> TrainingRun:
    """Baseline: pool all client data and run T*E epochs of the same SGD."""
    clients, test = gen_synthetic(cfg)
    features = np.concatenate([c.features for c in clients])
    labels = np.concatenate([c.labels for c in clients])
    params = init_params(cfg)
    initial = params
    rng = np.random.default_rng([cfg.seed, _STREAM_CENTRAL])
    history: list[float] = []
    snapshots: list[ModelParams] = []
    for epoch in range(cfg.rounds * cfg.local_epochs):
        w = _sgd_epochs(params.values, cfg.layout, features, labels, 1,
                        cfg.batch_size, cfg.learning_rate, rng)
        params = ModelParams(cfg.layout, w, version=epoch + 1)
        history.append(evaluate(params, test))
        snapshots.append(params)
    return TrainingRun(tuple(history), params, tuple(snapshots), initial)


def update_size(param_count: int, bytes_per_param: int) -> int:
    """Exact wire size of one model update."""
    if param_count < 0 or bytes_per_param < 0:
        raise ValueError("counts must be non-negative")
    return param_count * bytes_per_param


def convergence_csv(fed_history: Sequence[float],
                    cent_history: Sequence[float]) -> str:
    """Round-aligned accuracy table. Histories must already be the same
    length (one centralized entry per federated round)."""
    if len(fed_history) != len(cent_history):
        raise ValueError("histories must have equal length")
    lines = ["round,federated_acc,centralized_acc"]
    for i, (f, c) in enumerate(zip(fed_history, cent_history), start=1):
        lines.append(f"{i},{f:.6f},{c:.6f}")
    return "\n".join(lines) + "\n"


def convergence_pair(cfg: FLConfig) -> tuple[TrainingRun, TrainingRun, str]:
    """Run both regimes on the same data and seed; the CSV pairs round r
    with the centralized epoch that has seen the same number of passes."""
    fed = run_fedavg(cfg)
    cent = run_centralized(cfg)
    aligned = cent.accuracy_history[cfg.local_epochs - 1::cfg.local_epochs]
    return fed, cent, convergence_csv(fed.accuracy_history, aligned)
