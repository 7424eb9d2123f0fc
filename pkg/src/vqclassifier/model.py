"""The hybrid classifier: circuit features -> affine softmax head.

Training minimizes categorical cross entropy with Adam. Head gradients use
the closed-form softmax derivative (p - onehot); circuit-angle gradients
chain that through the parameter-shift Jacobian. Per-example work inside a
batch may run on a thread pool, but gradients are always reduced in example
order, so results are identical for any thread count.
"""

from __future__ import annotations

import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import gradients as _gradients
from .ansatz import AnsatzConfig, AnsatzParams, circuit_forward, init_params
from .data import Dataset, LabeledExample
from .encoding import EncodingConfig
from .errors import CheckpointError, ShapeError
from .seeding import derive_seed

PROB_FLOOR = 1e-12

CHECKPOINT_MAGIC = b"VQCL"
CHECKPOINT_VERSION = 1
_AXIS_CODE = {"X": 0, "Y": 1, "Z": 2}
_AXIS_NAME = {v: k for k, v in _AXIS_CODE.items()}


@dataclass
class MlpHead:
    """Affine layer 2 x n plus softmax; the paper-shaped 10->2 readout head."""

    weights: np.ndarray
    biases: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        self.biases = np.asarray(self.biases, dtype=float)
        if self.weights.ndim != 2 or self.weights.shape[0] != 2:
            raise ShapeError(f"head weights must be 2 x n, got {self.weights.shape}")
        if self.biases.shape != (2,):
            raise ShapeError(f"head biases must have shape (2,), got {self.biases.shape}")
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.biases))):
            raise ValueError("head parameters must be finite")

    @property
    def num_inputs(self) -> int:
        return self.weights.shape[1]

    def copy(self) -> "MlpHead":
        return MlpHead(self.weights.copy(), self.biases.copy())


def init_head(num_inputs: int, seed: int) -> MlpHead:
    """Fan-in scaled uniform init over [-1/sqrt(n), 1/sqrt(n)]."""
    rng = np.random.default_rng(seed)
    bound = 1.0 / math.sqrt(num_inputs)
    return MlpHead(
        rng.uniform(-bound, bound, size=(2, num_inputs)),
        rng.uniform(-bound, bound, size=2),
    )


@dataclass
class HybridModel:
    enc_cfg: EncodingConfig
    ansatz_cfg: AnsatzConfig
    ansatz_params: AnsatzParams
    head: MlpHead

    def __post_init__(self):
        if not self.ansatz_params.matches(self.ansatz_cfg):
            raise ShapeError(
                f"ansatz params {self.ansatz_params.angles.shape} do not match config "
                f"({self.ansatz_cfg.num_layers}, {self.ansatz_cfg.num_qubits})"
            )
        if self.head.num_inputs != self.ansatz_cfg.num_qubits:
            raise ShapeError(
                f"head expects {self.head.num_inputs} inputs but the circuit "
                f"measures {self.ansatz_cfg.num_qubits} qubits"
            )
        if self.enc_cfg.num_qubits != self.ansatz_cfg.num_qubits:
            raise ShapeError(
                f"encoding produces {self.enc_cfg.num_qubits} qubits but the ansatz "
                f"has {self.ansatz_cfg.num_qubits}"
            )

    def copy(self) -> "HybridModel":
        return HybridModel(self.enc_cfg, self.ansatz_cfg, self.ansatz_params.copy(), self.head.copy())


def build_model(enc_cfg: EncodingConfig, num_layers: int, seed: int, rotation_axis: str = "X") -> HybridModel:
    """Fresh model with seeded circuit angles and head weights."""
    ansatz_cfg = AnsatzConfig(enc_cfg.num_qubits, num_layers, rotation_axis)
    return HybridModel(
        enc_cfg,
        ansatz_cfg,
        init_params(ansatz_cfg, derive_seed(seed, "init")),
        init_head(ansatz_cfg.num_qubits, derive_seed(seed, "head")),
    )


def head_forward(z, head: MlpHead) -> np.ndarray:
    """softmax(W z + b), computed with max subtraction for stability."""
    z = np.asarray(z, dtype=float)
    if z.shape != (head.num_inputs,):
        raise ShapeError(f"expected {head.num_inputs} inputs, got shape {z.shape}")
    logits = head.weights @ z + head.biases
    shifted = np.exp(logits - logits.max())
    return shifted / shifted.sum()


def cross_entropy(probs, label: int) -> float:
    if label not in (0, 1):
        raise ValueError(f"label must be 0 or 1, got {label!r}")
    p = max(float(np.asarray(probs)[label]), PROB_FLOOR)
    return -math.log(p)


def hybrid_forward(x, model: HybridModel) -> np.ndarray:
    z = circuit_forward(x, model.ansatz_params, model.ansatz_cfg, model.enc_cfg)
    return head_forward(z, model.head)


# ---------------------------------------------------------------------------
# Gradients


def _example_terms(ex: LabeledExample, model: HybridModel, freeze_circuit: bool):
    z = circuit_forward(ex.features, model.ansatz_params, model.ansatz_cfg, model.enc_cfg)
    probs = head_forward(z, model.head)
    delta = probs.copy()
    delta[ex.label] -= 1.0  # d loss / d logits
    if freeze_circuit:
        grad_angles = np.zeros_like(model.ansatz_params.angles)
    else:
        jac = _gradients.parameter_shift_jacobian(
            ex.features, model.ansatz_params, model.ansatz_cfg, model.enc_cfg
        )
        dz = model.head.weights.T @ delta
        grad_angles = (jac.entries @ dz).reshape(model.ansatz_params.angles.shape)
    loss = cross_entropy(probs, ex.label)
    return grad_angles, np.outer(delta, z), delta, loss


def loss_gradients(
    batch: list[LabeledExample],
    model: HybridModel,
    freeze_circuit: bool = False,
    threads: int = 1,
) -> tuple[dict[str, np.ndarray], float]:
    """Mean-over-batch gradients for (angles, head weights, head biases) and the mean loss."""
    if len(batch) == 0:
        raise ValueError("batch must be non-empty")
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            terms = list(pool.map(lambda ex: _example_terms(ex, model, freeze_circuit), batch))
    else:
        terms = [_example_terms(ex, model, freeze_circuit) for ex in batch]
    grads = {
        "angles": np.zeros_like(model.ansatz_params.angles),
        "weights": np.zeros_like(model.head.weights),
        "biases": np.zeros_like(model.head.biases),
    }
    total_loss = 0.0
    for grad_angles, grad_w, grad_b, loss in terms:  # fixed order, thread-count independent
        grads["angles"] += grad_angles
        grads["weights"] += grad_w
        grads["biases"] += grad_b
        total_loss += loss
    for key in grads:
        grads[key] /= len(batch)
    return grads, total_loss / len(batch)


# ---------------------------------------------------------------------------
# Adam


@dataclass
class AdamState:
    """First/second moment estimates per parameter array plus the step counter."""

    step: int
    first_moments: dict[str, np.ndarray]
    second_moments: dict[str, np.ndarray]
    lr: float = 1e-5
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def init(cls, params: dict[str, np.ndarray], lr: float = 1e-5) -> "AdamState":
        return cls(
            step=0,
            first_moments={k: np.zeros_like(v) for k, v in params.items()},
            second_moments={k: np.zeros_like(v) for k, v in params.items()},
            lr=lr,
        )


def adam_step(
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: AdamState,
) -> tuple[dict[str, np.ndarray], AdamState]:
    """One bias-corrected Adam update; returns fresh params and state."""
    if set(params) != set(grads) or set(params) != set(state.first_moments):
        raise ShapeError("params, grads, and moments must share the same keys")
    t = state.step + 1
    new_params: dict[str, np.ndarray] = {}
    m_new: dict[str, np.ndarray] = {}
    v_new: dict[str, np.ndarray] = {}
    for key, theta in params.items():
        g = grads[key]
        if g.shape != theta.shape:
            raise ShapeError(f"gradient shape {g.shape} != param shape {theta.shape} for {key!r}")
        m = state.beta1 * state.first_moments[key] + (1.0 - state.beta1) * g
        v = state.beta2 * state.second_moments[key] + (1.0 - state.beta2) * g * g
        m_hat = m / (1.0 - state.beta1**t)
        v_hat = v / (1.0 - state.beta2**t)
        new_params[key] = theta - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
        m_new[key] = m
        v_new[key] = v
    return new_params, replace(state, step=t, first_moments=m_new, second_moments=v_new)


# ---------------------------------------------------------------------------
# Training and evaluation


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 32
    epochs: int = 7
    seed: int = 0
    shuffle: bool = True
    freeze_circuit: bool = False
    lr: float = 1e-5
    threads: int = 1

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")


@dataclass
class EvalReport:
    accuracy: float
    mcc: float
    confusion: np.ndarray  # rows = true label, cols = predicted label
    loss: float

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "mcc": self.mcc,
            "confusion": [[int(v) for v in row] for row in self.confusion],
            "loss": self.loss,
        }


def _model_params(model: HybridModel) -> dict[str, np.ndarray]:
    return {
        "angles": model.ansatz_params.angles.copy(),
        "weights": model.head.weights.copy(),
        "biases": model.head.biases.copy(),
    }


def _with_params(model: HybridModel, params: dict[str, np.ndarray]) -> HybridModel:
    return HybridModel(
        model.enc_cfg,
        model.ansatz_cfg,
        AnsatzParams(params["angles"].copy()),
        MlpHead(params["weights"].copy(), params["biases"].copy()),
    )


def _check_dims(model: HybridModel, dataset: Dataset, name: str) -> None:
    if dataset.feature_dim != model.enc_cfg.feature_dim:
        raise ShapeError(
            f"{name} set has feature_dim {dataset.feature_dim} but the model "
            f"encodes {model.enc_cfg.feature_dim}"
        )


def train(
    model: HybridModel,
    train_set: Dataset,
    val_set: Dataset,
    cfg: TrainConfig,
) -> tuple[HybridModel, list[dict]]:
    """Mini-batch Adam over fixed epochs; returns the trained model and per-epoch history."""
    if len(train_set) == 0 or len(val_set) == 0:
        raise ValueError("train and validation sets must be non-empty")
    _check_dims(model, train_set, "train")
    _check_dims(model, val_set, "validation")
    rng = np.random.default_rng(derive_seed(cfg.seed, "shuffle"))
    params = _model_params(model)
    state = AdamState.init(params, lr=cfg.lr)
    current = _with_params(model, params)
    history: list[dict] = []
    n = len(train_set)
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n) if cfg.shuffle else np.arange(n)
        loss_sum = 0.0
        for start in range(0, n, cfg.batch_size):
            batch = [train_set.examples[i] for i in order[start : start + cfg.batch_size]]
            grads, batch_loss = loss_gradients(
                batch, current, freeze_circuit=cfg.freeze_circuit, threads=cfg.threads
            )
            params, state = adam_step(params, grads, state)
            current = _with_params(current, params)
            loss_sum += batch_loss * len(batch)
        report = evaluate(current, val_set, threads=cfg.threads)
        history.append(
            {
                "epoch": epoch,
                "train_loss": loss_sum / n,
                "val_loss": report.loss,
                "val_accuracy": report.accuracy,
                "val_mcc": report.mcc,
            }
        )
    return current, history


def predict(model: HybridModel, features) -> tuple[int, np.ndarray]:
    """(argmax class, probabilities); ties resolve to class 0."""
    probs = hybrid_forward(features, model)
    return int(np.argmax(probs)), probs


def evaluate(model: HybridModel, dataset: Dataset, threads: int = 1) -> EvalReport:
    if len(dataset) == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    _check_dims(model, dataset, "evaluation")
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            all_probs = list(pool.map(lambda ex: hybrid_forward(ex.features, model), dataset.examples))
    else:
        all_probs = [hybrid_forward(ex.features, model) for ex in dataset.examples]
    confusion = np.zeros((2, 2), dtype=int)
    loss_sum = 0.0
    for ex, probs in zip(dataset.examples, all_probs):
        pred = int(np.argmax(probs))
        confusion[ex.label, pred] += 1
        loss_sum += cross_entropy(probs, ex.label)
    accuracy = float(np.trace(confusion)) / len(dataset)
    return EvalReport(accuracy, mcc(confusion), confusion, loss_sum / len(dataset))


def mcc(confusion) -> float:
    """Matthews correlation from a 2x2 confusion matrix (rows true, cols predicted).

    Any zero factor in the denominator (single-class predictor or single-class
    truth) yields 0.0 by convention.
    """
    c = np.asarray(confusion)
    if c.shape != (2, 2):
        raise ShapeError(f"confusion matrix must be 2x2, got {c.shape}")
    if np.any(c < 0):
        raise ValueError("confusion counts must be non-negative")
    tn, fp, fn, tp = int(c[0, 0]), int(c[0, 1]), int(c[1, 0]), int(c[1, 1])
    if tn + fp + fn + tp == 0:
        raise ValueError("confusion matrix is all zeros")
    factors = (tp + fp, tp + fn, tn + fp, tn + fn)
    if any(f == 0 for f in factors):
        return 0.0
    denom = math.sqrt(float(factors[0]) * factors[1] * factors[2] * factors[3])
    return (tp * tn - fp * fn) / denom


# ---------------------------------------------------------------------------
# Checkpoints


def _pack_array(arr: np.ndarray) -> bytes:
    return np.ascontiguousarray(arr, dtype="<f8").tobytes()


def save_checkpoint(model: HybridModel, path, optimizer_state: AdamState | None = None) -> None:
    """Binary little-endian layout; see README for the field order."""
    parts = [
        CHECKPOINT_MAGIC,
        struct.pack("<H", CHECKPOINT_VERSION),
        struct.pack("<Id", model.enc_cfg.feature_dim, model.enc_cfg.pad_value),
        struct.pack(
            "<HHB",
            model.ansatz_cfg.num_qubits,
            model.ansatz_cfg.num_layers,
            _AXIS_CODE[model.ansatz_cfg.rotation_axis],
        ),
        _pack_array(model.ansatz_params.angles),
        _pack_array(model.head.weights),
        _pack_array(model.head.biases),
    ]
    if optimizer_state is None:
        parts.append(struct.pack("<B", 0))
    else:
        parts.append(struct.pack("<B", 1))
        parts.append(
            struct.pack(
                "<Qdddd",
                optimizer_state.step,
                optimizer_state.lr,
                optimizer_state.beta1,
                optimizer_state.beta2,
                optimizer_state.eps,
            )
        )
        for moments in (optimizer_state.first_moments, optimizer_state.second_moments):
            for key in ("angles", "weights", "biases"):
                parts.append(_pack_array(moments[key]))
    with open(path, "wb") as fh:
        fh.write(b"".join(parts))


class _Reader:
    def __init__(self, blob: bytes):
        self.blob = blob
        self.pos = 0

    def take(self, count: int) -> bytes:
        if self.pos + count > len(self.blob):
            raise CheckpointError("checkpoint truncated")
        out = self.blob[self.pos : self.pos + count]
        self.pos += count
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def array(self, shape: tuple[int, ...]) -> np.ndarray:
        count = int(np.prod(shape))
        return np.frombuffer(self.take(8 * count), dtype="<f8").reshape(shape).copy()

    def done(self) -> bool:
        return self.pos == len(self.blob)


def load_checkpoint(path) -> tuple[HybridModel, AdamState | None]:
    with open(path, "rb") as fh:
        reader = _Reader(fh.read())
    if reader.take(4) != CHECKPOINT_MAGIC:
        raise CheckpointError("bad magic bytes; not a model checkpoint")
    (version,) = reader.unpack("<H")
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    feature_dim, pad_value = reader.unpack("<Id")
    num_qubits, num_layers, axis_code = reader.unpack("<HHB")
    if axis_code not in _AXIS_NAME:
        raise CheckpointError(f"unknown rotation axis code {axis_code}")
    try:
        enc_cfg = EncodingConfig(feature_dim, pad_value)
        ansatz_cfg = AnsatzConfig(num_qubits, num_layers, _AXIS_NAME[axis_code])
        angles = reader.array((num_layers, num_qubits))
        weights = reader.array((2, num_qubits))
        biases = reader.array((2,))
        model = HybridModel(enc_cfg, ansatz_cfg, AnsatzParams(angles), MlpHead(weights, biases))
    except (ValueError, ShapeError) as exc:
        raise CheckpointError(f"invalid checkpoint contents: {exc}") from exc
    (flag,) = reader.unpack("<B")
    state = None
    if flag == 1:
        step, lr, beta1, beta2, eps = reader.unpack("<Qdddd")
        first = {
            "angles": reader.array((num_layers, num_qubits)),
            "weights": reader.array((2, num_qubits)),
            "biases": reader.array((2,)),
        }
        second = {
            "angles": reader.array((num_layers, num_qubits)),
            "weights": reader.array((2, num_qubits)),
            "biases": reader.array((2,)),
        }
        state = AdamState(int(step), first, second, lr, beta1, beta2, eps)
    elif flag != 0:
        raise CheckpointError(f"invalid optimizer flag {flag}")
    if not reader.done():
        raise CheckpointError("trailing bytes after checkpoint payload")
    return model, state
