"""The three classifier architectures, their tuned defaults, and checkpointing.

The CNN applies a 1-D convolution over the sentence matrix, global max
pooling over the time axis, and a dense layer to 3 logits under softmax.
The recurrent variants run over the real (non-padding) rows only and read
the hidden state at the last real step. Output order is always
(Relevant, Not Relevant, Can't Decide).

Checkpoint format "RLV1": magic bytes, a length-prefixed UTF-8 JSON metadata
document (hyperparameters, counters, array shapes, window contents), the raw
little-endian float32 array payloads in declared order, then a CRC32 of
everything prior.
"""

from __future__ import annotations

import dataclasses
import json
import os
import struct
import time
import zlib
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import nn_core
from .embeddings import EmbeddingTable
from .errors import CheckpointError, CheckpointVersionError, ChecksumError
from .labels import N_CLASSES, RelevanceLabel
from .text_pipeline import SentenceMatrix, to_matrix
from .window import DEFAULT_WINDOW_CAPACITY, LabeledExample, TrainingWindow

MODEL_TYPES = ("CNN", "LSTM", "RNN")
OPTIMIZERS = ("Adam", "Adagrad")

CHECKPOINT_MAGIC = b"RLV1"
CHECKPOINT_VERSION = 1

UNIFORM_DISTRIBUTION = np.full(N_CLASSES, 1.0 / N_CLASSES)


@dataclass(frozen=True)
class Hyperparameters:
    """Tuned training knobs; the CNN ignores the recurrent fields and vice versa."""

    model_type: str
    learning_rate: float
    batch_size: int
    epochs: int
    optimizer: str = "Adam"
    dropout: float = 0.0
    recurrent_dropout: float = 0.0
    filter_size: int = 16
    kernel_size: int = 2
    hidden_size: int = 300
    max_len: int = 64
    embedding_dim: int = 300
    seed: int = 0

    def __post_init__(self) -> None:
        if self.model_type not in MODEL_TYPES:
            raise ValueError(f"model_type must be one of {MODEL_TYPES}, got {self.model_type!r}")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"optimizer must be one of {OPTIMIZERS}, got {self.optimizer!r}")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be non-negative")
        if self.batch_size < 1 or self.epochs < 1:
            raise ValueError("batch_size and epochs must be positive")
        for name in ("dropout", "recurrent_dropout"):
            rate = getattr(self, name)
            if not 0.0 <= rate < 1.0:
                raise ValueError(f"{name} must be in [0, 1), got {rate}")
        if self.model_type == "CNN":
            if self.filter_size < 1 or self.kernel_size < 1:
                raise ValueError("filter_size and kernel_size must be positive")
            if self.kernel_size > self.max_len:
                raise ValueError(
                    f"kernel_size {self.kernel_size} exceeds max_len {self.max_len}"
                )
        elif self.hidden_size < 1:
            raise ValueError("hidden_size must be positive")
        if self.max_len < 1 or self.embedding_dim < 1:
            raise ValueError("max_len and embedding_dim must be positive")


def cnn_defaults(**overrides) -> Hyperparameters:
    """Selected CNN configuration: lr 0.0079, batch 10, 1 epoch, 16 filters of width 2, Adam."""
    base = dict(
        model_type="CNN",
        learning_rate=0.0079,
        batch_size=10,
        epochs=1,
        filter_size=16,
        kernel_size=2,
        optimizer="Adam",
    )
    base.update(overrides)
    return Hyperparameters(**base)


def lstm_defaults(**overrides) -> Hyperparameters:
    """Best LSTM configuration: lr 0.0002, batch 10, 10 epochs, dropout 0.4/0.2, Adam."""
    base = dict(
        model_type="LSTM",
        learning_rate=0.0002,
        batch_size=10,
        epochs=10,
        dropout=0.4,
        recurrent_dropout=0.2,
        hidden_size=300,
        optimizer="Adam",
    )
    base.update(overrides)
    return Hyperparameters(**base)


def rnn_defaults(**overrides) -> Hyperparameters:
    """Best simple-RNN configuration: lr 0.0001, batch 10, 7 epochs, recurrent dropout 0.2, Adam."""
    base = dict(
        model_type="RNN",
        learning_rate=0.0001,
        batch_size=10,
        epochs=7,
        dropout=0.0,
        recurrent_dropout=0.2,
        hidden_size=300,
        optimizer="Adam",
    )
    base.update(overrides)
    return Hyperparameters(**base)


def defaults_for(model_type: str, **overrides) -> Hyperparameters:
    factory = {"CNN": cnn_defaults, "LSTM": lstm_defaults, "RNN": rnn_defaults}.get(model_type)
    if factory is None:
        raise ValueError(f"unknown model type {model_type!r}")
    return factory(**overrides)


class ClassifierModel:
    """Weights + optimizer state + sliding window for one (user, classifier) pair."""

    def __init__(
        self,
        hp: Hyperparameters,
        params: dict[str, np.ndarray],
        opt_state: nn_core.OptimizerState,
        window: TrainingWindow,
        n_trained: int = 0,
        train_calls: int = 0,
        created_at: Optional[float] = None,
        updated_at: Optional[float] = None,
    ):
        self.hp = hp
        self.params = params
        self.opt_state = opt_state
        self.window = window
        self.n_trained = n_trained
        self.train_calls = train_calls
        now = time.time()
        self.created_at = created_at if created_at is not None else now
        self.updated_at = updated_at if updated_at is not None else now


def _init_params(hp: Hyperparameters, rng: np.random.Generator) -> dict[str, np.ndarray]:
    D = hp.embedding_dim
    if hp.model_type == "CNN":
        F, K = hp.filter_size, hp.kernel_size
        params = {
            "conv_w": nn_core.glorot_uniform((F, K, D), fan_in=K * D, fan_out=F, rng=rng),
            "conv_b": np.zeros(F),
            "out_w": nn_core.glorot_uniform((N_CLASSES, F), fan_in=F, fan_out=N_CLASSES, rng=rng),
            "out_b": np.zeros(N_CLASSES),
        }
    else:
        H = hp.hidden_size
        gates = 4 * H if hp.model_type == "LSTM" else H
        params = {
            "w_x": nn_core.glorot_uniform((gates, D), fan_in=D, fan_out=gates, rng=rng),
            "w_h": nn_core.glorot_uniform((gates, H), fan_in=H, fan_out=gates, rng=rng),
            "b": np.zeros(gates),
            "out_w": nn_core.glorot_uniform((N_CLASSES, H), fan_in=H, fan_out=N_CLASSES, rng=rng),
            "out_b": np.zeros(N_CLASSES),
        }
    return {name: arr.astype(np.float32) for name, arr in params.items()}


def build(hp: Hyperparameters, window_capacity: int = DEFAULT_WINDOW_CAPACITY) -> ClassifierModel:
    """Fresh, untrained model with seeded initialization and an empty window."""
    rng = np.random.default_rng(hp.seed)
    params = _init_params(hp, rng)
    opt_state = nn_core.init_optimizer_state(hp.optimizer.lower(), params)
    return ClassifierModel(hp, params, opt_state, TrainingWindow(window_capacity))


# ---------------------------------------------------------------------------
# forward / backward
# ---------------------------------------------------------------------------


def forward(
    hp: Hyperparameters,
    params: dict[str, np.ndarray],
    matrix: SentenceMatrix,
    training: bool = False,
    rng: Optional[np.random.Generator] = None,
):
    """Run one example through the network; returns (probs, cache).

    Padding rows participate in convolution as zeros; the recurrent variants
    consume only the first ``length`` rows. Dropout masks are drawn once per
    call (per-sequence, variational style) and only when training.
    """
    if training and (hp.dropout > 0 or hp.recurrent_dropout > 0) and rng is None:
        raise ValueError("training with dropout requires an rng")
    if hp.model_type == "CNN":
        x = matrix.rows.astype(np.float64)
        conv_out, conv_cache = nn_core.conv1d_forward(x, params["conv_w"], params["conv_b"])
        pooled, argmax = nn_core.global_maxpool1d(conv_out)
        mask = None
        if training and hp.dropout > 0:
            mask = nn_core.dropout_mask(pooled.shape, hp.dropout, rng)
            pooled = pooled * mask
        logits = nn_core.dense_forward(pooled, params["out_w"], params["out_b"])
        probs = nn_core.softmax(logits)
        cache = {
            "kind": "CNN",
            "conv_cache": conv_cache,
            "argmax": argmax,
            "T": conv_out.shape[0],
            "pooled": pooled,
            "mask": mask,
        }
        return probs, cache

    if matrix.length < 1:
        raise ValueError("recurrent forward requires at least one real row")
    xs = matrix.rows[: matrix.length].astype(np.float64)
    H = hp.hidden_size
    in_mask = rec_mask = None
    if training and hp.dropout > 0:
        in_mask = nn_core.dropout_mask((xs.shape[1],), hp.dropout, rng)
    if training and hp.recurrent_dropout > 0:
        rec_mask = nn_core.dropout_mask((H,), hp.recurrent_dropout, rng)
    h0 = np.zeros(H)
    if hp.model_type == "LSTM":
        h_last, seq_cache = nn_core.lstm_forward(
            xs, h0, np.zeros(H), params["w_x"], params["w_h"], params["b"], in_mask, rec_mask
        )
    else:
        h_last, seq_cache = nn_core.rnn_forward(
            xs, h0, params["w_x"], params["w_h"], params["b"], in_mask, rec_mask
        )
    logits = nn_core.dense_forward(h_last, params["out_w"], params["out_b"])
    probs = nn_core.softmax(logits)
    cache = {"kind": hp.model_type, "seq_cache": seq_cache, "h_last": h_last}
    return probs, cache


def backward(
    hp: Hyperparameters,
    params: dict[str, np.ndarray],
    cache: dict,
    probs: np.ndarray,
    true_class: int,
) -> dict[str, np.ndarray]:
    """Exact gradients of the cross-entropy loss w.r.t. every parameter."""
    dlogits = nn_core.cross_entropy_grad(probs, true_class)
    if cache["kind"] == "CNN":
        dpooled, d_out_w, d_out_b = nn_core.dense_backward(dlogits, cache["pooled"], params["out_w"])
        if cache["mask"] is not None:
            dpooled = dpooled * cache["mask"]
        dconv = nn_core.global_maxpool1d_backward(dpooled, cache["argmax"], cache["T"])
        _, d_conv_w, d_conv_b = nn_core.conv1d_backward(dconv, cache["conv_cache"])
        return {"conv_w": d_conv_w, "conv_b": d_conv_b, "out_w": d_out_w, "out_b": d_out_b}

    dh_last, d_out_w, d_out_b = nn_core.dense_backward(dlogits, cache["h_last"], params["out_w"])
    if cache["kind"] == "LSTM":
        seq_grads = nn_core.lstm_backward(dh_last, cache["seq_cache"])
    else:
        seq_grads = nn_core.rnn_backward(dh_last, cache["seq_cache"])
    seq_grads = dict(seq_grads)
    seq_grads["out_w"] = d_out_w
    seq_grads["out_b"] = d_out_b
    return seq_grads


def predict(model: ClassifierModel, matrix: SentenceMatrix) -> np.ndarray:
    """Deterministic 3-class distribution; dropout disabled.

    Degenerate inputs (length 0) return the uniform distribution without
    running the network.
    """
    if matrix.dim != model.hp.embedding_dim or matrix.max_len != model.hp.max_len:
        raise ValueError(
            f"matrix shape ({matrix.max_len}, {matrix.dim}) does not match model "
            f"({model.hp.max_len}, {model.hp.embedding_dim})"
        )
    if matrix.is_degenerate:
        return UNIFORM_DISTRIBUTION.copy()
    probs, _ = forward(model.hp, model.params, matrix, training=False)
    return probs


# ---------------------------------------------------------------------------
# checkpointing
# ---------------------------------------------------------------------------


def _array_order(model: ClassifierModel) -> list[tuple[str, str, np.ndarray]]:
    entries = [("params", name, model.params[name]) for name in sorted(model.params)]
    for slot in sorted(model.opt_state.slots):
        for name in sorted(model.opt_state.slots[slot]):
            entries.append((f"slot:{slot}", name, model.opt_state.slots[slot][name]))
    return entries


def save(model: ClassifierModel, path: str) -> None:
    """Write an RLV1 checkpoint; the write is atomic (temp file then rename)."""
    entries = _array_order(model)
    meta = {
        "version": CHECKPOINT_VERSION,
        "hyperparameters": dataclasses.asdict(model.hp),
        "n_trained": model.n_trained,
        "train_calls": model.train_calls,
        "created_at": model.created_at,
        "updated_at": model.updated_at,
        "optimizer": {"kind": model.opt_state.kind, "t": model.opt_state.t},
        "arrays": [
            {"group": group, "name": name, "shape": list(arr.shape)}
            for group, name, arr in entries
        ],
        "window": {
            "capacity": model.window.capacity,
            "examples": [
                {
                    "id": ex.id,
                    "raw_text": ex.raw_text,
                    "tokens": ex.tokens,
                    "label": int(ex.label),
                    "source": ex.source,
                }
                for ex in model.window
            ],
        },
    }
    meta_bytes = json.dumps(meta, sort_keys=True).encode("utf-8")
    blob = bytearray()
    blob += CHECKPOINT_MAGIC
    blob += struct.pack("<I", len(meta_bytes))
    blob += meta_bytes
    for _, _, arr in entries:
        blob += arr.astype("<f4", copy=False).tobytes()
    blob += struct.pack("<I", zlib.crc32(bytes(blob)) & 0xFFFFFFFF)

    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "wb") as f:
        f.write(blob)
    os.replace(tmp, path)


def restore(path: str, table: EmbeddingTable) -> ClassifierModel:
    """Load an RLV1 checkpoint; window matrices are rebuilt from the table."""
    with open(path, "rb") as f:
        blob = f.read()
    if len(blob) < len(CHECKPOINT_MAGIC) + 8:
        raise CheckpointError(f"checkpoint {path} is truncated")
    if blob[:4] != CHECKPOINT_MAGIC:
        raise CheckpointError(f"checkpoint {path} has bad magic bytes {blob[:4]!r}")
    stored_crc = struct.unpack("<I", blob[-4:])[0]
    actual_crc = zlib.crc32(blob[:-4]) & 0xFFFFFFFF
    if stored_crc != actual_crc:
        raise ChecksumError(
            f"checkpoint {path} checksum mismatch: stored {stored_crc:#010x}, "
            f"computed {actual_crc:#010x}"
        )
    (meta_len,) = struct.unpack("<I", blob[4:8])
    meta_end = 8 + meta_len
    if meta_end + 4 > len(blob):
        raise CheckpointError(f"checkpoint {path} is truncated inside metadata")
    try:
        meta = json.loads(blob[8:meta_end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"checkpoint {path} has unreadable metadata: {exc}") from None
    version = meta.get("version")
    if version != CHECKPOINT_VERSION:
        raise CheckpointVersionError(
            f"checkpoint {path} is format version {version}; this build reads version "
            f"{CHECKPOINT_VERSION}"
        )
    hp = Hyperparameters(**meta["hyperparameters"])

    offset = meta_end
    arrays: dict[tuple[str, str], np.ndarray] = {}
    for entry in meta["arrays"]:
        shape = tuple(entry["shape"])
        nbytes = 4 * int(np.prod(shape)) if shape else 4
        chunk = blob[offset : offset + nbytes]
        if len(chunk) != nbytes:
            raise CheckpointError(
                f"checkpoint {path} is truncated in array {entry['group']}/{entry['name']}"
            )
        arrays[(entry["group"], entry["name"])] = np.frombuffer(chunk, dtype="<f4").reshape(shape).copy()
        offset += nbytes
    if offset != len(blob) - 4:
        raise CheckpointError(f"checkpoint {path} has {len(blob) - 4 - offset} trailing payload bytes")

    params = {name: arr for (group, name), arr in arrays.items() if group == "params"}
    slots: dict[str, dict[str, np.ndarray]] = {}
    for (group, name), arr in arrays.items():
        if group.startswith("slot:"):
            slots.setdefault(group.split(":", 1)[1], {})[name] = arr
    opt_state = nn_core.OptimizerState(meta["optimizer"]["kind"], slots, t=meta["optimizer"]["t"])

    window = TrainingWindow(meta["window"]["capacity"])
    restored = []
    for item in meta["window"]["examples"]:
        ex = LabeledExample(
            id=item["id"],
            raw_text=item["raw_text"],
            label=RelevanceLabel(item["label"]),
            source=item["source"],
            tokens=list(item["tokens"]),
        )
        ex.matrix = to_matrix(ex.tokens, table, hp.max_len)
        restored.append(ex)
    window.extend(restored)

    return ClassifierModel(
        hp,
        params,
        opt_state,
        window,
        n_trained=meta["n_trained"],
        train_calls=meta["train_calls"],
        created_at=meta["created_at"],
        updated_at=meta["updated_at"],
    )
