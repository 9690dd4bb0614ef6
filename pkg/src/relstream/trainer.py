"""The incremental training protocol.

Each user submission appends its examples to the model's sliding window
(evicting the oldest beyond capacity) and retrains for ``epochs`` passes over
the window contents, shuffled per epoch, in mini-batches of the configured
gradient batch size. A re-submitted text id carries the user's latest label
(user labels override the model's). Delivery granularity (nominally 10 new
examples) is independent of the gradient batch size.
"""

from __future__ import annotations

import dataclasses
import logging
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence, TYPE_CHECKING

import numpy as np

from . import metrics, models, nn_core
from .errors import TrainingError
from .labels import RelevanceLabel
from .models import ClassifierModel
from .text_pipeline import SentenceMatrix, clean, to_matrix, tokenize
from .window import DEFAULT_DELIVERY_SIZE, LabeledExample

if TYPE_CHECKING:
    from .embeddings import EmbeddingTable
    from .simulation import SimulationReport

logger = logging.getLogger(__name__)


@dataclass
class TrainReport:
    """What one submission did: counter, per-epoch mean loss, timing."""

    n_trained: int
    loss_trace: list[float]
    duration_seconds: float
    window_size: int
    rejected_ids: list[str] = field(default_factory=list)


@dataclass
class Prediction:
    label: RelevanceLabel
    probs: np.ndarray
    diagnostic: Optional[str] = None


def predict_label(model: ClassifierModel, matrix: SentenceMatrix) -> tuple[RelevanceLabel, np.ndarray]:
    """Argmax label with ties broken in class order (Relevant first).

    Degenerate matrices get the uniform distribution and Can't Decide.
    """
    if matrix.is_degenerate:
        return RelevanceLabel.CANT_DECIDE, models.UNIFORM_DISTRIBUTION.copy()
    probs = models.predict(model, matrix)
    return RelevanceLabel(int(np.argmax(probs))), probs


def _train_minibatch(
    model: ClassifierModel, batch: Sequence[LabeledExample], rng: np.random.Generator
) -> float:
    grads_sum: dict[str, np.ndarray] = {
        name: np.zeros(p.shape, dtype=np.float64) for name, p in model.params.items()
    }
    loss_sum = 0.0
    for ex in batch:
        probs, cache = models.forward(model.hp, model.params, ex.matrix, training=True, rng=rng)
        loss_sum += nn_core.cross_entropy(probs, int(ex.label))
        grads = models.backward(model.hp, model.params, cache, probs, int(ex.label))
        for name, g in grads.items():
            grads_sum[name] += g
    scale = 1.0 / len(batch)
    grads_mean = {name: g * scale for name, g in grads_sum.items()}
    nn_core.optimizer_step(model.params, grads_mean, model.opt_state, model.hp.learning_rate)
    return loss_sum * scale


def submit_labels(model: ClassifierModel, batch: Sequence[LabeledExample]) -> TrainReport:
    """Accept a batch of labeled examples, slide the window, retrain.

    Degenerate (empty/all-OOV) examples are rejected with a diagnostic;
    within the batch the latest label per text id wins.
    """
    if not batch:
        raise TrainingError("empty training batch")
    accepted: dict[str, LabeledExample] = {}
    rejected: list[str] = []
    for ex in batch:
        if ex.matrix is None:
            raise TrainingError(f"example {ex.id!r} has not been vectorized")
        if ex.is_degenerate:
            rejected.append(ex.id)
        else:
            accepted[ex.id] = ex
    if rejected:
        logger.debug("rejected %d degenerate examples: %s", len(rejected), rejected)
    if not accepted:
        raise TrainingError(f"all {len(batch)} examples are degenerate (empty or all-OOV)")

    started = time.perf_counter()
    model.window.extend(accepted.values())
    rng = np.random.default_rng([model.hp.seed, model.train_calls])
    model.train_calls += 1

    contents = model.window.contents()
    loss_trace = []
    for _ in range(model.hp.epochs):
        order = rng.permutation(len(contents))
        epoch_loss = 0.0
        n_batches = 0
        for start in range(0, len(order), model.hp.batch_size):
            chunk = [contents[i] for i in order[start : start + model.hp.batch_size]]
            epoch_loss += _train_minibatch(model, chunk, rng)
            n_batches += 1
        loss_trace.append(epoch_loss / n_batches)

    model.n_trained += len(accepted)
    model.updated_at = time.time()
    return TrainReport(
        n_trained=model.n_trained,
        loss_trace=loss_trace,
        duration_seconds=time.perf_counter() - started,
        window_size=len(model.window),
        rejected_ids=rejected,
    )


def predict_batch(
    model: ClassifierModel, texts: Sequence[str], table: "EmbeddingTable"
) -> list[Prediction]:
    """Pipeline + predict for each raw text, order-preserving.

    Per-item failures never abort the batch; they yield Can't Decide with a
    diagnostic.
    """
    out = []
    for raw in texts:
        try:
            matrix = to_matrix(tokenize(clean(raw)), table, model.hp.max_len)
            label, probs = predict_label(model, matrix)
            out.append(Prediction(label, probs))
        except Exception as exc:  # per-item isolation
            out.append(
                Prediction(
                    RelevanceLabel.CANT_DECIDE,
                    models.UNIFORM_DISTRIBUTION.copy(),
                    diagnostic=str(exc),
                )
            )
    return out


def evaluate(
    model: ClassifierModel, test_set: Sequence[LabeledExample], score_mode: str = "macro"
) -> metrics.ScoreTriple:
    """Score the model's argmax predictions over a vectorized test set."""
    truth = [int(ex.label) for ex in test_set]
    predicted = [int(predict_label(model, ex.matrix)[0]) for ex in test_set]
    return metrics.score(metrics.confusion(truth, predicted), mode=score_mode)


def simulate_stream(
    model: ClassifierModel,
    train_set: Sequence[LabeledExample],
    test_set: Sequence[LabeledExample],
    b_new: int = DEFAULT_DELIVERY_SIZE,
    score_mode: str = "macro",
) -> "SimulationReport":
    """Replay the incremental protocol: deliver b_new examples per iteration,
    retrain, then score on the full test set; one ScoreTriple per iteration.

    The report carries the component-wise average, per-iteration process-CPU
    and wall seconds, and the logarithmic trendline with its crossing at the
    average F1 (None when fewer than two iterations).
    """
    from .simulation import SimulationReport

    if not train_set or not test_set:
        raise ValueError("train and test sets must be non-empty")
    if len(train_set) < b_new:
        raise ValueError(f"train set of {len(train_set)} is smaller than the delivery size {b_new}")
    overlap = {ex.id for ex in train_set} & {ex.id for ex in test_set}
    if overlap:
        raise ValueError(f"train/test sets share {len(overlap)} ids, e.g. {sorted(overlap)[:3]}")

    iterations = len(train_set) // b_new
    per_iteration: list[metrics.ScoreTriple] = []
    cpu_seconds: list[float] = []
    wall_seconds: list[float] = []
    train_seconds: list[float] = []
    n_tweets: list[int] = []
    for i in range(iterations):
        chunk = train_set[i * b_new : (i + 1) * b_new]
        cpu0, wall0 = time.process_time(), time.perf_counter()
        train_report = submit_labels(model, chunk)
        per_iteration.append(evaluate(model, test_set, score_mode))
        cpu_seconds.append(time.process_time() - cpu0)
        wall_seconds.append(time.perf_counter() - wall0)
        train_seconds.append(train_report.duration_seconds)
        n_tweets.append((i + 1) * b_new)

    average = metrics.average_f1(per_iteration)
    trendline = None
    crossing_n = None
    if iterations >= 2:
        trendline = metrics.fit_log(
            [(n, s.f1) for n, s in zip(n_tweets, per_iteration)]
        )
        crossing_n = trendline.crossing_n(average.f1)

    return SimulationReport(
        per_iteration=per_iteration,
        average=average,
        cpu_seconds=cpu_seconds,
        total_cpu_seconds=float(sum(cpu_seconds)),
        wall_seconds=wall_seconds,
        train_seconds=train_seconds,
        n_tweets=n_tweets,
        trendline=trendline,
        crossing_n=crossing_n,
        score_mode=score_mode,
        config={
            "hyperparameters": dataclasses.asdict(model.hp),
            "window_capacity": model.window.capacity,
            "b_new": b_new,
            "train_size": len(train_set),
            "test_size": len(test_set),
        },
    )
