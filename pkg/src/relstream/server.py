"""HTTP service for model lifecycle, batch prediction, and training.

JSON over HTTP/1.1 with three POST endpoints (/init/, /getLabels/,
/updateLabels/) plus GET /healthz. Wire probabilities are serialized to six
decimal places with the largest component adjusted so each distribution still
sums to 1. Models are kept per (user_id, classifier_id) pair under
``<data_dir>/<user_id>/<classifier_id>.rlv`` and every write goes through an
atomic checkpoint rewrite, so the registry survives restarts byte-for-byte.

Per model, writes are exclusive and reads block behind an in-flight write;
distinct models proceed fully in parallel.
"""

from __future__ import annotations

import json
import logging
import os
import re
import threading
import time
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import metrics, models, trainer
from .embeddings import EmbeddingTable
from .errors import TrainingError
from .labels import RelevanceLabel
from .simulation import Corpus
from .window import DEFAULT_WINDOW_CAPACITY, LabeledExample

logger = logging.getLogger(__name__)

_ID_RE = re.compile(r"^[A-Za-z0-9_-]+$")

ALLOWED_HP_OVERRIDES = {
    "learning_rate",
    "batch_size",
    "epochs",
    "dropout",
    "recurrent_dropout",
    "filter_size",
    "kernel_size",
    "optimizer",
    "hidden_size",
    "max_len",
    "seed",
}


@dataclass
class ServerConfig:
    table: EmbeddingTable
    data_dir: str
    max_batch: int = 1000
    trend_a: float = metrics.DEFAULT_TREND_A
    trend_b: float = metrics.DEFAULT_TREND_B
    max_len: int = 64
    window_capacity: int = DEFAULT_WINDOW_CAPACITY
    default_model_type: str = "CNN"


def round_distribution(probs) -> list[float]:
    """Six-decimal wire rounding; the largest component absorbs the residual
    so the rounded values sum to 1 within float tolerance."""
    vals = [round(float(p), 6) for p in probs]
    top = max(range(len(vals)), key=vals.__getitem__)
    others = sum(v for j, v in enumerate(vals) if j != top)
    vals[top] = round(1.0 - others, 6)
    return vals


class _Managed:
    __slots__ = ("model", "lock")

    def __init__(self, model: models.ClassifierModel):
        self.model = model
        self.lock = threading.Lock()


class ModelRegistry:
    """Per-(user, classifier) models with lazy restore and atomic persistence."""

    def __init__(self, config: ServerConfig):
        self.config = config
        self._entries: dict[tuple[str, str], _Managed] = {}
        self._registry_lock = threading.Lock()
        os.makedirs(config.data_dir, exist_ok=True)

    def checkpoint_path(self, user_id: str, classifier_id: str) -> str:
        return os.path.join(self.config.data_dir, user_id, f"{classifier_id}.rlv")

    def get(self, user_id: str, classifier_id: str) -> Optional[_Managed]:
        key = (user_id, classifier_id)
        with self._registry_lock:
            entry = self._entries.get(key)
            if entry is not None:
                return entry
            path = self.checkpoint_path(user_id, classifier_id)
            if os.path.exists(path):
                entry = _Managed(models.restore(path, self.config.table))
                self._entries[key] = entry
                return entry
        return None

    def get_or_create(
        self,
        user_id: str,
        classifier_id: str,
        model_type: Optional[str] = None,
        hp_overrides: Optional[dict] = None,
    ) -> tuple[_Managed, bool]:
        existing = self.get(user_id, classifier_id)
        if existing is not None:
            self._check_consistent(existing.model.hp, model_type, hp_overrides)
            return existing, False
        with self._registry_lock:
            key = (user_id, classifier_id)
            if key in self._entries:  # lost a creation race
                entry = self._entries[key]
                self._check_consistent(entry.model.hp, model_type, hp_overrides)
                return entry, False
            hp = self._build_hp(model_type, hp_overrides)
            model = models.build(hp, window_capacity=self.config.window_capacity)
            entry = _Managed(model)
            path = self.checkpoint_path(user_id, classifier_id)
            os.makedirs(os.path.dirname(path), exist_ok=True)
            models.save(model, path)
            self._entries[key] = entry
            return entry, True

    def _build_hp(self, model_type: Optional[str], hp_overrides: Optional[dict]):
        overrides = dict(hp_overrides or {})
        unknown = set(overrides) - ALLOWED_HP_OVERRIDES
        if unknown:
            raise ApiError(400, f"unknown hyperparameter fields: {sorted(unknown)}")
        overrides.setdefault("max_len", self.config.max_len)
        overrides["embedding_dim"] = self.config.table.dim
        try:
            return models.defaults_for(model_type or self.config.default_model_type, **overrides)
        except ValueError as exc:
            raise ApiError(400, str(exc)) from None

    def _check_consistent(self, hp, model_type: Optional[str], hp_overrides: Optional[dict]):
        if model_type is not None and model_type != hp.model_type:
            raise ApiError(
                409,
                f"model exists with type {hp.model_type}, request asked for {model_type}",
            )
        for name, value in (hp_overrides or {}).items():
            if name not in ALLOWED_HP_OVERRIDES:
                raise ApiError(400, f"unknown hyperparameter field: {name}")
            if getattr(hp, name) != value:
                raise ApiError(
                    409,
                    f"model exists with {name}={getattr(hp, name)}, request asked for {value}",
                )

    def save(self, user_id: str, classifier_id: str, entry: _Managed) -> None:
        path = self.checkpoint_path(user_id, classifier_id)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        models.save(entry.model, path)


class ApiError(Exception):
    def __init__(self, status: int, detail: str):
        self.status = status
        self.detail = detail
        super().__init__(detail)


# --- request bodies ---------------------------------------------------------


class ModelKey(BaseModel):
    user_id: str
    classifier_id: str


class InitRequest(BaseModel):
    user_id: str
    classifier_id: str
    model_type: Optional[str] = None
    hyperparameters: Optional[dict] = None


class TweetIn(BaseModel):
    id: str
    text: str


class GetLabelsRequest(BaseModel):
    model_key: ModelKey
    tweets: list[TweetIn]


class ExampleIn(BaseModel):
    id: str
    text: str
    label: str


class UpdateLabelsRequest(BaseModel):
    model_key: ModelKey
    examples: list[ExampleIn]


# --- app --------------------------------------------------------------------


def create_app(config: ServerConfig) -> FastAPI:
    app = FastAPI(title="relstream", docs_url=None, redoc_url=None)
    registry = ModelRegistry(config)
    app.state.registry = registry

    def estimated_f1(n_trained: int) -> float:
        return round(metrics.estimate_f1(n_trained, config.trend_a, config.trend_b), 6)

    def check_ids(*ids: str) -> None:
        for value in ids:
            if not _ID_RE.match(value):
                raise ApiError(400, f"id {value!r} must match [A-Za-z0-9_-]+")

    def lookup(key: ModelKey) -> _Managed:
        check_ids(key.user_id, key.classifier_id)
        entry = registry.get(key.user_id, key.classifier_id)
        if entry is None:
            raise ApiError(404, f"no model for user {key.user_id!r} classifier {key.classifier_id!r}")
        return entry

    @app.exception_handler(ApiError)
    async def api_error_handler(_: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content={"detail": exc.detail})

    @app.exception_handler(RequestValidationError)
    async def validation_handler(_: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": "malformed body", "errors": exc.errors()})

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/init/")
    def init(req: InitRequest):
        check_ids(req.user_id, req.classifier_id)
        if req.model_type is not None and req.model_type not in models.MODEL_TYPES:
            raise ApiError(400, f"model_type must be one of {list(models.MODEL_TYPES)}")
        _, created = registry.get_or_create(
            req.user_id, req.classifier_id, req.model_type, req.hyperparameters
        )
        return {
            "model_key": {"user_id": req.user_id, "classifier_id": req.classifier_id},
            "created": created,
        }

    @app.post("/getLabels/")
    def get_labels(req: GetLabelsRequest):
        entry = lookup(req.model_key)
        if len(req.tweets) > config.max_batch:
            raise ApiError(413, f"batch of {len(req.tweets)} exceeds max_batch {config.max_batch}")
        with entry.lock:
            preds = trainer.predict_batch(entry.model, [t.text for t in req.tweets], config.table)
            n_trained = entry.model.n_trained
        return {
            "labels": [
                {"id": t.id, "label": p.label.wire, "probs": round_distribution(p.probs)}
                for t, p in zip(req.tweets, preds)
            ],
            "n_trained": n_trained,
            "estimated_f1": estimated_f1(n_trained),
        }

    @app.post("/updateLabels/")
    def update_labels(req: UpdateLabelsRequest):
        entry = lookup(req.model_key)
        if len(req.examples) > config.max_batch:
            raise ApiError(413, f"batch of {len(req.examples)} exceeds max_batch {config.max_batch}")
        batch = []
        for item in req.examples:
            try:
                label = RelevanceLabel.from_wire(item.label)
            except ValueError:
                raise ApiError(400, f"invalid label {item.label!r} for id {item.id!r}") from None
            batch.append(
                LabeledExample.from_text(
                    item.id, item.text, label, config.table, entry.model.hp.max_len, source="user"
                )
            )
        with entry.lock:
            try:
                report = trainer.submit_labels(entry.model, batch)
            except TrainingError as exc:
                raise ApiError(422, str(exc)) from None
            registry.save(req.model_key.user_id, req.model_key.classifier_id, entry)
            n_trained = entry.model.n_trained
        return {
            "status": "ok",
            "n_trained": n_trained,
            "estimated_f1": estimated_f1(n_trained),
            "train_seconds": round(report.duration_seconds, 6),
            "rejected_ids": report.rejected_ids,
        }

    return app


# --- replay streamer --------------------------------------------------------


class ReplayStream:
    """Feed a corpus as a simulated live stream at a fixed rate.

    Items carry id + raw text only (labels are withheld; labeling is the
    human's job). The sink is either an in-process callback or an HTTP
    endpoint that receives one JSON POST per item; unreachable sinks are
    retried with exponential backoff before the error is surfaced.
    """

    def __init__(
        self,
        corpus: Corpus,
        rate: float,
        sink: Union[str, Callable[[dict], None]],
        max_retries: int = 5,
        backoff: float = 0.1,
    ):
        if rate <= 0:
            raise ValueError(f"rate must be positive, got {rate}")
        self.corpus = corpus
        self.rate = rate
        self.sink = sink
        self.max_retries = max_retries
        self.backoff = backoff
        self.emitted = 0
        self.error: Optional[Exception] = None
        self._resume = threading.Event()
        self._resume.set()
        self._stop = threading.Event()
        self._thread: Optional[threading.Thread] = None

    def _deliver(self, item: dict) -> None:
        if callable(self.sink):
            self.sink(item)
            return
        body = json.dumps(item).encode("utf-8")
        last: Optional[Exception] = None
        for attempt in range(self.max_retries + 1):
            try:
                req = urllib.request.Request(
                    self.sink, data=body, headers={"Content-Type": "application/json"}
                )
                with urllib.request.urlopen(req, timeout=10):
                    return
            except (urllib.error.URLError, OSError) as exc:
                last = exc
                time.sleep(self.backoff * (2**attempt))
        raise RuntimeError(f"sink {self.sink!r} unreachable after {self.max_retries + 1} attempts") from last

    def _run(self) -> None:
        interval = 1.0 / self.rate
        try:
            for ex in self.corpus.examples:
                if self._stop.is_set():
                    return
                self._resume.wait()
                if self._stop.is_set():
                    return
                self._deliver({"id": ex.id, "text": ex.raw_text})
                self.emitted += 1
                time.sleep(interval)
        except Exception as exc:  # surfaced via .error after retries
            self.error = exc
            logger.error("replay stream failed: %s", exc)

    def start(self) -> "ReplayStream":
        if self._thread is not None:
            raise RuntimeError("stream already started")
        self._thread = threading.Thread(target=self._run, name="replay-stream", daemon=True)
        self._thread.start()
        return self

    def pause(self) -> None:
        self._resume.clear()

    def resume(self) -> None:
        self._resume.set()

    def stop(self) -> None:
        self._stop.set()
        self._resume.set()

    def join(self, timeout: Optional[float] = None) -> None:
        if self._thread is not None:
            self._thread.join(timeout)

    @property
    def finished(self) -> bool:
        return self._thread is not None and not self._thread.is_alive()


def replay_stream(
    corpus: Corpus, rate: float, sink: Union[str, Callable[[dict], None]], **kwargs
) -> ReplayStream:
    """Start streaming corpus items to the sink; returns the stream handle."""
    return ReplayStream(corpus, rate, sink, **kwargs).start()
