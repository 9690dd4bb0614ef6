"""Labeled examples and the sliding training window they flow through."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

from .embeddings import EmbeddingTable
from .labels import RelevanceLabel
from .text_pipeline import SentenceMatrix, clean, to_matrix, tokenize

DEFAULT_WINDOW_CAPACITY = 110
DEFAULT_DELIVERY_SIZE = 10


@dataclass
class LabeledExample:
    """One labeled text, optionally vectorized (tokens + cached matrix)."""

    id: str
    raw_text: str
    label: RelevanceLabel
    source: str = "dataset"  # 'user' | 'dataset'
    tokens: Optional[list[str]] = None
    matrix: Optional[SentenceMatrix] = None

    def vectorize(self, table: EmbeddingTable, max_len: int) -> "LabeledExample":
        """Populate tokens and the cached sentence matrix in place."""
        self.tokens = tokenize(clean(self.raw_text))
        self.matrix = to_matrix(self.tokens, table, max_len)
        return self

    @property
    def is_degenerate(self) -> bool:
        """Empty-after-cleaning or all-OOV; excluded from training batches."""
        if self.matrix is None:
            raise ValueError(f"example {self.id!r} has not been vectorized")
        return self.matrix.length == 0

    @classmethod
    def from_text(
        cls,
        id: str,
        raw_text: str,
        label: RelevanceLabel,
        table: EmbeddingTable,
        max_len: int,
        source: str = "user",
    ) -> "LabeledExample":
        return cls(id=id, raw_text=raw_text, label=label, source=source).vectorize(table, max_len)


class TrainingWindow:
    """Arrival-ordered buffer of labeled examples, oldest evicted beyond capacity.

    A re-arriving text id replaces its previous copy (the user's latest label
    wins) and counts as a fresh arrival, so exactly one copy per id is ever
    retained.
    """

    def __init__(self, capacity: int = DEFAULT_WINDOW_CAPACITY):
        if capacity < 1:
            raise ValueError(f"window capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self._buf: list[LabeledExample] = []

    def __len__(self) -> int:
        return len(self._buf)

    def __iter__(self) -> Iterator[LabeledExample]:
        return iter(self._buf)

    def extend(self, batch: Iterable[LabeledExample]) -> None:
        incoming = list(batch)
        replaced = {ex.id for ex in incoming}
        self._buf = [ex for ex in self._buf if ex.id not in replaced]
        self._buf.extend(incoming)
        if len(self._buf) > self.capacity:
            del self._buf[: len(self._buf) - self.capacity]

    def ids(self) -> list[str]:
        return [ex.id for ex in self._buf]

    def contents(self) -> list[LabeledExample]:
        return list(self._buf)
