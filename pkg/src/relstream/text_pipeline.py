"""Tweet-text cleaning, tokenization, and sentence-matrix construction.

Cleaning applies, in order: strip URLs, drop @mentions entirely, strip the
'#' marker while keeping the tag word (crisis hashtags carry content), replace
remaining punctuation/symbols with spaces, lowercase, collapse whitespace.
The result contains only lowercase ASCII letters, digits, and single spaces,
and cleaning is idempotent.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass

import numpy as np

from .embeddings import EmbeddingTable

logger = logging.getLogger(__name__)

_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_MENTION_RE = re.compile(r"@\w+")
_HASHMARK_RE = re.compile(r"#")
_NON_ALNUM_RE = re.compile(r"[^a-z0-9]+")


def clean(raw: str) -> str:
    """Normalize arbitrary UTF-8 input to the cleaned-text form."""
    text = _URL_RE.sub(" ", raw)
    text = _MENTION_RE.sub(" ", text)
    text = _HASHMARK_RE.sub("", text)
    text = text.lower()
    text = _NON_ALNUM_RE.sub(" ", text)
    return " ".join(text.split())


def tokenize(text: str) -> list[str]:
    """Split cleaned text into tokens; never yields empty tokens."""
    return text.split()


@dataclass
class SentenceMatrix:
    """Fixed-height stack of word vectors: real token rows, then zero padding."""

    rows: np.ndarray  # (max_len, dim) float32
    length: int  # number of real (non-padding) rows

    @property
    def max_len(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    @property
    def mask(self) -> np.ndarray:
        """Per-row real/padding flag; mask[i] iff i < length by construction."""
        return np.arange(self.max_len) < self.length

    @property
    def is_degenerate(self) -> bool:
        return self.length == 0


def to_matrix(tokens: list[str], table: EmbeddingTable, max_len: int) -> SentenceMatrix:
    """Embed tokens into a padded matrix.

    Tokens without an embedding are skipped (so padding rows and OOV rows are
    indistinguishable downstream); the first ``max_len`` embeddable tokens are
    kept. All-OOV or empty input yields length 0.
    """
    if max_len < 1:
        raise ValueError(f"max_len must be >= 1, got {max_len}")
    rows = np.zeros((max_len, table.dim), dtype=np.float32)
    length = 0
    skipped = 0
    for token in tokens:
        if length == max_len:
            break
        vec = table.lookup(token)
        if vec is None:
            skipped += 1
            continue
        rows[length] = vec
        length += 1
    if skipped:
        logger.debug("skipped %d out-of-vocabulary tokens of %d", skipped, len(tokens))
    return SentenceMatrix(rows=rows, length=length)


def text_to_matrix(raw: str, table: EmbeddingTable, max_len: int) -> SentenceMatrix:
    """clean -> tokenize -> to_matrix in one step."""
    return to_matrix(tokenize(clean(raw)), table, max_len)
