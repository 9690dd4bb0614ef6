"""Pre-trained word-embedding tables in the word2vec binary and text formats.

Binary layout (bit-exact contract): an ASCII header ``"<vocab_size> <dim>\\n"``,
then per word the UTF-8 token bytes, one space (0x20), and ``dim`` little-endian
IEEE-754 float32 values; a trailing ``'\\n'`` after each vector is tolerated.
Text layout: one ``token v1 v2 ... vdim`` record per line.

Tables are immutable after load and safe for concurrent reads. Vectors are kept
exactly as stored on disk (single precision, no normalization); lookups return
the stored values or nothing at all.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import BinaryIO, Mapping, Optional

import numpy as np

from .errors import EmbeddingFormatError

__all__ = ["EmbeddingTable", "load_binary", "load_text", "save_binary"]


@dataclass(frozen=True)
class EmbeddingTable:
    """token -> row-index map over a contiguous float32 vector array."""

    dim: int
    vocab: dict[str, int]
    vectors: np.ndarray  # shape (len(vocab), dim), float32

    def __post_init__(self) -> None:
        if self.vectors.shape != (len(self.vocab), self.dim):
            raise ValueError(
                f"vector array shape {self.vectors.shape} does not match "
                f"{len(self.vocab)} tokens of dimension {self.dim}"
            )
        if self.vectors.dtype != np.float32:
            raise ValueError("vectors must be float32")
        if self.vectors.size and not np.all(np.isfinite(self.vectors)):
            raise ValueError("embedding vectors must be finite")

    def __len__(self) -> int:
        return len(self.vocab)

    def lookup(self, token: str) -> Optional[np.ndarray]:
        """Exact, case-sensitive lookup; absence is a value, not an error."""
        idx = self.vocab.get(token)
        if idx is None:
            return None
        return self.vectors[idx]

    def __contains__(self, token: str) -> bool:
        return token in self.vocab

    @classmethod
    def from_pairs(cls, pairs: Mapping[str, "np.ndarray | list[float]"]) -> "EmbeddingTable":
        """Build a table directly from token -> vector pairs (tests, tiny demos)."""
        if not pairs:
            raise ValueError("from_pairs requires at least one vector (dim is unknown otherwise)")
        vocab: dict[str, int] = {}
        rows = []
        for token, vec in pairs.items():
            vocab[token] = len(rows)
            rows.append(np.asarray(vec, dtype=np.float32))
        dims = {r.shape for r in rows}
        if len(dims) != 1 or rows[0].ndim != 1:
            raise ValueError(f"inconsistent vector shapes: {sorted(dims)}")
        return cls(dim=rows[0].shape[0], vocab=vocab, vectors=np.stack(rows))


def _read_token(f: BinaryIO, position: int) -> str:
    """Read token bytes up to a single 0x20; tolerate a leading '\\n' left over
    from the previous vector (both conventions exist in the wild)."""
    chunks = bytearray()
    while True:
        b = f.read(1)
        if not b:
            raise EmbeddingFormatError(
                f"truncated file: end of data while reading token #{position}"
            )
        if b == b" ":
            break
        chunks += b
    raw = bytes(chunks).lstrip(b"\n")
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise EmbeddingFormatError(f"token #{position} is not valid UTF-8: {exc}") from None


def load_binary(path: str) -> EmbeddingTable:
    """Load a word2vec binary file.

    Raises EmbeddingFormatError on a malformed header, a truncated vector
    payload (naming the offending token), or a duplicate token (with its
    position).
    """
    with open(path, "rb") as raw:
        f = io.BufferedReader(raw)
        header = f.readline()
        parts = header.split()
        if len(parts) != 2:
            raise EmbeddingFormatError(f"malformed header {header!r}: expected '<vocab_size> <dim>'")
        try:
            vocab_size, dim = int(parts[0]), int(parts[1])
        except ValueError:
            raise EmbeddingFormatError(f"malformed header {header!r}: non-integer fields") from None
        if vocab_size < 0 or dim <= 0:
            raise EmbeddingFormatError(f"malformed header {header!r}: sizes out of range")

        vocab: dict[str, int] = {}
        vectors = np.empty((vocab_size, dim), dtype=np.float32)
        row_bytes = 4 * dim
        for i in range(vocab_size):
            token = _read_token(f, i)
            payload = f.read(row_bytes)
            if len(payload) != row_bytes:
                raise EmbeddingFormatError(
                    f"truncated vector payload for token {token!r} "
                    f"(#{i}): expected {row_bytes} bytes, got {len(payload)}"
                )
            if token in vocab:
                raise EmbeddingFormatError(
                    f"duplicate token {token!r} at position {i} (first seen at {vocab[token]})"
                )
            vocab[token] = i
            vectors[i] = np.frombuffer(payload, dtype="<f4")
    return EmbeddingTable(dim=dim, vocab=vocab, vectors=vectors)


def load_text(path: str) -> EmbeddingTable:
    """Load a word2vec text file (one whitespace-separated record per line).

    Raises EmbeddingFormatError on inconsistent dimensionality, a non-numeric
    component, or a duplicate token.
    """
    vocab: dict[str, int] = {}
    rows: list[np.ndarray] = []
    dim: Optional[int] = None
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            fields = line.split()
            if not fields:
                continue
            token, comps = fields[0], fields[1:]
            if dim is None:
                dim = len(comps)
                if dim == 0:
                    raise EmbeddingFormatError(f"line {lineno}: record has no vector components")
            elif len(comps) != dim:
                raise EmbeddingFormatError(
                    f"line {lineno}: expected {dim} components, got {len(comps)}"
                )
            if token in vocab:
                raise EmbeddingFormatError(f"duplicate token {token!r} at line {lineno}")
            try:
                vec = np.array(comps, dtype=np.float32)
            except ValueError:
                raise EmbeddingFormatError(f"line {lineno}: non-numeric vector component") from None
            vocab[token] = len(rows)
            rows.append(vec)
    if dim is None:
        raise EmbeddingFormatError("empty text embedding file (no records, no dimensionality)")
    vectors = np.stack(rows) if rows else np.empty((0, dim), dtype=np.float32)
    return EmbeddingTable(dim=dim, vocab=vocab, vectors=vectors)


def save_binary(table: EmbeddingTable, path: str) -> None:
    """Write the binary format such that load_binary(save_binary(t)) == t bit-exactly."""
    order = sorted(table.vocab, key=table.vocab.get)
    with open(path, "wb") as f:
        f.write(f"{len(table.vocab)} {table.dim}\n".encode("ascii"))
        for token in order:
            f.write(token.encode("utf-8"))
            f.write(b" ")
            f.write(table.vectors[table.vocab[token]].astype("<f4", copy=False).tobytes())
            f.write(b"\n")
