import numpy as np
import pytest

from relstream import Corpus, EmbeddingTable, LabeledExample, RelevanceLabel

VOCAB = [
    "flood", "water", "rising", "river", "house", "road", "closed", "team",
    "rescue", "people", "trapped", "need", "help", "now", "game", "tonight",
    "pizza", "great", "coffee", "monday", "weather", "sunny", "school", "news",
]
MARKER = "flare"


def tiny_embedding(dim: int = 8, seed: int = 100) -> EmbeddingTable:
    rng = np.random.default_rng(seed)
    pairs = {tok: rng.normal(scale=1.0, size=dim) for tok in VOCAB}
    pairs[MARKER] = rng.normal(scale=1.0, size=dim)
    return EmbeddingTable.from_pairs(pairs)


def marker_corpus(
    n: int, table: EmbeddingTable, max_len: int = 8, seed: int = 7, name: str = "synthetic"
) -> Corpus:
    """Relevance is exactly the presence of the marker token: a linearly
    separable stream for convergence checks."""
    rng = np.random.default_rng(seed)
    examples = []
    for i in range(n):
        length = int(rng.integers(3, 8))
        tokens = list(rng.choice(VOCAB, size=length))
        relevant = bool(rng.integers(0, 2))
        if relevant:
            tokens.insert(int(rng.integers(0, len(tokens) + 1)), MARKER)
        label = RelevanceLabel.RELEVANT if relevant else RelevanceLabel.NOT_RELEVANT
        examples.append(LabeledExample(id=f"syn{i}", raw_text=" ".join(tokens), label=label))
    return Corpus(name=name, examples=examples).vectorize(table, max_len)


@pytest.fixture(scope="session")
def table8() -> EmbeddingTable:
    return tiny_embedding(dim=8)
