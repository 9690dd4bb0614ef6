"""Corpus ingestion, dataset splitting, random grid search, and report files.

Input corpora are UTF-8 CSVs with a header row (RFC-4180 quoting). Splits are
seeded shuffles followed by contiguous floor-sized slices, so hyperparameters
are always chosen on the validation partition and final numbers come from the
test partition, with models discarded between stages.
"""

from __future__ import annotations

import csv
import io
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .embeddings import EmbeddingTable
from .errors import CorpusFormatError
from .labels import RelevanceLabel
from .metrics import ScoreTriple, TrendlineFit
from .models import Hyperparameters, build
from .window import DEFAULT_DELIVERY_SIZE, DEFAULT_WINDOW_CAPACITY, LabeledExample

DEFAULT_CRISISLEX_MAPPING = {
    "Related and informative": RelevanceLabel.RELEVANT,
    "Related - but not informative": RelevanceLabel.RELEVANT,
    "Not related": RelevanceLabel.NOT_RELEVANT,
    "Not applicable": RelevanceLabel.CANT_DECIDE,
}

_CRISISLEX_TEXT_COLUMNS = ("Tweet Text", "tweet_text", "text")
_CRISISLEX_INFO_COLUMNS = ("Informativeness", "informativeness")
_CRISISLEX_ID_COLUMNS = ("Tweet ID", "tweet_id", "id")


@dataclass
class Corpus:
    """Named list of labeled examples with unique, stable ids."""

    name: str
    examples: list[LabeledExample]

    def __post_init__(self) -> None:
        seen: dict[str, int] = {}
        for i, ex in enumerate(self.examples):
            if ex.id in seen:
                raise CorpusFormatError(
                    f"corpus {self.name!r}: duplicate id {ex.id!r} at positions {seen[ex.id]} and {i}"
                )
            seen[ex.id] = i

    def __len__(self) -> int:
        return len(self.examples)

    def histogram(self) -> dict[RelevanceLabel, int]:
        counts = Counter(ex.label for ex in self.examples)
        return {label: counts.get(label, 0) for label in RelevanceLabel}

    def vectorize(self, table: EmbeddingTable, max_len: int) -> "Corpus":
        for ex in self.examples:
            ex.vectorize(table, max_len)
        return self


@dataclass(frozen=True)
class SplitSpec:
    """(train, validation, test) fractions summing to 1, plus the shuffle seed."""

    train: float
    validation: float
    test: float
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("train", "validation", "test"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} fraction must be >= 0")
        total = self.train + self.validation + self.test
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"fractions must sum to 1, got {total}")

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> "SplitSpec":
        """Parse '80/10/10'-style percentage strings."""
        parts = text.split("/")
        if len(parts) != 3:
            raise ValueError(f"split spec {text!r} must have three /-separated fields")
        tr, va, te = (float(p) / 100.0 for p in parts)
        return cls(train=tr, validation=va, test=te, seed=seed)


@dataclass
class SimulationReport:
    """Per-iteration score trajectory plus its averages and fitted trendline."""

    per_iteration: list[ScoreTriple]
    average: ScoreTriple
    cpu_seconds: list[float]
    total_cpu_seconds: float
    wall_seconds: list[float]
    train_seconds: list[float]
    n_tweets: list[int]
    trendline: Optional[TrendlineFit]
    crossing_n: Optional[int]
    score_mode: str
    config: dict

    @property
    def iterations(self) -> int:
        return len(self.per_iteration)


# ---------------------------------------------------------------------------
# loaders
# ---------------------------------------------------------------------------


def _open_csv(path: str):
    return open(path, "r", encoding="utf-8-sig", newline="")


def load_figure_eight(path: str, name: Optional[str] = None) -> Corpus:
    """Load a crowd-labeled disaster corpus: columns `text` and `choose_one`
    with values Relevant / Not Relevant / Can't Decide."""
    examples = []
    with _open_csv(path) as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None:
            raise CorpusFormatError(f"{path}: empty file, no header row")
        missing = {"text", "choose_one"} - set(reader.fieldnames)
        if missing:
            raise CorpusFormatError(f"{path}: missing required columns {sorted(missing)}")
        has_id = "id" in reader.fieldnames
        for row in reader:
            line = reader.line_num
            try:
                label = RelevanceLabel.from_wire(row["choose_one"])
            except ValueError:
                raise CorpusFormatError(
                    f"{path}:{line}: unknown label value {row['choose_one']!r}"
                ) from None
            rid = row["id"] if has_id and row.get("id") else f"row{line}"
            examples.append(LabeledExample(id=rid, raw_text=row["text"], label=label))
    return Corpus(name=name or path, examples=examples)


def _pick_column(fieldnames, candidates, override, kind, path):
    if override is not None:
        if override not in fieldnames:
            raise CorpusFormatError(f"{path}: {kind} column {override!r} not in header {fieldnames}")
        return override
    for cand in candidates:
        if cand in fieldnames:
            return cand
    raise CorpusFormatError(
        f"{path}: no {kind} column found; tried {list(candidates)} in header {fieldnames}"
    )


def load_crisislex(
    path: str,
    mapping: Optional[dict[str, RelevanceLabel]] = None,
    text_column: Optional[str] = None,
    info_column: Optional[str] = None,
    id_column: Optional[str] = None,
    name: Optional[str] = None,
) -> Corpus:
    """Load a CrisisLexT26-style event file, mapping informativeness values to
    relevance labels. Column names vary per event file, so overrides are
    accepted; the label mapping is table-driven with the default treating both
    'Related' values as Relevant."""
    mapping = DEFAULT_CRISISLEX_MAPPING if mapping is None else mapping
    examples = []
    with _open_csv(path) as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None:
            raise CorpusFormatError(f"{path}: empty file, no header row")
        text_col = _pick_column(reader.fieldnames, _CRISISLEX_TEXT_COLUMNS, text_column, "text", path)
        info_col = _pick_column(
            reader.fieldnames, _CRISISLEX_INFO_COLUMNS, info_column, "informativeness", path
        )
        id_col = None
        if id_column is not None or any(c in reader.fieldnames for c in _CRISISLEX_ID_COLUMNS):
            id_col = _pick_column(reader.fieldnames, _CRISISLEX_ID_COLUMNS, id_column, "id", path)
        for row in reader:
            line = reader.line_num
            info = row[info_col]
            if info not in mapping:
                raise CorpusFormatError(
                    f"{path}:{line}: unmapped informativeness value {info!r}"
                )
            rid = str(row[id_col]).strip("'\"") if id_col and row.get(id_col) else f"row{line}"
            examples.append(LabeledExample(id=rid, raw_text=row[text_col], label=mapping[info]))
    return Corpus(name=name or path, examples=examples)


# ---------------------------------------------------------------------------
# splitting
# ---------------------------------------------------------------------------


def split(
    corpus: Corpus, spec: SplitSpec
) -> tuple[list[LabeledExample], list[LabeledExample], list[LabeledExample]]:
    """Seeded shuffle, then contiguous slices: train gets the first
    floor(f_train*N), validation the next floor(f_val*N), test the remainder.
    Any partition with a positive fraction must come out non-empty."""
    n = len(corpus.examples)
    order = np.random.default_rng(spec.seed).permutation(n)
    shuffled = [corpus.examples[i] for i in order]
    n_train = int(spec.train * n)
    n_val = int(spec.validation * n)
    train = shuffled[:n_train]
    validation = shuffled[n_train : n_train + n_val]
    test = shuffled[n_train + n_val :]
    for frac, part, label in (
        (spec.train, train, "train"),
        (spec.validation, validation, "validation"),
        (spec.test, test, "test"),
    ):
        if frac > 0 and not part:
            raise ValueError(f"{label} partition is empty (fraction {frac} of {n} examples)")
    return train, validation, test


# ---------------------------------------------------------------------------
# random grid search
# ---------------------------------------------------------------------------


def grid_search(
    corpus: Corpus,
    split_spec: SplitSpec,
    space: Sequence[Hyperparameters],
    n_samples: int,
    seed: int = 0,
    b_new: int = DEFAULT_DELIVERY_SIZE,
    score_mode: str = "macro",
    window_capacity: int = DEFAULT_WINDOW_CAPACITY,
    jobs: int = 1,
) -> list[tuple[Hyperparameters, SimulationReport]]:
    """Sample n_samples distinct configurations, simulate each against the
    validation partition, and rank by average F1 descending with total CPU
    seconds ascending as the tie-break."""
    from .trainer import simulate_stream

    if not space:
        raise ValueError("empty hyperparameter search space")
    if n_samples > len(space):
        raise ValueError(f"n_samples {n_samples} exceeds search-space size {len(space)}")
    if corpus.examples and corpus.examples[0].matrix is None:
        raise ValueError("corpus must be vectorized before grid_search")
    picks = np.random.default_rng(seed).choice(len(space), size=n_samples, replace=False)
    train, validation, _ = split(corpus, split_spec)
    if not validation:
        raise ValueError("grid_search needs a non-empty validation partition")

    def run(idx: int) -> tuple[Hyperparameters, SimulationReport]:
        hp = space[idx]
        model = build(hp, window_capacity=window_capacity)
        report = simulate_stream(model, train, validation, b_new=b_new, score_mode=score_mode)
        return hp, report

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run, picks))
    else:
        results = [run(i) for i in picks]
    results.sort(key=lambda pair: (-pair[1].average.f1, pair[1].total_cpu_seconds))
    return results


# ---------------------------------------------------------------------------
# report emission
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def render_report_csv(report: SimulationReport) -> str:
    """Deterministic CSV: data rows then footer rows for the averages and the
    trendline; floats use shortest round-trip formatting so a parse recovers
    them exactly."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["iteration", "n_tweets", "precision", "recall", "f1", "cpu_seconds"])
    for i, (s, n, cpu) in enumerate(zip(report.per_iteration, report.n_tweets, report.cpu_seconds), 1):
        w.writerow([i, n, _fmt(s.precision), _fmt(s.recall), _fmt(s.f1), _fmt(cpu)])
    avg = report.average
    w.writerow(["average", "", _fmt(avg.precision), _fmt(avg.recall), _fmt(avg.f1),
                _fmt(report.total_cpu_seconds)])
    if report.trendline is not None:
        w.writerow(["trendline", "", _fmt(report.trendline.a), _fmt(report.trendline.b),
                    report.crossing_n if report.crossing_n is not None else "", ""])
    return buf.getvalue()


def render_report_markdown(report: SimulationReport) -> str:
    lines = [
        "| iteration | n_tweets | precision | recall | f1 | cpu_seconds |",
        "|---|---|---|---|---|---|",
    ]
    for i, (s, n, cpu) in enumerate(zip(report.per_iteration, report.n_tweets, report.cpu_seconds), 1):
        lines.append(f"| {i} | {n} | {s.precision:.4f} | {s.recall:.4f} | {s.f1:.4f} | {cpu:.4f} |")
    avg = report.average
    lines.append(
        f"| average | | {avg.precision:.4f} | {avg.recall:.4f} | {avg.f1:.4f} "
        f"| {report.total_cpu_seconds:.4f} |"
    )
    if report.trendline is not None:
        crossing = report.crossing_n if report.crossing_n is not None else "-"
        lines.append(
            f"\ntrendline: y = {report.trendline.a:.6f}*ln(x) + {report.trendline.b:.6f}, "
            f"crossing_n = {crossing} (score mode: {report.score_mode})"
        )
    return "\n".join(lines) + "\n"


def emit_report(report: SimulationReport, path: str, format: str = "csv") -> None:
    if format == "csv":
        content = render_report_csv(report)
    elif format == "markdown-table":
        content = render_report_markdown(report)
    else:
        raise ValueError(f"unknown report format {format!r}")
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(content)


def parse_report_csv(path: str) -> dict:
    """Read back an emitted CSV report (data rows, average, trendline)."""
    rows = []
    average = None
    trendline = None
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        for row in reader:
            if row[0] == "average":
                average = ScoreTriple(float(row[2]), float(row[3]), float(row[4]))
            elif row[0] == "trendline":
                trendline = {
                    "a": float(row[2]),
                    "b": float(row[3]),
                    "crossing_n": int(row[4]) if row[4] else None,
                }
            else:
                rows.append(
                    {
                        "iteration": int(row[0]),
                        "n_tweets": int(row[1]),
                        "precision": float(row[2]),
                        "recall": float(row[3]),
                        "f1": float(row[4]),
                        "cpu_seconds": float(row[5]),
                    }
                )
    return {"header": header, "rows": rows, "average": average, "trendline": trendline}
