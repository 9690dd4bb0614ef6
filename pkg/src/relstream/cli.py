"""Operator entry point: simulate, tune, serve, replay, eval-report.

Configuration precedence is flags > environment (RELSTREAM_*) > config file;
the config file is a flat key=value (or JSON object) document mirroring flag
names. Exit code 1 means a configuration error, 2 a data error; messages name
the offending file.
"""

from __future__ import annotations

import dataclasses
import json
import sys
from typing import Optional

import click

from . import metrics
from .embeddings import load_binary, load_text
from .errors import CorpusFormatError, EmbeddingFormatError, RelstreamError
from .models import Hyperparameters, build, defaults_for
from .simulation import (
    SplitSpec,
    emit_report,
    grid_search,
    load_crisislex,
    load_figure_eight,
    parse_report_csv,
    split,
)
from .trainer import simulate_stream
from .window import DEFAULT_DELIVERY_SIZE, DEFAULT_WINDOW_CAPACITY

EXIT_CONFIG = 1
EXIT_DATA = 2


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_config_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        _fail(EXIT_CONFIG, f"cannot read config file {path}: {exc}")
    stripped = text.lstrip()
    values: dict = {}
    if stripped.startswith("{"):
        values = json.loads(text)
    else:
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                _fail(EXIT_CONFIG, f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = line.split("=", 1)
            values[key.strip()] = value.strip()
    return {k.replace("-", "_"): v for k, v in values.items()}


def _load_table(path: str, fmt: str):
    try:
        return load_binary(path) if fmt == "binary" else load_text(path)
    except OSError as exc:
        _fail(EXIT_DATA, f"cannot read embedding file {path}: {exc}")
    except EmbeddingFormatError as exc:
        _fail(EXIT_DATA, f"bad embedding file {path}: {exc}")


def _load_corpus(path: str, fmt: str):
    try:
        if fmt == "figure-eight":
            return load_figure_eight(path)
        return load_crisislex(path)
    except OSError as exc:
        _fail(EXIT_DATA, f"cannot read dataset {path}: {exc}")
    except CorpusFormatError as exc:
        _fail(EXIT_DATA, str(exc))


def _parse_split(text: str, seed: int) -> SplitSpec:
    try:
        return SplitSpec.parse(text, seed=seed)
    except ValueError as exc:
        _fail(EXIT_CONFIG, f"bad --split {text!r}: {exc}")


def _hp_from_options(model: str, table_dim: int, seed: int, max_len: int, overrides: dict):
    cleaned = {k: v for k, v in overrides.items() if v is not None}
    try:
        return defaults_for(
            model.upper(), embedding_dim=table_dim, seed=seed, max_len=max_len, **cleaned
        )
    except ValueError as exc:
        _fail(EXIT_CONFIG, str(exc))


_DATASET_OPTIONS = [
    click.option("--dataset", required=True, type=str, help="corpus CSV path"),
    click.option(
        "--dataset-format",
        type=click.Choice(["figure-eight", "crisislex"]),
        default="figure-eight",
        show_default=True,
    ),
]
_EMBEDDING_OPTIONS = [
    click.option("--embedding", required=True, type=str, help="word2vec table path"),
    click.option(
        "--embedding-format",
        type=click.Choice(["binary", "text"]),
        default="binary",
        show_default=True,
    ),
]
_HP_OPTIONS = [
    click.option("--learning-rate", type=float, default=None),
    click.option("--batch-size", type=int, default=None),
    click.option("--epochs", type=int, default=None),
    click.option("--dropout", type=float, default=None),
    click.option("--recurrent-dropout", type=float, default=None),
    click.option("--filter-size", type=int, default=None),
    click.option("--kernel-size", type=int, default=None),
    click.option("--optimizer", type=click.Choice(["Adam", "Adagrad"]), default=None),
    click.option("--hidden-size", type=int, default=None),
]


def _apply(options):
    def deco(f):
        for opt in reversed(options):
            f = opt(f)
        return f

    return deco


@click.group(context_settings={"auto_envvar_prefix": "RELSTREAM"})
@click.option("--config", "config_path", type=str, default=None, help="flat key=value defaults file")
@click.pass_context
def main(ctx, config_path: Optional[str]):
    """Streaming short-text relevance classification toolkit."""
    if config_path:
        flat = _load_config_file(config_path)
        ctx.default_map = {
            sub: dict(flat) for sub in ("simulate", "tune", "serve", "replay", "eval-report")
        }


@main.command()
@_apply(_DATASET_OPTIONS)
@_apply(_EMBEDDING_OPTIONS)
@click.option("--model", type=click.Choice(["cnn", "lstm", "rnn"]), default="cnn", show_default=True)
@click.option("--split", "split_text", default="80/10/10", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--max-len", type=int, default=64, show_default=True)
@click.option("--window-capacity", type=int, default=DEFAULT_WINDOW_CAPACITY, show_default=True)
@click.option("--b-new", type=int, default=DEFAULT_DELIVERY_SIZE, show_default=True)
@click.option(
    "--score-mode",
    type=click.Choice(list(metrics.SCORE_MODES)),
    default="macro",
    show_default=True,
)
@click.option("--output", default="report.csv", show_default=True, help="report CSV path")
@_apply(_HP_OPTIONS)
def simulate(
    dataset,
    dataset_format,
    embedding,
    embedding_format,
    model,
    split_text,
    seed,
    max_len,
    window_capacity,
    b_new,
    score_mode,
    output,
    **hp_overrides,
):
    """Replay the iterative 10-at-a-time training protocol over a corpus."""
    table = _load_table(embedding, embedding_format)
    corpus = _load_corpus(dataset, dataset_format)
    spec = _parse_split(split_text, seed)
    hp = _hp_from_options(model, table.dim, seed, max_len, hp_overrides)
    corpus.vectorize(table, hp.max_len)
    try:
        train, _, test = split(corpus, spec)
        clf = build(hp, window_capacity=window_capacity)
        report = simulate_stream(clf, train, test, b_new=b_new, score_mode=score_mode)
    except (ValueError, RelstreamError) as exc:
        _fail(EXIT_CONFIG, str(exc))
    emit_report(report, output)
    avg = report.average
    click.echo(f"iterations: {report.iterations}")
    click.echo(f"average precision: {avg.precision:.4f}")
    click.echo(f"average recall: {avg.recall:.4f}")
    click.echo(f"average f1: {avg.f1:.4f}")
    click.echo(f"total cpu seconds: {report.total_cpu_seconds:.2f}")
    if report.trendline is not None:
        crossing = report.crossing_n if report.crossing_n is not None else "-"
        click.echo(
            f"trendline: y = {report.trendline.a:.4f}*ln(x) + {report.trendline.b:.4f}, "
            f"crossing_n = {crossing}"
        )
    click.echo(f"report: {output}")


def _load_space(path: str) -> list[Hyperparameters]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
    except OSError as exc:
        _fail(EXIT_DATA, f"cannot read search space {path}: {exc}")
    except json.JSONDecodeError as exc:
        _fail(EXIT_DATA, f"bad search space {path}: {exc}")
    if not isinstance(raw, list) or not raw:
        _fail(EXIT_CONFIG, f"search space {path} must be a non-empty JSON list")
    space = []
    for i, row in enumerate(raw):
        row = dict(row)
        model_type = row.pop("model", None) or row.pop("model_type", None)
        if model_type is None:
            _fail(EXIT_CONFIG, f"search space {path} entry {i} is missing 'model'")
        space.append((model_type.upper(), row))
    return space


HP_COLUMNS = [
    "model",
    "learning_rate",
    "batch_size",
    "epochs",
    "dropout",
    "recurrent_dropout",
    "filter_size",
    "kernel_size",
    "optimizer",
]


@main.command()
@_apply(_DATASET_OPTIONS)
@_apply(_EMBEDDING_OPTIONS)
@click.option("--space", "space_path", required=True, type=str, help="JSON list of configurations")
@click.option("--n-samples", type=int, default=None, help="default: the whole space")
@click.option("--split", "split_text", default="80/10/10", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--max-len", type=int, default=64, show_default=True)
@click.option("--window-capacity", type=int, default=DEFAULT_WINDOW_CAPACITY, show_default=True)
@click.option("--b-new", type=int, default=DEFAULT_DELIVERY_SIZE, show_default=True)
@click.option(
    "--score-mode",
    type=click.Choice(list(metrics.SCORE_MODES)),
    default="macro",
    show_default=True,
)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--output", default="ranking.csv", show_default=True)
def tune(
    dataset,
    dataset_format,
    embedding,
    embedding_format,
    space_path,
    n_samples,
    split_text,
    seed,
    max_len,
    window_capacity,
    b_new,
    score_mode,
    jobs,
    output,
):
    """Random grid search ranked by average F1, then CPU time."""
    table = _load_table(embedding, embedding_format)
    corpus = _load_corpus(dataset, dataset_format)
    spec = _parse_split(split_text, seed)
    rows = _load_space(space_path)
    space = [
        _hp_from_options(model_type, table.dim, seed, max_len, overrides)
        for model_type, overrides in rows
    ]
    corpus.vectorize(table, max_len)
    if n_samples is None:
        n_samples = len(space)
    try:
        results = grid_search(
            corpus,
            spec,
            space,
            n_samples=n_samples,
            seed=seed,
            b_new=b_new,
            score_mode=score_mode,
            window_capacity=window_capacity,
            jobs=jobs,
        )
    except (ValueError, RelstreamError) as exc:
        _fail(EXIT_CONFIG, str(exc))
    import csv as _csv

    with open(output, "w", encoding="utf-8", newline="") as f:
        w = _csv.writer(f, lineterminator="\n")
        w.writerow(
            ["rank"] + HP_COLUMNS + ["avg_precision", "avg_recall", "avg_f1", "cpu_seconds"]
        )
        for rank, (hp, report) in enumerate(results, 1):
            hp_dict = dataclasses.asdict(hp)
            hp_dict["model"] = hp_dict.pop("model_type")
            w.writerow(
                [rank]
                + [hp_dict[c] for c in HP_COLUMNS]
                + [
                    repr(report.average.precision),
                    repr(report.average.recall),
                    repr(report.average.f1),
                    repr(report.total_cpu_seconds),
                ]
            )
    best_hp, best_report = results[0]
    click.echo(f"evaluated {len(results)} configurations")
    click.echo(f"best: {best_hp.model_type} lr={best_hp.learning_rate} avg_f1={best_report.average.f1:.4f}")
    click.echo(f"ranking: {output}")


@main.command()
@_apply(_EMBEDDING_OPTIONS)
@click.option("--listen", default="127.0.0.1:8080", show_default=True)
@click.option("--data-dir", default="./models", show_default=True)
@click.option("--max-batch", type=int, default=1000, show_default=True)
@click.option("--max-len", type=int, default=64, show_default=True)
@click.option("--window-capacity", type=int, default=DEFAULT_WINDOW_CAPACITY, show_default=True)
@click.option("--trend-a", type=float, default=metrics.DEFAULT_TREND_A, show_default=True)
@click.option("--trend-b", type=float, default=metrics.DEFAULT_TREND_B, show_default=True)
@click.option(
    "--model-type", type=click.Choice(["CNN", "LSTM", "RNN"]), default="CNN", show_default=True
)
def serve(
    embedding,
    embedding_format,
    listen,
    data_dir,
    max_batch,
    max_len,
    window_capacity,
    trend_a,
    trend_b,
    model_type,
):
    """Serve /init/, /getLabels/, /updateLabels/, /healthz."""
    import uvicorn

    from .server import ServerConfig, create_app

    try:
        host, port_text = listen.rsplit(":", 1)
        port = int(port_text)
    except ValueError:
        _fail(EXIT_CONFIG, f"bad --listen {listen!r}; expected host:port")
    table = _load_table(embedding, embedding_format)
    app = create_app(
        ServerConfig(
            table=table,
            data_dir=data_dir,
            max_batch=max_batch,
            trend_a=trend_a,
            trend_b=trend_b,
            max_len=max_len,
            window_capacity=window_capacity,
            default_model_type=model_type,
        )
    )
    uvicorn.run(app, host=host, port=port, log_level="info")


@main.command()
@_apply(_DATASET_OPTIONS)
@click.option("--rate", type=float, default=10.0, show_default=True, help="items per second")
@click.option("--target", required=True, help="sink URL receiving one JSON POST per item")
def replay(dataset, dataset_format, rate, target):
    """Feed a corpus as a simulated live stream; exits when exhausted."""
    from .server import ReplayStream

    corpus = _load_corpus(dataset, dataset_format)
    if rate <= 0:
        _fail(EXIT_CONFIG, f"--rate must be positive, got {rate}")
    stream = ReplayStream(corpus, rate=rate, sink=target).start()
    stream.join()
    if stream.error is not None:
        _fail(EXIT_DATA, f"replay aborted after {stream.emitted} items: {stream.error}")
    click.echo(f"replayed {stream.emitted} items to {target}")


@main.command(name="eval-report")
@click.option("--input", "input_path", required=True, type=str)
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["summary", "markdown"]),
    default="summary",
    show_default=True,
)
def eval_report(input_path, fmt):
    """Summarize or re-render an emitted report CSV."""
    try:
        parsed = parse_report_csv(input_path)
    except OSError as exc:
        _fail(EXIT_DATA, f"cannot read report {input_path}: {exc}")
    except (ValueError, IndexError) as exc:
        _fail(EXIT_DATA, f"bad report file {input_path}: {exc}")
    rows, avg, trend = parsed["rows"], parsed["average"], parsed["trendline"]
    if fmt == "markdown":
        click.echo("| iteration | n_tweets | precision | recall | f1 | cpu_seconds |")
        click.echo("|---|---|---|---|---|---|")
        for r in rows:
            click.echo(
                f"| {r['iteration']} | {r['n_tweets']} | {r['precision']:.4f} "
                f"| {r['recall']:.4f} | {r['f1']:.4f} | {r['cpu_seconds']:.4f} |"
            )
        if avg:
            click.echo(f"| average | | {avg.precision:.4f} | {avg.recall:.4f} | {avg.f1:.4f} | |")
        return
    click.echo(f"iterations: {len(rows)}")
    if avg:
        click.echo(f"average precision/recall/f1: {avg.precision:.4f} / {avg.recall:.4f} / {avg.f1:.4f}")
    if trend:
        click.echo(
            f"trendline: y = {trend['a']:.4f}*ln(x) + {trend['b']:.4f}, crossing_n = {trend['crossing_n']}"
        )


if __name__ == "__main__":
    main()
