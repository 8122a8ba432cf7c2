"""Command-line entry points: ingest, calibrate, query, eval, serve.

Exit codes: 1 configuration error, 2 data error, 3 backend unavailable.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from . import corpus as corpus_mod
from .embeddings import calibrate
from .evalharness import load_questions, render_report, run_suite
from .filters import FilterError
from .gateway import (
    AppConfig,
    ConfigError,
    build_embedding_backend,
    build_engine,
    create_app,
    embed_and_upsert,
    resolve_threshold,
)
from .store import VectorStore
from .transport import BackendUnavailable

EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_BACKEND = 3


def _translate_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigError as exc:
            click.echo(f"config error: {exc}", err=True)
            sys.exit(EXIT_CONFIG)
        except BackendUnavailable as exc:
            click.echo(f"backend unavailable: {exc}", err=True)
            sys.exit(EXIT_BACKEND)
        except (corpus_mod.CorpusError, FilterError, FileNotFoundError, ValueError) as exc:
            click.echo(f"data error: {exc}", err=True)
            sys.exit(EXIT_DATA)

    return wrapper


def _load_config(config_path: str | None, corpus: str | None = None,
                 snapshot: str | None = None, threshold: float | None = None) -> AppConfig:
    if config_path:
        config = AppConfig.load(config_path)
    else:
        if corpus is None:
            raise ConfigError("no --config given and no --corpus to fall back on")
        config = AppConfig(corpus_path=Path(corpus).resolve())
    if corpus:
        config.corpus_path = Path(corpus).resolve()
    if snapshot:
        config.snapshot_path = Path(snapshot).resolve()
    if threshold is not None:
        config.threshold = threshold
    return config


@click.group()
def main():
    """Natural-language retrieval over food-composition data."""


@main.command()
@click.option("--corpus", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@_translate_errors
def ingest(corpus, out_path, config_path):
    """Parse a corpus, embed every item, and write a store snapshot."""
    config = _load_config(config_path, corpus=corpus)
    items = corpus_mod.ingest(config.corpus_path)
    embedder = build_embedding_backend(config.embedding)
    store = VectorStore(default_limit=config.store_limit)
    embed_and_upsert(items, embedder, store)
    store.save_snapshot(out_path)
    click.echo(f"ingested {len(store)} items")


@main.command("calibrate")
@click.option("--snapshot", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--sample", "sample_pairs", type=int, default=None,
              help="Sampled pair count (forces sampling together with --exact-limit).")
@click.option("--seed", type=int, default=0)
@click.option("--exact-limit", type=int, default=None,
              help="Max store size for exact all-pairs calibration.")
@_translate_errors
def calibrate_cmd(snapshot, sample_pairs, seed, exact_limit):
    """Print distance-distribution stats (mu, sigma, thresholds) as JSON."""
    store = VectorStore.load_snapshot(snapshot)
    kwargs = {"sample_pairs": sample_pairs, "seed": seed}
    if exact_limit is not None:
        kwargs["exact_limit"] = exact_limit
    stats = calibrate(store.vectors(), **kwargs)
    click.echo(json.dumps(stats.to_dict(), ensure_ascii=False))


@main.command()
@click.option("--question", required=True)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--corpus", type=click.Path(exists=True, dir_okay=False))
@click.option("--snapshot", type=click.Path(dir_okay=False))
@click.option("--threshold", type=float, default=None)
@_translate_errors
def query(question, config_path, corpus, snapshot, threshold):
    """Run the retrieval cascade once and print the result as JSON."""
    config = _load_config(config_path, corpus=corpus, snapshot=snapshot, threshold=threshold)
    engine = build_engine(config)
    payload = engine.query(question)
    click.echo(json.dumps(payload, ensure_ascii=False, indent=2))


@main.command("eval")
@click.option("--questions", "questions_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--runs", type=int, default=5, show_default=True)
@click.option("--thresholds", default="calibrated", show_default=True,
              help="Comma-separated values, or 'calibrated' for mu-sigma,mu,mu+sigma.")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--corpus", type=click.Path(exists=True, dir_okay=False))
@click.option("--snapshot", type=click.Path(dir_okay=False))
@click.option("--out-dir", default=".", type=click.Path(file_okay=False))
@click.option("--model", default=None, help="Model label for the report rows.")
@click.option("--seed", type=int, default=0)
@_translate_errors
def eval_cmd(questions_path, runs, thresholds, config_path, corpus, snapshot,
             out_dir, model, seed):
    """Score the cascade against a question set; write report files."""
    config = _load_config(config_path, corpus=corpus, snapshot=snapshot)
    engine = build_engine(config)
    questions = load_questions(
        questions_path, list(engine.items_by_id.values()), engine.schema
    )

    if thresholds == "calibrated":
        if engine.stats is None:
            _, stats = resolve_threshold("calibrated:t2", engine.store, config.calibration)
        else:
            stats = engine.stats
        threshold_values = list(stats.thresholds())
    else:
        threshold_values = [float(part) for part in thresholds.split(",") if part]
    if not threshold_values:
        raise ConfigError("no thresholds to evaluate")

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    model_label = model or getattr(engine.retriever.llm, "model", None) or engine.retriever.llm.kind
    with open(out / "audit.jsonl", "w", encoding="utf-8") as audit:
        report = run_suite(
            questions,
            engine.store,
            engine.schema,
            engine.retriever.llm,
            engine.retriever.embedder,
            threshold_values,
            runs,
            seed=seed,
            model=model_label,
            prompts=engine.retriever.prompts,
            limit=config.store_limit,
            audit_sink=audit,
        )
    (out / "report.json").write_text(render_report(report, "json"), encoding="utf-8")
    (out / "report.csv").write_text(render_report(report, "csv"), encoding="utf-8")
    table = render_report(report, "table-text")
    (out / "report.txt").write_text(table, encoding="utf-8")
    click.echo(table, nl=False)
    click.echo(f"reports written to {out}/report.{{json,csv,txt}} and {out}/audit.jsonl")


@main.command()
@click.option("--bind", default=None, help="host:port (default from config)")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--corpus", type=click.Path(exists=True, dir_okay=False))
@click.option("--snapshot", type=click.Path(dir_okay=False))
@_translate_errors
def serve(bind, config_path, corpus, snapshot):
    """Start the HTTP gateway over a frozen store."""
    import uvicorn

    config = _load_config(config_path, corpus=corpus, snapshot=snapshot)
    if bind:
        config.bind = bind
    engine = build_engine(config)
    app = create_app(engine)
    host, _, port = config.bind.partition(":")
    click.echo(f"serving on http://{config.bind} (store size {len(engine.store)})")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000), log_level="warning")


if __name__ == "__main__":
    main()
