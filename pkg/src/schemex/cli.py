"""Command-line interface.

Exit codes: 0 success, 2 usage error, 3 file error, 4 schema error,
5 context overflow. Failures print one ``error:<Type>:<message>`` line to
stderr. Results (extraction JSON, metrics, bench report) go to stdout;
progress logging goes to stderr.
"""
from __future__ import annotations

import functools
import json
import logging
import os
import sys
from pathlib import Path

import click

from .datagen import generate_synthetic, read_jsonl, vocab_corpus, write_jsonl
from .decode import run_schema
from .encoder import ModelConfig
from .errors import (
    ContextOverflow,
    DslError,
    ModelFileError,
    ParseError,
    SchemaInvalid,
    SequenceTooLong,
)
from .evalbench import evaluate_model, latency_bench
from .model import init_params, load_model, model_file_hash, save_model
from .prompt import compose_tasks, plan_to_dict
from .schema import json_to_schema
from .tokenizer import build_vocab
from .training import TrainConfig, train

EXIT_FILE = 3
EXIT_SCHEMA = 4
EXIT_OVERFLOW = 5


def _fail(exc: Exception, code: int) -> None:
    message = str(exc).replace("\n", " ")
    click.echo(f"error:{type(exc).__name__}:{message}", err=True)
    sys.exit(code)


def handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ContextOverflow, SequenceTooLong) as exc:
            _fail(exc, EXIT_OVERFLOW)
        except (ParseError, SchemaInvalid, DslError) as exc:
            _fail(exc, EXIT_SCHEMA)
        except (ModelFileError, OSError) as exc:
            _fail(exc, EXIT_FILE)

    return wrapper


@click.group()
def main() -> None:
    """Schema-driven extraction: train, extract, evaluate, benchmark, serve."""
    logging.basicConfig(level=logging.INFO, stream=sys.stderr, format="%(levelname)s %(message)s")


@main.command("train")
@click.option("--data", "data_path", required=True, type=click.Path(), help="Training JSONL.")
@click.option("--out", "out_path", required=True, type=click.Path(), help="Model file to write.")
@click.option("--epochs", default=10, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--lr-backbone", default=1e-3, show_default=True)
@click.option("--lr-heads", default=2e-3, show_default=True)
@click.option("--batch-size", default=4, show_default=True)
@click.option("--warmup-steps", default=50, show_default=True)
@click.option("--hidden-dim", default=64, show_default=True)
@click.option("--layers", default=2, show_default=True)
@click.option("--max-vocab", default=2000, show_default=True)
@handle_errors
def train_cmd(
    data_path: str,
    out_path: str,
    epochs: int,
    seed: int,
    lr_backbone: float,
    lr_heads: float,
    batch_size: int,
    warmup_steps: int,
    hidden_dim: int,
    layers: int,
    max_vocab: int,
) -> None:
    """Train a model on a JSONL corpus and save it."""
    corpus = read_jsonl(data_path)
    vocab = build_vocab(vocab_corpus(corpus), max_size=max_vocab)
    cfg = ModelConfig(vocab_size=vocab.size, hidden_dim=hidden_dim, layers=layers, seed=seed)
    model = init_params(cfg, vocab)
    train_cfg = TrainConfig(
        epochs=epochs,
        seed=seed,
        lr_backbone=lr_backbone,
        lr_heads=lr_heads,
        batch_size=batch_size,
        warmup_steps=warmup_steps,
    )
    model, trace = train(model, corpus, train_cfg)
    save_model(model, out_path)
    click.echo(
        json.dumps(
            {
                "model": out_path,
                "examples": len(corpus),
                "epochs": epochs,
                "loss_trace": trace,
                "final_loss": trace[-1],
            }
        )
    )


def _load_schema_arg(schema_arg: str):
    text = schema_arg
    if not schema_arg.lstrip().startswith("{"):
        text = Path(schema_arg).read_text(encoding="utf-8")
    return json_to_schema(text)


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path())
@click.option("--schema", "schema_arg", required=True, help="Schema JSON string or file path.")
@click.option("--text", required=True, help="Input text, or '-' to read stdin.")
@click.option("--threshold", default=0.5, show_default=True)
@click.option("--max-len", default=None, type=int)
@click.option("--dump-plan", is_flag=True, help="Print the compiled prompt plan instead of extracting.")
@handle_errors
def extract(
    model_path: str,
    schema_arg: str,
    text: str,
    threshold: float,
    max_len: int | None,
    dump_plan: bool,
) -> None:
    """Run a schema against a text and print the extraction result JSON."""
    model = load_model(model_path)
    schema = _load_schema_arg(schema_arg)
    if text == "-":
        text = sys.stdin.read()
    if dump_plan:
        plan = compose_tasks(schema, text, model.vocab, max_len or model.cfg.max_positions)
        click.echo(json.dumps(plan_to_dict(plan, model.vocab)))
        return
    result = run_schema(model, schema, text, threshold=threshold, max_len=max_len)
    click.echo(json.dumps(result.to_dict(), ensure_ascii=False))


@main.command("eval")
@click.option("--model", "model_path", required=True, type=click.Path())
@click.option("--data", "data_path", required=True, type=click.Path())
@handle_errors
def eval_cmd(model_path: str, data_path: str) -> None:
    """Report span F1 and classification accuracy over a JSONL corpus."""
    model = load_model(model_path)
    corpus = read_jsonl(data_path)
    click.echo(json.dumps(evaluate_model(model, corpus)))


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path())
@click.option("--labels", default="5,10,20,50", show_default=True, help="Comma-separated label counts.")
@click.option("--repeats", default=10, show_default=True)
@handle_errors
def bench(model_path: str, labels: str, repeats: int) -> None:
    """Measure composed vs per-label latency; JSON to stdout, table to stderr."""
    model = load_model(model_path)
    try:
        label_counts = [int(x) for x in labels.split(",") if x.strip()]
    except ValueError as exc:
        raise click.UsageError(f"bad --labels value: {exc}")
    report = latency_bench(model, label_counts, repeats=repeats)
    click.echo(report.format_table(), err=True)
    click.echo(json.dumps(report.to_dict()))


@main.command("gen-data")
@click.option("--seed", default=1, show_default=True)
@click.option("--count", default=200, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@handle_errors
def gen_data(seed: int, count: int, out_path: str) -> None:
    """Write a deterministic synthetic training corpus as JSONL."""
    write_jsonl(generate_synthetic(seed, count), out_path)
    click.echo(json.dumps({"out": out_path, "count": count, "seed": seed}))


@main.command()
@click.option(
    "--model",
    "model_path",
    envvar="SCHEMEX_MODEL",
    required=True,
    type=click.Path(),
    help="Model file (env SCHEMEX_MODEL).",
)
@click.option("--port", envvar="SCHEMEX_PORT", default=8000, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option(
    "--ui",
    "ui_dir",
    default=None,
    type=click.Path(exists=True, file_okay=False),
    help="Also serve the playground static files from this directory.",
)
@handle_errors
def serve(model_path: str, port: int, host: str, ui_dir: str | None) -> None:
    """Serve POST /extract and GET /health over HTTP."""
    import uvicorn

    from .service import create_app

    model = load_model(model_path)
    app = create_app(model, model_id=model_file_hash(model_path), ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
