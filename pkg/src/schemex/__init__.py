"""Schema-driven information extraction.

One trainable encoder executes named-entity recognition, text classification
and hierarchical record extraction against a user-declared schema in a single
forward pass. See README.md for the CLI, HTTP service and schema JSON format.
"""
from .decode import (
    ExtractionResult,
    decode_classification,
    decode_entities,
    decode_structures,
    run_schema,
)
from .datagen import generate_synthetic, read_jsonl, vocab_corpus, write_jsonl
from .encoder import ModelConfig
from .evalbench import BenchReport, accuracy, evaluate_model, latency_bench, span_f1
from .model import ExtractionModel, init_params, load_model, model_file_hash, save_model
from .prompt import PromptPlan, compose_tasks
from .schema import (
    ClassificationSpec,
    EntitySpec,
    FieldKind,
    FieldSpec,
    LabelSpec,
    Schema,
    StructureSpec,
    json_to_schema,
    parse_field_dsl,
    render_field_dsl,
    schema_from_dict,
    schema_to_dict,
    schema_to_json,
    validate_schema,
)
from .tokenizer import Vocabulary, build_vocab, tokenize
from .training import Example, TrainConfig, backward, optimizer_step, total_loss, train

__all__ = [
    "BenchReport",
    "ClassificationSpec",
    "EntitySpec",
    "Example",
    "ExtractionModel",
    "ExtractionResult",
    "FieldKind",
    "FieldSpec",
    "LabelSpec",
    "ModelConfig",
    "PromptPlan",
    "Schema",
    "StructureSpec",
    "TrainConfig",
    "Vocabulary",
    "accuracy",
    "backward",
    "build_vocab",
    "compose_tasks",
    "decode_classification",
    "decode_entities",
    "decode_structures",
    "evaluate_model",
    "generate_synthetic",
    "init_params",
    "json_to_schema",
    "latency_bench",
    "load_model",
    "model_file_hash",
    "optimizer_step",
    "parse_field_dsl",
    "read_jsonl",
    "render_field_dsl",
    "run_schema",
    "save_model",
    "schema_from_dict",
    "schema_to_dict",
    "schema_to_json",
    "span_f1",
    "tokenize",
    "total_loss",
    "train",
    "validate_schema",
    "vocab_corpus",
    "write_jsonl",
]

__version__ = "0.1.0"
