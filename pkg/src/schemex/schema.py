"""Schema object model, field DSL parser and JSON (de)serialization.

A schema bundles up to three kinds of extraction tasks that run together in
one encoder pass:

* an entity task (a list of entity types, optionally described),
* any number of classification tasks (single- or multi-label),
* any number of structure tasks (a parent record with named fields).

Fields of a structure are written in a compact DSL::

    field_name::type::description          e.g.  "price::str::amount paid"
    field_name::[opt1|opt2|...]::type      e.g.  "category::[electronics|software]::str"

``type`` is ``str`` (one value per instance) or ``list`` (many). The type and
choice segments may appear in either order; everything after the last
recognized segment is the description, verbatim (so descriptions may contain
``::`` only in final position). All objects here are immutable and safe to
share across threads.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Iterable

from .errors import (
    DslError,
    EmptyName,
    InvalidName,
    MalformedChoices,
    ParseError,
    SchemaInvalid,
    UnknownTypeToken,
)

# Characters that may not appear in a field name (``::`` is excluded by the
# segment split itself).
_NAME_FORBIDDEN = set("()[]|")

#: Task name under which the entity task appears in prompts and results.
ENTITY_TASK_NAME = "entities"

#: Version of the schema JSON document format.
SCHEMA_JSON_VERSION = 1


class FieldKind(Enum):
    STR = "str"
    LIST = "list"


@dataclass(frozen=True)
class FieldSpec:
    """One field of a structure task."""

    name: str
    kind: FieldKind = FieldKind.STR
    description: str | None = None
    choices: tuple[str, ...] | None = None


@dataclass(frozen=True)
class EntitySpec:
    """One entity type of the entity task."""

    label: str
    description: str | None = None


@dataclass(frozen=True)
class LabelSpec:
    """One class label of a classification task."""

    label: str
    description: str | None = None


@dataclass(frozen=True)
class ClassificationSpec:
    task_name: str
    labels: tuple[LabelSpec, ...]
    multi_label: bool = False
    threshold: float = 0.5


@dataclass(frozen=True)
class StructureSpec:
    parent_name: str
    fields: tuple[FieldSpec, ...]


@dataclass(frozen=True)
class Schema:
    """A declarative bundle of extraction tasks.

    ``entity_task`` is the ordered list of entity types or ``None`` when the
    schema has no entity task; it is always addressed by the fixed task name
    ``"entities"``.
    """

    entity_task: tuple[EntitySpec, ...] | None = None
    classification_tasks: tuple[ClassificationSpec, ...] = ()
    structure_tasks: tuple[StructureSpec, ...] = ()

    def task_names(self) -> list[str]:
        names: list[str] = []
        if self.entity_task is not None:
            names.append(ENTITY_TASK_NAME)
        names.extend(c.task_name for c in self.classification_tasks)
        names.extend(s.parent_name for s in self.structure_tasks)
        return names


@dataclass(frozen=True)
class Violation:
    """One invariant violation found by validate_schema."""

    path: str
    message: str


def parse_field_dsl(spec: str) -> FieldSpec:
    """Parse a field DSL string into a FieldSpec.

    Raises EmptyName, InvalidName, UnknownTypeToken or MalformedChoices; never
    returns a FieldSpec that violates its invariants.
    """
    segments = spec.split("::")
    name = segments[0].strip()
    if not name:
        raise EmptyName(f"field spec {spec!r} has no name")
    bad = _NAME_FORBIDDEN.intersection(name)
    if bad:
        raise InvalidName(f"field name {name!r} contains reserved character {sorted(bad)[0]!r}")
    if name.endswith(":"):
        # "name:" + "::" would re-split ambiguously against the segment separator
        raise InvalidName(f"field name {name!r} may not end with ':'")

    kind: FieldKind | None = None
    choices: tuple[str, ...] | None = None
    description: str | None = None

    i = 1
    while i < len(segments):
        seg = segments[i].strip()
        if _is_choice_segment(seg) and choices is None:
            choices = _parse_choices(seg)
        elif seg in ("str", "list") and kind is None:
            kind = FieldKind(seg)
        else:
            # Not (or no longer) a recognizable slot. If a later segment would
            # still fill an open slot, this one sits in a position the grammar
            # has no meaning for.
            for later in segments[i + 1:]:
                later = later.strip()
                if (_is_choice_segment(later) and choices is None) or (
                    later in ("str", "list") and kind is None
                ):
                    raise UnknownTypeToken(
                        f"segment {seg!r} in {spec!r} is neither a type, a choice list "
                        f"nor a trailing description"
                    )
            description = "::".join(segments[i:]).strip() or None
            break
        i += 1

    return FieldSpec(
        name=name,
        kind=kind or FieldKind.STR,
        description=description,
        choices=choices,
    )


def render_field_dsl(f: FieldSpec) -> str:
    """Render a FieldSpec to its canonical DSL string (parse fixpoint)."""
    parts = [f.name]
    if f.choices is not None:
        parts.append("[" + "|".join(f.choices) + "]")
    parts.append(f.kind.value)
    if f.description is not None:
        parts.append(f.description)
    return "::".join(parts)


def _is_choice_segment(seg: str) -> bool:
    return len(seg) >= 2 and seg.startswith("[") and seg.endswith("]")


def _parse_choices(seg: str) -> tuple[str, ...]:
    options = tuple(opt.strip() for opt in seg[1:-1].split("|"))
    if len(options) < 2:
        raise MalformedChoices(f"choice list {seg!r} needs at least two options")
    if any(not opt for opt in options):
        raise MalformedChoices(f"choice list {seg!r} contains an empty option")
    if len(set(options)) != len(options):
        raise MalformedChoices(f"choice list {seg!r} contains duplicate options")
    return options


# --- validation ---

def validate_schema(s: Schema) -> list[Violation]:
    """Collect every invariant violation in the schema; empty means valid."""
    out: list[Violation] = []

    if s.entity_task is None and not s.classification_tasks and not s.structure_tasks:
        out.append(Violation("", "schema declares no task"))

    names = s.task_names()
    seen: set[str] = set()
    for name in names:
        if name in seen:
            out.append(Violation("", f"duplicate task name {name!r}"))
        seen.add(name)

    if s.entity_task is not None:
        if not s.entity_task:
            out.append(Violation("entities", "entity task declares no entity types"))
        labels_seen: set[str] = set()
        for i, e in enumerate(s.entity_task):
            if not e.label.strip():
                out.append(Violation(f"entities[{i}]", "entity label is empty"))
            if e.label in labels_seen:
                out.append(Violation(f"entities[{i}]", f"duplicate entity label {e.label!r}"))
            labels_seen.add(e.label)

    for ci, c in enumerate(s.classification_tasks):
        path = f"classifications[{ci}]"
        if not c.task_name.strip():
            out.append(Violation(path, "task name is empty"))
        if len(c.labels) < 2:
            out.append(Violation(path, "classification task needs at least two labels"))
        if not 0.0 <= c.threshold <= 1.0:
            out.append(Violation(path, f"threshold {c.threshold} outside [0, 1]"))
        label_seen: set[str] = set()
        for li, lab in enumerate(c.labels):
            if not lab.label.strip():
                out.append(Violation(f"{path}.labels[{li}]", "label is empty"))
            if lab.label in label_seen:
                out.append(Violation(f"{path}.labels[{li}]", f"duplicate label {lab.label!r}"))
            label_seen.add(lab.label)

    for si, st in enumerate(s.structure_tasks):
        path = f"structures[{si}]"
        if not st.parent_name.strip():
            out.append(Violation(path, "structure name is empty"))
        if not st.fields:
            out.append(Violation(path, "structure declares no fields"))
        field_seen: set[str] = set()
        for fi, f in enumerate(st.fields):
            fpath = f"{path}.fields[{fi}]"
            out.extend(Violation(fpath, m) for m in _field_violations(f))
            if f.name in field_seen:
                out.append(Violation(fpath, f"duplicate field name {f.name!r}"))
            field_seen.add(f.name)

    return out


def _field_violations(f: FieldSpec) -> list[str]:
    msgs = []
    if not f.name:
        msgs.append("field name is empty")
    elif _NAME_FORBIDDEN.intersection(f.name) or "::" in f.name:
        msgs.append(f"field name {f.name!r} contains a reserved character")
    if f.choices is not None:
        if len(f.choices) < 2:
            msgs.append("choice list needs at least two options")
        if any(not c for c in f.choices):
            msgs.append("choice list contains an empty option")
        if len(set(f.choices)) != len(f.choices):
            msgs.append("choice list contains duplicate options")
    if not msgs:
        # The JSON document stores fields as DSL strings, so every valid field
        # must survive a render/parse round trip exactly.
        try:
            if parse_field_dsl(render_field_dsl(f)) != f:
                msgs.append("field does not round-trip through its DSL form")
        except DslError as exc:
            msgs.append(f"field cannot be rendered to DSL: {exc}")
    return msgs


# --- JSON document form ---

def schema_to_dict(s: Schema) -> dict[str, Any]:
    """Schema as a plain dict matching the JSON document grammar."""
    doc: dict[str, Any] = {"version": SCHEMA_JSON_VERSION}
    if s.entity_task is not None:
        doc["entities"] = {e.label: e.description for e in s.entity_task}
    if s.classification_tasks:
        doc["classifications"] = [
            {
                "task": c.task_name,
                "labels": {lab.label: lab.description for lab in c.labels},
                "multi_label": c.multi_label,
                "threshold": c.threshold,
            }
            for c in s.classification_tasks
        ]
    if s.structure_tasks:
        doc["structures"] = [
            {"name": st.parent_name, "fields": [render_field_dsl(f) for f in st.fields]}
            for st in s.structure_tasks
        ]
    return doc


def schema_to_json(s: Schema) -> str:
    return json.dumps(schema_to_dict(s), ensure_ascii=False, indent=2)


def schema_from_dict(doc: Any) -> Schema:
    """Build and validate a Schema from a parsed JSON document.

    Raises ParseError for structural problems and SchemaInvalid when the
    document parses but violates schema invariants.
    """
    if not isinstance(doc, dict):
        raise ParseError("schema document must be a JSON object")
    unknown = set(doc) - {"version", "entities", "classifications", "structures"}
    if unknown:
        raise ParseError(f"unknown schema key {sorted(unknown)[0]!r}")
    if "version" not in doc:
        raise ParseError("schema document is missing the required 'version' key")
    if doc["version"] != SCHEMA_JSON_VERSION:
        raise ParseError(f"unsupported schema version {doc['version']!r}")

    entity_task = None
    if "entities" in doc:
        ents = doc["entities"]
        if not isinstance(ents, dict):
            raise ParseError("'entities' must map labels to descriptions or null")
        entity_task = tuple(
            EntitySpec(label=str(k), description=_opt_str(v, f"entities[{k!r}]"))
            for k, v in ents.items()
        )

    classifications = []
    for i, item in enumerate(_opt_list(doc, "classifications")):
        if not isinstance(item, dict):
            raise ParseError(f"classifications[{i}] must be an object")
        missing = {"task", "labels", "multi_label"} - set(item)
        if missing:
            raise ParseError(f"classifications[{i}] is missing key {sorted(missing)[0]!r}")
        labels = item["labels"]
        if not isinstance(labels, dict):
            raise ParseError(f"classifications[{i}].labels must map labels to descriptions")
        if not isinstance(item["multi_label"], bool):
            raise ParseError(f"classifications[{i}].multi_label must be a boolean")
        threshold = item.get("threshold", 0.5)
        if not isinstance(threshold, (int, float)) or isinstance(threshold, bool):
            raise ParseError(f"classifications[{i}].threshold must be a number")
        classifications.append(
            ClassificationSpec(
                task_name=str(item["task"]),
                labels=tuple(
                    LabelSpec(label=str(k), description=_opt_str(v, f"classifications[{i}]"))
                    for k, v in labels.items()
                ),
                multi_label=item["multi_label"],
                threshold=float(threshold),
            )
        )

    structures = []
    for i, item in enumerate(_opt_list(doc, "structures")):
        if not isinstance(item, dict):
            raise ParseError(f"structures[{i}] must be an object")
        missing = {"name", "fields"} - set(item)
        if missing:
            raise ParseError(f"structures[{i}] is missing key {sorted(missing)[0]!r}")
        raw_fields = item["fields"]
        if not isinstance(raw_fields, list) or not all(isinstance(f, str) for f in raw_fields):
            raise ParseError(f"structures[{i}].fields must be a list of field DSL strings")
        try:
            fields = tuple(parse_field_dsl(f) for f in raw_fields)
        except (EmptyName, InvalidName, UnknownTypeToken, MalformedChoices) as exc:
            raise ParseError(f"structures[{i}]: {exc}") from exc
        structures.append(StructureSpec(parent_name=str(item["name"]), fields=fields))

    schema = Schema(
        entity_task=entity_task,
        classification_tasks=tuple(classifications),
        structure_tasks=tuple(structures),
    )
    violations = validate_schema(schema)
    if violations:
        raise SchemaInvalid(violations)
    return schema


def json_to_schema(doc: str) -> Schema:
    """Parse a schema JSON string; syntax errors carry line/column."""
    try:
        parsed = json.loads(doc)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, column=exc.colno) from exc
    return schema_from_dict(parsed)


def _opt_str(v: Any, where: str) -> str | None:
    if v is None:
        return None
    if not isinstance(v, str):
        raise ParseError(f"{where}: description must be a string or null")
    return v


def _opt_list(doc: dict, key: str) -> list:
    v = doc.get(key, [])
    if not isinstance(v, list):
        raise ParseError(f"'{key}' must be a list")
    return v
