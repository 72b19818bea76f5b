"""Field DSL grammar, schema validation and JSON round trips."""
from __future__ import annotations

import json
import random
import string

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schemex.errors import (
    DslError,
    EmptyName,
    InvalidName,
    MalformedChoices,
    ParseError,
    SchemaInvalid,
    UnknownTypeToken,
)
from schemex.schema import (
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


class TestParseFieldDsl:
    def test_name_type_description(self):
        f = parse_field_dsl("name::str::product name")
        assert f == FieldSpec(name="name", kind=FieldKind.STR, description="product name")

    def test_choice_then_type(self):
        f = parse_field_dsl("category::[electronics|software|hardware]::str")
        assert f.name == "category"
        assert f.kind is FieldKind.STR
        assert f.choices == ("electronics", "software", "hardware")
        assert f.description is None

    def test_type_then_choice(self):
        f = parse_field_dsl("category::str::[a|b]")
        assert f.choices == ("a", "b")
        assert f.description is None

    def test_bare_name_defaults(self):
        f = parse_field_dsl("tags")
        assert f == FieldSpec(name="tags", kind=FieldKind.STR, description=None, choices=None)

    def test_list_kind(self):
        assert parse_field_dsl("tags::list").kind is FieldKind.LIST

    def test_single_option_choices_rejected(self):
        with pytest.raises(MalformedChoices):
            parse_field_dsl("price::[x]::str")

    def test_empty_option_rejected(self):
        with pytest.raises(MalformedChoices):
            parse_field_dsl("price::[a|]::str")

    def test_duplicate_options_rejected(self):
        with pytest.raises(MalformedChoices):
            parse_field_dsl("price::[a|a]::str")

    def test_empty_name(self):
        with pytest.raises(EmptyName):
            parse_field_dsl("::str")

    def test_reserved_char_in_name(self):
        with pytest.raises(InvalidName):
            parse_field_dsl("pri(ce::str")

    def test_unknown_token_before_type(self):
        with pytest.raises(UnknownTypeToken):
            parse_field_dsl("name::foo::str")

    def test_description_may_contain_separator_when_trailing(self):
        f = parse_field_dsl("a::str::great::stuff")
        assert f.description == "great::stuff"

    def test_second_type_token_becomes_description(self):
        f = parse_field_dsl("a::str::list")
        assert f.kind is FieldKind.STR
        assert f.description == "list"

    def test_description_without_type(self):
        f = parse_field_dsl("amount::total cost in dollars")
        assert f.kind is FieldKind.STR
        assert f.description == "total cost in dollars"


class TestDslProperties:
    def test_fuzz_never_crashes_and_fixpoint(self):
        # Seeded analogue of the acceptance fuzz at a smaller size.
        rng = random.Random(0)
        alphabet = string.ascii_letters + ":[]|()sltr., "
        for _ in range(2000):
            raw = "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 30)))
            try:
                f = parse_field_dsl(raw)
            except DslError:
                continue
            again = parse_field_dsl(render_field_dsl(f))
            assert again == f

    @given(st.text(max_size=40))
    @settings(max_examples=300, deadline=None)
    def test_hypothesis_fuzz(self, raw):
        try:
            f = parse_field_dsl(raw)
        except DslError:
            return
        assert f.name
        assert not set("()[]|").intersection(f.name)
        if f.choices is not None:
            assert len(f.choices) >= 2
            assert all(f.choices)
        assert parse_field_dsl(render_field_dsl(f)) == f


def product_schema(fields=("name", "price")):
    return Schema(
        structure_tasks=(StructureSpec("product", tuple(parse_field_dsl(f) for f in fields)),)
    )


class TestValidateSchema:
    def test_valid_product_schema(self):
        assert validate_schema(product_schema()) == []

    def test_empty_schema(self):
        violations = validate_schema(Schema())
        assert len(violations) == 1
        assert violations[0].path == ""

    def test_duplicate_task_names(self):
        cls = ClassificationSpec("sentiment", (LabelSpec("a"), LabelSpec("b")))
        schema = Schema(classification_tasks=(cls, cls))
        assert any("duplicate task" in v.message for v in validate_schema(schema))

    def test_duplicate_entity_labels(self):
        schema = Schema(entity_task=(EntitySpec("person"), EntitySpec("person")))
        assert any("duplicate entity label" in v.message for v in validate_schema(schema))

    def test_single_label_classification_invalid(self):
        schema = Schema(classification_tasks=(ClassificationSpec("t", (LabelSpec("only"),)),))
        assert any("two labels" in v.message for v in validate_schema(schema))

    def test_threshold_range(self):
        schema = Schema(
            classification_tasks=(
                ClassificationSpec("t", (LabelSpec("a"), LabelSpec("b")), threshold=1.5),
            )
        )
        assert any("threshold" in v.message for v in validate_schema(schema))

    def test_structure_needs_fields(self):
        schema = Schema(structure_tasks=(StructureSpec("empty", ()),))
        violations = validate_schema(schema)
        assert any(v.path == "structures[0]" for v in violations)

    def test_duplicate_field_names(self):
        schema = product_schema(("name", "name"))
        assert any("duplicate field" in v.message for v in validate_schema(schema))

    def test_violation_paths_are_indexed(self):
        schema = Schema(
            structure_tasks=(
                StructureSpec("product", (FieldSpec("ok"), FieldSpec("ok2"), FieldSpec(""))),
            )
        )
        assert any(v.path == "structures[0].fields[2]" for v in validate_schema(schema))


class TestSchemaJson:
    def test_round_trip_entities(self):
        schema = Schema(entity_task=(EntitySpec("person"), EntitySpec("location", "a place")))
        assert json_to_schema(schema_to_json(schema)) == schema

    def test_round_trip_full_composition(self):
        schema = Schema(
            entity_task=(EntitySpec("person", "full names"),),
            classification_tasks=(
                ClassificationSpec("sentiment", (LabelSpec("pos"), LabelSpec("neg")), False, 0.5),
                ClassificationSpec(
                    "topics", (LabelSpec("tech", "gadgets"), LabelSpec("sports")), True, 0.4
                ),
            ),
            structure_tasks=(product_schema().structure_tasks[0],),
        )
        assert json_to_schema(schema_to_json(schema)) == schema

    def test_missing_version(self):
        with pytest.raises(ParseError):
            schema_from_dict({"entities": {"person": None}})

    def test_bad_json_has_position(self):
        with pytest.raises(ParseError) as err:
            json_to_schema('{"version": 1,')
        assert err.value.line == 1
        assert err.value.column is not None

    def test_unknown_key_rejected(self):
        with pytest.raises(ParseError):
            schema_from_dict({"version": 1, "entitys": {}})

    def test_field_constraints_from_document(self):
        doc = {
            "version": 1,
            "structures": [
                {
                    "name": "product",
                    "fields": [
                        "name::str::product name",
                        "price::str",
                        "category::[electronics|software|hardware]::str",
                    ],
                }
            ],
        }
        schema = schema_from_dict(doc)
        fields = schema.structure_tasks[0].fields
        assert len(fields) == 3
        assert fields[2].choices == ("electronics", "software", "hardware")

    def test_invalid_schema_reraised_with_violations(self):
        doc = {
            "version": 1,
            "classifications": [
                {"task": "sentiment", "labels": {"a": None, "b": None}, "multi_label": False},
                {"task": "sentiment", "labels": {"x": None, "y": None}, "multi_label": False},
            ],
        }
        with pytest.raises(SchemaInvalid) as err:
            schema_from_dict(doc)
        assert err.value.violations

    def test_multi_label_required(self):
        doc = {"version": 1, "classifications": [{"task": "t", "labels": {"a": None, "b": None}}]}
        with pytest.raises(ParseError):
            schema_from_dict(doc)

    def test_dict_form_is_json_stable(self):
        schema = product_schema()
        doc = schema_to_dict(schema)
        assert json.loads(json.dumps(doc)) == doc
