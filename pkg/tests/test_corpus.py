"""Corpus ingestion, unit standardization, and sentence serialization."""

from __future__ import annotations

import io
import json

import pytest

from foodrag.corpus import (
    CorpusError,
    DuplicateIdError,
    FoodItem,
    NegativeValueError,
    UnknownUnitError,
    ingest,
    sentence_component_order,
    serialize,
    write_corpus,
)
from foodrag.filters import Cmp, FieldKind, Op, evaluate


def make_record(record_id="x-1", **overrides):
    record = {
        "id": record_id,
        "name": "Test item",
        "food_group": "Cheeses",
        "kind": "generic",
        "components": {
            "energy": {"value": 100.0, "unit": "kcal"},
            "protein, total": {"value": 10.0, "unit": "g"},
        },
    }
    record.update(overrides)
    return record


def ingest_records(*records):
    lines = io.StringIO("\n".join(json.dumps(r) for r in records))
    return ingest(lines)


class TestIngest:
    def test_milligrams_convert_to_grams(self):
        record = make_record(components={"potassium": {"value": 500, "unit": "mg"}})
        (item,) = ingest_records(record)
        assert item.components["potassium"] == pytest.approx(0.5)
        assert item.units["potassium"] == "g"

    @pytest.mark.parametrize("unit", ["µg", "μg", "ug"])
    def test_micrograms_convert_to_grams(self, unit):
        record = make_record(components={"vitamin b-12": {"value": 2.0, "unit": unit}})
        (item,) = ingest_records(record)
        assert item.components["vitamin b-12"] == pytest.approx(2e-6)

    def test_kcal_kept_as_kcal(self):
        (item,) = ingest_records(make_record())
        assert item.units["energy"] == "kcal"
        assert item.components["energy"] == 100.0

    def test_provolon_from_fixture(self, fixture_items):
        provolon = next(i for i in fixture_items if i.name == "Cheese Provolon")
        assert provolon.food_group == "Cheeses"
        assert provolon.components["energy"] == 365.30
        assert provolon.components["protein, total"] == 26.30
        assert provolon.components["carbohydrates, total"] == 0.00
        assert provolon.components["fibre, total dietary"] == 0.00
        assert provolon.components["salt"] == 2.19

    def test_negative_value_rejected(self):
        record = make_record(components={"salt": {"value": -1, "unit": "g"}})
        with pytest.raises(NegativeValueError, match="x-1"):
            ingest_records(record)

    def test_unknown_unit_rejected(self):
        record = make_record(components={"salt": {"value": 1, "unit": "oz"}})
        with pytest.raises(UnknownUnitError, match="oz"):
            ingest_records(record)

    def test_duplicate_id_rejected(self):
        with pytest.raises(DuplicateIdError, match="x-1"):
            ingest_records(make_record(), make_record())

    def test_missing_food_group_rejected(self):
        record = make_record()
        del record["food_group"]
        with pytest.raises(CorpusError, match="food_group"):
            ingest_records(record)

    def test_bad_kind_rejected(self):
        with pytest.raises(CorpusError, match="kind"):
            ingest_records(make_record(kind="homemade"))

    def test_branded_restricted_to_label_components(self):
        record = make_record(
            kind="branded",
            components={
                "energy": {"value": 100, "unit": "kcal"},
                "potassium": {"value": 100, "unit": "mg"},
            },
        )
        with pytest.raises(CorpusError, match="potassium"):
            ingest_records(record)

    def test_invalid_json_line(self):
        with pytest.raises(CorpusError, match="line 1"):
            ingest(io.StringIO("{nope}\n"))

    def test_component_names_canonicalized(self):
        record = make_record(components={"Protein,  Total": {"value": 5, "unit": "g"}})
        (item,) = ingest_records(record)
        assert "protein, total" in item.components

    def test_idempotent_roundtrip(self, fixture_items, tmp_path):
        path = tmp_path / "roundtrip.jsonl"
        write_corpus(fixture_items, path)
        assert ingest(path) == fixture_items


class TestSerialize:
    def test_provolon_sentence_prefix(self, fixture_items):
        provolon = next(i for i in fixture_items if i.name == "Cheese Provolon")
        sentence = serialize(provolon).sentence
        expected = (
            "Food item 'Cheese Provolon' belongs to the food group 'Cheeses', "
            "food group 'Cheeses'. Nutritional values per 100g: "
            "energy is 365.30 kcal, protein, total is 26.30 g"
        )
        assert sentence.startswith(expected)

    def test_echo_invariant_across_fixture(self, fixture_items):
        for item in fixture_items:
            sentence = serialize(item).sentence
            assert sentence.count(item.food_group) == 2, item.id

    def test_zero_components_is_degenerate_but_legal(self):
        item = FoodItem(
            id="e-1", name="Empty", food_group="Misc", kind="generic",
            components={}, units={},
        )
        sentence = serialize(item).sentence
        assert sentence.endswith("Nutritional values per 100g:")
        assert sentence.count("Misc") == 2

    def test_two_decimal_rendering(self):
        item = FoodItem(
            id="d-1", name="Decimals", food_group="Misc", kind="generic",
            components={"salt": 0.5, "energy": 365.3}, units={"salt": "g", "energy": "kcal"},
        )
        sentence = serialize(item).sentence
        assert "energy is 365.30 kcal" in sentence
        assert "salt is 0.50 g" in sentence

    def test_deterministic(self, fixture_items):
        first = [serialize(i).sentence for i in fixture_items]
        second = [serialize(i).sentence for i in fixture_items]
        assert first == second

    def test_component_order(self):
        names = [
            "zinc", "salt", "energy", "calcium", "fat, total",
            "protein, total", "sugars, total",
        ]
        assert sentence_component_order(names) == [
            "energy", "protein, total", "sugars, total", "fat, total",
            "salt", "calcium", "zinc",
        ]


class TestMetadataAndSchema:
    def test_metadata_contains_food_group(self, fixture_items):
        for item in fixture_items[:20]:
            metadata = item.metadata()
            assert metadata["food group"] == item.food_group
            assert evaluate(Cmp("food group", Op.EQ, item.food_group), metadata)

    def test_schema_covers_components_and_group(self, fixture_items, fixture_schema):
        assert "food group" in fixture_schema
        assert fixture_schema.kind_of("food group") is FieldKind.CATEGORICAL
        for item in fixture_items:
            for name in item.components:
                assert name in fixture_schema
                assert fixture_schema.kind_of(name) is FieldKind.NUMERIC

    def test_schema_units(self, fixture_schema):
        assert fixture_schema.unit_of("energy") == "kcal"
        assert fixture_schema.unit_of("protein, total") == "g"

    def test_fixture_scale(self, fixture_items):
        assert len(fixture_items) >= 200
        groups = {i.food_group for i in fixture_items}
        assert len(groups) >= 8
        kinds = {i.kind for i in fixture_items}
        assert kinds == {"branded", "generic"}

    def test_branded_items_never_match_micronutrient_filters(self, fixture_items):
        # branded records carry no micronutrients, so a vitamin-C constraint
        # must fail on every one of them
        expr = Cmp("vitamin c", Op.GT, 0.01)
        branded = [i for i in fixture_items if i.kind == "branded"]
        assert branded
        for item in branded:
            assert "vitamin c" not in item.components
            assert evaluate(expr, item.metadata()) is False
