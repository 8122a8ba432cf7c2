"""Food-composition corpus: JSONL ingestion, unit standardization, sentences.

The interchange format is JSON-lines, one item per line:

    {"id": "...", "name": "...", "food_group": "...", "kind": "branded",
     "components": {"protein, total": {"value": 26.3, "unit": "g"}, ...}}

Accepted units are g, mg, µg and kcal; milligram and microgram values are
converted to grams on ingestion so every stored measurement is per 100 g in
grams or kilocalories.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Mapping, Union

from .filters import FOOD_GROUP_FIELD, FieldSchema, canonical_field_name

ENERGY_COMPONENT = "energy"

# Big-8 label components in their fixed sentence order (energy leads, the
# rest follow the documented label order; everything else is alphabetical).
BIG8_COMPONENTS = (
    "protein, total",
    "carbohydrates, total",
    "sugars, total",
    "fat, total",
    "fat, saturated",
    "fibre, total dietary",
    "salt",
)

_SENTENCE_PRIORITY = {
    name: i for i, name in enumerate((ENERGY_COMPONENT, *BIG8_COMPONENTS))
}

# Both the micro sign (U+00B5) and the Greek mu (U+03BC) are accepted.
_MASS_FACTORS = {"g": 1.0, "mg": 1e-3, "µg": 1e-6, "μg": 1e-6, "ug": 1e-6}

ITEM_KINDS = ("branded", "generic")


class CorpusError(ValueError):
    """A corpus record is invalid; ingestion aborts on the first offender."""

    def __init__(self, message: str, record_id: str | None = None):
        self.record_id = record_id
        if record_id is not None:
            message = f"record {record_id!r}: {message}"
        super().__init__(message)


class DuplicateIdError(CorpusError):
    pass


class UnknownUnitError(CorpusError):
    pass


class NegativeValueError(CorpusError):
    pass


@dataclass(frozen=True)
class FoodItem:
    """One food record with standardized per-100 g component values."""

    id: str
    name: str
    food_group: str
    kind: str  # "branded" | "generic"
    components: Mapping[str, float]
    units: Mapping[str, str]  # canonical component name -> "g" | "kcal"

    def metadata(self) -> dict:
        """Filterable view: components plus the food group."""
        md = dict(self.components)
        md[FOOD_GROUP_FIELD] = self.food_group
        return md


@dataclass(frozen=True)
class SerializedItem:
    item_id: str
    sentence: str


def _parse_record(record: Mapping, lineno: int) -> FoodItem:
    record_id = record.get("id")
    if not isinstance(record_id, str) or not record_id:
        raise CorpusError(f"line {lineno}: missing or invalid 'id'")
    for key in ("name", "food_group", "kind"):
        if not isinstance(record.get(key), str) or not record[key]:
            raise CorpusError(f"missing or invalid {key!r}", record_id)
    if record["kind"] not in ITEM_KINDS:
        raise CorpusError(f"kind must be one of {ITEM_KINDS}", record_id)
    raw_components = record.get("components")
    if not isinstance(raw_components, Mapping):
        raise CorpusError("missing or invalid 'components'", record_id)

    components: dict[str, float] = {}
    units: dict[str, str] = {}
    for raw_name, entry in raw_components.items():
        name = canonical_field_name(str(raw_name))
        if name in components:
            raise CorpusError(f"duplicate component {name!r}", record_id)
        if not isinstance(entry, Mapping) or "value" not in entry or "unit" not in entry:
            raise CorpusError(
                f"component {name!r} must be {{'value': .., 'unit': ..}}", record_id
            )
        value, unit = entry["value"], entry["unit"]
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise CorpusError(f"component {name!r} value must be a number", record_id)
        value = float(value)
        if not math.isfinite(value) or value < 0:
            raise NegativeValueError(
                f"component {name!r} value {value} is negative or not finite", record_id
            )
        if unit == "kcal":
            components[name] = value
            units[name] = "kcal"
        elif unit in _MASS_FACTORS:
            components[name] = value * _MASS_FACTORS[unit]
            units[name] = "g"
        else:
            raise UnknownUnitError(f"component {name!r} has unknown unit {unit!r}", record_id)

    item = FoodItem(
        id=record_id,
        name=record["name"],
        food_group=record["food_group"],
        kind=record["kind"],
        components=components,
        units=units,
    )
    if item.kind == "branded":
        allowed = set(_SENTENCE_PRIORITY)
        extra = sorted(set(components) - allowed)
        if extra:
            raise CorpusError(
                f"branded item carries non-label components: {extra}", record_id
            )
    return item


def ingest(source: Union[str, Path, IO, Iterable[str]]) -> list[FoodItem]:
    """Load a JSONL corpus, standardizing units and rejecting bad records.

    Raises DuplicateIdError, UnknownUnitError or NegativeValueError (all
    CorpusError) naming the offending record; the first error aborts the
    whole ingestion.
    """
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as handle:
            return ingest(handle)

    items: list[FoodItem] = []
    seen: set[str] = set()
    for lineno, line in enumerate(source, 1):
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"line {lineno}: invalid JSON: {exc}") from None
        item = _parse_record(record, lineno)
        if item.id in seen:
            raise DuplicateIdError("duplicate id", item.id)
        seen.add(item.id)
        items.append(item)
    return items


def write_corpus(items: Iterable[FoodItem], path: Union[str, Path]) -> None:
    """Write items back out in the interchange format (already standardized)."""
    with open(path, "w", encoding="utf-8") as handle:
        for item in items:
            record = {
                "id": item.id,
                "name": item.name,
                "food_group": item.food_group,
                "kind": item.kind,
                "components": {
                    name: {"value": item.components[name], "unit": item.units[name]}
                    for name in sorted(item.components)
                },
            }
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")


def sentence_component_order(names: Iterable[str]) -> list[str]:
    """Fixed rendering order: energy, big-8 label order, rest alphabetical."""
    tail = len(_SENTENCE_PRIORITY)
    return sorted(names, key=lambda n: (_SENTENCE_PRIORITY.get(n, tail), n))


def serialize(item: FoodItem) -> SerializedItem:
    """Render the item as its embedding sentence.

    The food-group name is written twice (echo) to strengthen its weight in
    the embedding space; numeric values are rendered with exactly two
    decimals. Deterministic: equal items yield byte-identical sentences.
    """
    head = (
        f"Food item '{item.name}' belongs to the food group '{item.food_group}', "
        f"food group '{item.food_group}'. Nutritional values per 100g:"
    )
    parts = [
        f"{name} is {item.components[name]:.2f} {item.units[name]}"
        for name in sentence_component_order(item.components)
    ]
    sentence = head if not parts else f"{head} {', '.join(parts)}."
    return SerializedItem(item_id=item.id, sentence=sentence)


def build_schema(items: Iterable[FoodItem]) -> FieldSchema:
    """Field schema over a corpus: every component name plus the food group."""
    units: dict[str, str] = {}
    for item in items:
        for name, unit in item.units.items():
            if units.setdefault(name, unit) != unit:
                raise CorpusError(
                    f"component {name!r} has conflicting units across items", item.id
                )
    return FieldSchema(numeric=units)
