"""From structured food records to embedding sentences.

Loads the bundled fixture corpus, shows the unit standardization, and
prints the sentence form with its food-group echo.
"""

from importlib import resources

from foodrag import build_schema, ingest, serialize

corpus_file = resources.files("foodrag") / "data" / "fixture_corpus.jsonl"
with resources.as_file(corpus_file) as path:
    items = ingest(path)

groups = sorted({item.food_group for item in items})
print(f"{len(items)} items across {len(groups)} food groups:")
print(" ", ", ".join(groups))

# -- the flagship record, pinned to its published values
provolon = next(item for item in items if item.name == "Cheese Provolon")
print("\ncomponents (standardized to g / kcal per 100 g):")
for name, value in provolon.components.items():
    print(f"  {name}: {value} {provolon.units[name]}")

sentence = serialize(provolon).sentence
print("\nsentence:")
print(" ", sentence)
print("food-group echo count:", sentence.count(provolon.food_group))

# -- a generic item carries micronutrients, converted from mg / ug
generic = next(
    item for item in items if item.kind == "generic" and "potassium" in item.components
)
print(f"\n{generic.name} ({generic.food_group}, generic):")
print("  potassium:", generic.components["potassium"], "g  (ingested from mg)")

# -- metadata() is the filterable view: components plus the food group
print("\nmetadata keys:", sorted(provolon.metadata()))
schema = build_schema(items)
print("schema: ", len(schema), "fields,", schema.field_names()[:5], "...")
