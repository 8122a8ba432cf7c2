#!/usr/bin/env python3
"""Regenerate the bundled fixture data under src/foodrag/data/.

Deterministic: a fixed seed drives every random draw, so re-running this
script reproduces the committed files byte for byte. The fixture is a
synthetic stand-in for a national food-composition database: 220 items in
10 food groups, branded items restricted to label components, generic items
carrying micronutrients in mixed raw units (g/mg/ug/kcal) to exercise unit
standardization.

Also emits the 15-question benchmark mini-set (5 Easy / 5 Medium / 5 Hard,
one guaranteed-empty question per tier) and the scripted LLM responses that
drive it: Easy/Medium scripts return exactly the ground-truth filter, Hard
scripts fail the strict attempt and fall back the way a real model would.

The "Cheese Provolon" record is pinned to its published example values.
Its two published renderings disagree on total fat (29.90 vs 28.90); the
fixture uses the first occurrence, 29.90, and leaves the discrepancy alone.
"""

from __future__ import annotations

import json
import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from foodrag.corpus import build_schema, ingest, serialize  # noqa: E402
from foodrag.filters import evaluate, parse_filter  # noqa: E402

DATA_DIR = Path(__file__).resolve().parents[1] / "src" / "foodrag" / "data"
SEED = 20250811

QUALIFIERS = ["", "organic", "select", "premium", "farmhouse", "smallbatch"]

BIG8_RANGES = {
    # group: (energy, protein, carbs, sugars, fat, saturated, fibre, salt)
    "Cheeses": ((300, 430), (20, 30), (0, 3), (0, 1.5), (20, 35), (12, 24), (0, 0), (1, 3)),
    "Fresh beef": ((120, 290), (18, 28), (0, 1), (0, 0.5), (3, 22), (1, 9), (0, 0), (0.05, 0.25)),
    "Dry fruits": ((240, 340), (2, 5), (55, 80), (35, 65), (0.3, 2), (0.1, 0.6), (4, 10), (0, 0.1)),
    "Fish": ((90, 250), (15, 29), (0, 1), (0, 0.8), (1, 16), (0.2, 4), (0, 0), (0.1, 1.8)),
    "Chicken meat": ((110, 240), (17, 27), (0, 0.5), (0, 0.3), (2, 15), (0.5, 4), (0, 0), (0.08, 0.3)),
    "Vegetables": ((25, 95), (1.5, 5), (3, 12), (1, 5), (0.2, 2), (0.05, 0.4), (1.5, 5), (0, 0.15)),
    "Bread and bakery": ((230, 330), (7, 12), (45, 60), (2, 6), (1.5, 8), (0.4, 2.5), (0.5, 2.5), (0.8, 2.0)),
    "Chocolate products": ((480, 570), (5, 9), (45, 62), (38, 58), (25, 40), (15, 25), (2, 7), (0.05, 0.4)),
    "Fruit juices": ((38, 60), (0.1, 0.9), (9, 14), (8, 13), (0, 0.3), (0, 0.1), (0, 0.5), (0, 0.05)),
    "Breakfast cereals": ((340, 420), (7, 13), (60, 85), (5, 28), (1.5, 7), (0.3, 2), (5, 12), (0.2, 1.1)),
}

# micronutrients for generic items: component -> (lo, hi, raw unit, presence prob)
MICROS = {
    "Cheeses": {
        "calcium": (600, 900, "mg", 0.9),
        "sodium": (600, 900, "mg", 0.9),
        "cholesterol": (60, 105, "mg", 0.9),
        "potassium": (80, 150, "mg", 0.8),
        "vitamin b-12": (0.8, 2.5, "µg", 0.7),
    },
    "Fresh beef": {
        "cholesterol": (50, 90, "mg", 1.0),
        "potassium": (250, 380, "mg", 0.9),
        "iron": (1.5, 3.2, "mg", 0.9),
        "zinc": (3, 8, "mg", 0.8),
        "vitamin b-12": (1, 3, "µg", 0.9),
    },
    "Dry fruits": {
        "potassium": (600, 1000, "mg", 1.0),
        "magnesium": (30, 90, "mg", 0.9),
        "iron": (0.8, 2.8, "mg", 0.8),
        "vitamin c": (0.5, 4, "mg", 0.6),
        "calcium": (35, 90, "mg", 0.7),
    },
    "Fish": {
        "cholesterol": (40, 80, "mg", 0.9),
        "potassium": (250, 450, "mg", 0.9),
        "vitamin d": (5, 15, "µg", 0.8),
        "sodium": (60, 120, "mg", 0.8),
        "vitamin b-12": (2, 9, "µg", 0.9),
    },
    "Chicken meat": {
        "cholesterol": (60, 110, "mg", 1.0),
        "potassium": (200, 300, "mg", 0.9),
        "sodium": (60, 95, "mg", 0.8),
        "zinc": (0.8, 2.4, "mg", 0.7),
        "vitamin b-12": (0.2, 0.6, "µg", 0.8),
    },
    "Vegetables": {
        # potassium/magnesium/vitamin c handled separately (rich/poor split)
        "calcium": (30, 120, "mg", 0.8),
        "iron": (0.5, 3, "mg", 0.8),
        "water": (85, 94, "g", 0.9),
    },
    "Bread and bakery": {
        "sodium": (300, 700, "mg", 0.9),
        "potassium": (100, 220, "mg", 0.8),
        "iron": (0.8, 2.2, "mg", 0.7),
        "calcium": (20, 80, "mg", 0.7),
    },
    "Chocolate products": {
        "potassium": (300, 550, "mg", 0.8),
        "magnesium": (80, 180, "mg", 0.8),
        "iron": (2, 8, "mg", 0.8),
    },
    "Fruit juices": {
        "potassium": (120, 200, "mg", 1.0),
        "vitamin c": (15, 40, "mg", 1.0),
        "calcium": (8, 25, "mg", 0.6),
        "magnesium": (8, 15, "mg", 0.7),
    },
    "Breakfast cereals": {
        "iron": (4, 12, "mg", 0.9),
        "magnesium": (60, 140, "mg", 0.8),
        "potassium": (150, 350, "mg", 0.8),
        "vitamin b-12": (0.5, 1.8, "µg", 0.5),
    },
}

NAME_POOLS = {
    "Cheeses": ["Gouda young", "Edam ball", "Camembert petit", "Mozzarella fresh",
                "Cottage curd", "Parmigiano wedge", "Feta block", "Blue Stilton",
                "Cheddar mature", "Ricotta tub", "Halloumi grill", "Brie wheel"],
    "Fresh beef": ["Beef sirloin", "Beef tenderloin", "Rump steak", "Ribeye cut",
                   "Topside roast", "Flank cut", "Brisket raw", "Minced round",
                   "Oxtail piece", "Chuck roll", "Silverside joint", "Shin slice"],
    "Dry fruits": ["Raisins golden", "Dried apricots", "Prunes pitted", "Dates medjool",
                   "Dried figs", "Dried cranberries", "Banana chips", "Dried mango strips",
                   "Apple rings", "Sultanas", "Dried pears", "Dried plums"],
    "Fish": ["Trout fillet", "Salmon steak", "Sardines in oil", "Mackerel smoked",
             "Tuna chunks", "Cod loin", "Herring pickled", "Anchovy fillets",
             "Sea bass whole", "Hake portion", "Halibut steak", "Pollock frozen"],
    "Chicken meat": ["Chicken breast fillet", "Chicken thigh skinless", "Chicken drumstick",
                     "Chicken wings", "Whole roasting hen", "Chicken liver", "Capon breast",
                     "Poussin whole", "Corn-fed chicken leg", "Chicken gizzards",
                     "Spatchcock bird", "Chicken tenders"],
    "Vegetables": ["Spinach leaves", "Kale curly", "Broccoli florets", "Swiss chard",
                   "Beet greens", "Collard greens", "Brussels sprouts", "Green peas",
                   "Edamame beans", "Artichoke hearts", "Asparagus spears", "Watercress bunch"],
    "Bread and bakery": ["Rye loaf", "Sourdough boule", "Whole wheat toast", "Baguette white",
                         "Ciabatta roll", "Pretzel twist", "Croissant butter", "Multigrain loaf",
                         "Pita pockets", "Focaccia rosemary", "Brioche bun", "Kaiser roll"],
    "Chocolate products": ["Dark bar 70%", "Milk bar creamy", "Hazelnut praline",
                           "Truffle assortment", "White bar vanilla", "Cocoa nibs coated",
                           "Mint thins", "Orange peel dipped", "Almond cluster",
                           "Caramel filled bar", "Espresso square", "Coconut bounty bar"],
    "Fruit juices": ["Orange pressed", "Apple cloudy", "Grape red", "Pineapple pure",
                     "Tomato vine", "Peach nectar", "Pear press", "Multivitamin blend",
                     "Carrot fresh", "Pomegranate rich", "Grapefruit pink", "Blackcurrant cordial"],
    "Breakfast cereals": ["Corn flakes", "Rolled oats", "Muesli base", "Bran sticks",
                          "Granola crunchy", "Puffed rice", "Wheat biscuits", "Choco hoops",
                          "Honey loops", "Spelt flakes", "Barley porridge mix", "Rye crisp flakes"],
}

# (branded count, generic count) per group; totals 220 items
COUNTS = {
    "Cheeses": (8, 14),
    "Fresh beef": (6, 16),
    "Dry fruits": (8, 12),
    "Fish": (7, 15),
    "Chicken meat": (7, 15),
    "Vegetables": (6, 18),
    "Bread and bakery": (10, 12),
    "Chocolate products": (12, 10),
    "Fruit juices": (10, 12),
    "Breakfast cereals": (10, 12),
}

# pinned protein values give the "between 30 and 35 g" question its answers
PROTEIN_PINS = {"Parmigiano wedge": 33.4, "Tuna chunks": 31.25, "Beef tenderloin": 30.85}

PROVOLON = {
    "id": "cheeses-001",
    "name": "Cheese Provolon",
    "food_group": "Cheeses",
    "kind": "branded",
    "components": {
        "energy": {"value": 365.3, "unit": "kcal"},
        "protein, total": {"value": 26.3, "unit": "g"},
        "carbohydrates, total": {"value": 0.0, "unit": "g"},
        "fat, total": {"value": 29.9, "unit": "g"},
        "fibre, total dietary": {"value": 0.0, "unit": "g"},
        "salt": {"value": 2.19, "unit": "g"},
    },
}

BIG8_KEYS = ("energy", "protein, total", "carbohydrates, total", "sugars, total",
             "fat, total", "fat, saturated", "fibre, total dietary", "salt")


def names_for(group: str, count: int) -> list[str]:
    pool = NAME_POOLS[group]
    names = []
    for qualifier in QUALIFIERS:
        for base in pool:
            names.append(base if not qualifier else f"{base}, {qualifier}")
            if len(names) == count:
                return names
    raise AssertionError(f"name pool too small for {group}")


def make_big8(rng: random.Random, group: str, name: str) -> dict:
    energy, protein, carbs, sugars, fat, sat, fibre, salt = BIG8_RANGES[group]
    values = {
        "energy": round(rng.uniform(*energy), 1),
        "protein, total": round(rng.uniform(*protein), 2),
        "carbohydrates, total": round(rng.uniform(*carbs), 2),
        "sugars, total": round(rng.uniform(*sugars), 2),
        "fat, total": round(rng.uniform(*fat), 2),
        "fat, saturated": round(rng.uniform(*sat), 2),
        "fibre, total dietary": round(rng.uniform(*fibre), 2),
        "salt": round(rng.uniform(*salt), 2),
    }
    values["sugars, total"] = min(values["sugars, total"], values["carbohydrates, total"])
    values["fat, saturated"] = min(values["fat, saturated"], values["fat, total"])
    if name.split(",")[0] in PROTEIN_PINS and name == name.split(",")[0]:
        values["protein, total"] = PROTEIN_PINS[name]
    components = {}
    for key in BIG8_KEYS:
        unit = "kcal" if key == "energy" else "g"
        present = True
        if key in ("sugars, total", "fat, saturated", "fibre, total dietary"):
            present = rng.random() < 0.85
        if present:
            components[key] = {"value": values[key], "unit": unit}
    return components


def make_micros(rng: random.Random, group: str, generic_index: int) -> dict:
    components = {}
    for component, (lo, hi, unit, prob) in MICROS[group].items():
        if rng.random() < prob:
            components[component] = {"value": round(rng.uniform(lo, hi), 1), "unit": unit}
    if group == "Vegetables":
        rich = generic_index < 9  # first half satisfies the mineral question
        if rich:
            components["potassium"] = {"value": round(rng.uniform(550, 950), 1), "unit": "mg"}
            components["magnesium"] = {"value": round(rng.uniform(210, 340), 1), "unit": "mg"}
            components["vitamin c"] = {"value": round(rng.uniform(20, 80), 1), "unit": "mg"}
        else:
            components["potassium"] = {"value": round(rng.uniform(100, 450), 1), "unit": "mg"}
            components["magnesium"] = {"value": round(rng.uniform(20, 150), 1), "unit": "mg"}
            components["vitamin c"] = {"value": round(rng.uniform(1, 8), 1), "unit": "mg"}
    return components


def build_records() -> list[dict]:
    rng = random.Random(SEED)
    records = []
    for group, (branded_count, generic_count) in COUNTS.items():
        total = branded_count + generic_count
        slug = group.lower().replace(" ", "-")
        names = names_for(group, total)
        if group == "Cheeses":
            names = ["Cheese Provolon"] + names[: total - 1]
        generic_seen = 0
        for index, name in enumerate(names):
            kind = "branded" if index < branded_count else "generic"
            record_id = f"{slug}-{index + 1:03d}"
            if name == "Cheese Provolon":
                records.append(dict(PROVOLON, id=record_id))
                continue
            components = make_big8(rng, group, name)
            if kind == "generic":
                components.update(make_micros(rng, group, generic_seen))
                generic_seen += 1
            records.append(
                {
                    "id": record_id,
                    "name": name,
                    "food_group": group,
                    "kind": kind,
                    "components": components,
                }
            )
    return records


QUESTION_SPECS = [
    # Easy: 1-2 conditions
    ("E1", "Which foods have more than 12 g of protein?", "Easy",
     {"protein, total": {"$gt": 12}}, ""),
    ("E2", "Which foods belong to the food group 'Cheeses'?", "Easy",
     {"food group": "Cheeses"}, ""),
    ("E3", "Which foods have less than 5 g of sugars and belong to the food group 'Fish'?", "Easy",
     {"$and": [{"sugars, total": {"$lt": 5}}, {"food group": "Fish"}]}, ""),
    ("E4", "Which foods have more than 900 g of protein?", "Easy",
     {"protein, total": {"$gt": 900}}, "designed to yield no results"),
    ("E5", "Which foods have less than 1 g of salt?", "Easy",
     {"salt": {"$lt": 1}}, ""),
    # Medium: 3-4 conditions, nested AND/OR, ranges
    ("M1", "Which foods have more than 0.5 g of potassium, more than 0.2 g of magnesium, "
     "more than 0.01 g of vitamin C, and less than 5 g of fats?", "Medium",
     {"$and": [{"potassium": {"$gt": 0.5}}, {"magnesium": {"$gt": 0.2}},
               {"vitamin c": {"$gt": 0.01}}, {"fat, total": {"$lt": 5}}]}, ""),
    ("M2", "Which foods from the food group 'Fresh beef' or 'Dry fruits' have more than 10 g "
     "of proteins, less than 2 g of sugars, less than 15 g of fats, and less than 5 g of "
     "carbohydrates?", "Medium",
     {"$and": [{"food group": {"$in": ["Fresh beef", "Dry fruits"]}},
               {"protein, total": {"$gt": 10}}, {"sugars, total": {"$lt": 2}},
               {"fat, total": {"$lt": 15}}, {"carbohydrates, total": {"$lt": 5}}]}, ""),
    ("M3", "Which foods have proteins between 30 and 35 g?", "Medium",
     {"$and": [{"protein, total": {"$gte": 30}}, {"protein, total": {"$lte": 35}}]},
     "range endpoints are inclusive (gte/lte)"),
    ("M4", "Which foods from the food group 'Fruit juices' have more than 50 g of protein "
     "and less than 1 g of sugars?", "Medium",
     {"$and": [{"food group": "Fruit juices"}, {"protein, total": {"$gt": 50}},
               {"sugars, total": {"$lt": 1}}]}, "designed to yield no results"),
    ("M5", "Which foods from the food group 'Chocolate products' or 'Breakfast cereals' "
     "have more than 20 g of sugars?", "Medium",
     {"$and": [{"food group": {"$in": ["Chocolate products", "Breakfast cereals"]}},
               {"sugars, total": {"$gt": 20}}]}, ""),
]

# Hard questions: conditions the filter language cannot express; ground truth
# is an id list computed over the fixture (items must carry both fields).
HARD_SPECS = [
    ("H1", "Which foods from the food group 'Chicken meat' have more proteins than cholesterol?",
     lambda md: (md.get("food group") == "Chicken meat"
                 and "protein, total" in md and "cholesterol" in md
                 and md["protein, total"] > md["cholesterol"]),
     ['{"protein, total": {"$gt": "cholesterol"}}', '{"food group": "Chicken meat"}']),
    ("H2", "Which foods have a sum of proteins and fats greater than 80 g?",
     lambda md: ("protein, total" in md and "fat, total" in md
                 and md["protein, total"] + md["fat, total"] > 80),
     ['The condition needs arithmetic, closest filter: {"sum of proteins and fats": {"$gt": 80}}',
      "{}"]),
    ("H3", "Which foods from the food group 'Cheeses' have more fat than protein?",
     lambda md: (md.get("food group") == "Cheeses"
                 and "fat, total" in md and "protein, total" in md
                 and md["fat, total"] > md["protein, total"]),
     ['{"fat, total": {"$gt": {"$field": "protein, total"}}}', '{"food group": "Cheeses"}']),
    ("H4", "Which foods from the food group 'Dry fruits' have more proteins than carbohydrates?",
     lambda md: (md.get("food group") == "Dry fruits"
                 and "protein, total" in md and "carbohydrates, total" in md
                 and md["protein, total"] > md["carbohydrates, total"]),
     ["This comparison cannot be expressed as a metadata filter.",
      '{"food group": "Dry fruits"}']),
    ("H5", "Which foods from the food group 'Bread and bakery' have more salt than fibre?",
     lambda md: (md.get("food group") == "Bread and bakery"
                 and "salt" in md and "fibre, total dietary" in md
                 and md["salt"] > md["fibre, total dietary"]),
     ['{"salt": {"$gt": "fibre, total dietary"}}', '{"food group": "Bread and bakery"}']),
]


def main() -> None:
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    records = build_records()
    corpus_path = DATA_DIR / "fixture_corpus.jsonl"
    with open(corpus_path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")

    items = ingest(corpus_path)
    schema = build_schema(items)
    assert len(items) >= 200, len(items)
    groups = {item.food_group for item in items}
    assert len(groups) >= 8, groups
    assert any(item.kind == "branded" for item in items)
    assert any(item.kind == "generic" for item in items)

    # echo invariant: group string appears exactly twice in every sentence
    for item in items:
        sentence = serialize(item).sentence
        assert sentence.count(item.food_group) == 2, (item.id, sentence)

    provolon = next(item for item in items if item.name == "Cheese Provolon")
    expected_prefix = (
        "Food item 'Cheese Provolon' belongs to the food group 'Cheeses', "
        "food group 'Cheeses'. Nutritional values per 100g: "
        "energy is 365.30 kcal, protein, total is 26.30 g"
    )
    assert serialize(provolon).sentence.startswith(expected_prefix)

    questions = []
    scripted: dict[str, list[str]] = {}
    for qid, question, difficulty, filter_doc, notes in QUESTION_SPECS:
        expr = parse_filter(filter_doc, schema)
        matched = sorted(item.id for item in items if evaluate(expr, item.metadata()))
        questions.append(
            {"id": qid, "question": question, "difficulty": difficulty,
             "ground_truth": {"filter": filter_doc}, "notes": notes}
        )
        document = json.dumps(filter_doc, ensure_ascii=False)
        scripted[question] = (
            [f"```json\n{document}\n```"] if qid == "E1" else [document]
        )
        if "no results" in notes:
            assert not matched, (qid, matched)
        else:
            assert matched, qid

    for qid, question, predicate, responses in HARD_SPECS:
        matched = sorted(item.id for item in items if predicate(item.metadata()))
        questions.append(
            {"id": qid, "question": question, "difficulty": "Hard",
             "ground_truth": {"ids": matched},
             "notes": "ids computed over the fixture corpus; items lacking a "
                      "compared field are excluded"}
        )
        scripted[question] = responses
    assert not json.loads(
        json.dumps(next(q for q in questions if q["id"] == "H4"))
    )["ground_truth"]["ids"], "H4 must be empty"
    assert next(q for q in questions if q["id"] == "H1")["ground_truth"]["ids"]
    assert next(q for q in questions if q["id"] == "H3")["ground_truth"]["ids"]
    assert next(q for q in questions if q["id"] == "H5")["ground_truth"]["ids"]

    (DATA_DIR / "questions_mini.json").write_text(
        json.dumps({"questions": questions}, ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )
    (DATA_DIR / "scripted_responses.json").write_text(
        json.dumps(scripted, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
    print(f"wrote {len(items)} items, {len(questions)} questions -> {DATA_DIR}")


if __name__ == "__main__":
    main()
