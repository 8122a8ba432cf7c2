"""Tour of the metadata filter language.

Parse filter documents the way they arrive from an LLM, watch validation
catch the classic failure modes, and see the loose food-group projection
that powers the first fallback tier.
"""

from foodrag import FieldSchema, FilterError, evaluate, loose_projection, parse_filter, to_document

schema = FieldSchema(
    numeric={
        "energy": "kcal",
        "protein, total": "g",
        "fat, total": "g",
        "salt": "g",
    }
)

# -- the canonical example: a range comparison on a numeric component
expr = parse_filter('{"protein, total": {"$gt": 12}}', schema)
print("parsed:", expr)

record = {"food group": "Cheeses", "protein, total": 26.30, "salt": 2.19}
print("matches the cheese record:", evaluate(expr, record))

# -- shorthand equality and combinators
combo = parse_filter(
    '{"$and": [{"food group": "Cheeses"}, {"salt": {"$lt": 3}}]}', schema
)
print("conjunction matches:", evaluate(combo, record))

# -- the empty filter matches everything
print("empty filter matches:", evaluate(parse_filter("{}", schema), record))

# -- a record with no measurement never satisfies a constraint on it,
#    not even a negative one
absent = parse_filter('{"fat, total": {"$ne": 99}}', schema)
print("NE on an absent field:", evaluate(absent, record))

# -- validation: every failure kind carries a path into the document
bad_documents = [
    "not json at all",
    '{"protein, totall": {"$gt": 12}}',   # misspelled field
    '{"food group": {"$gt": 3}}',         # range op on a categorical field
    '{"$and": [{"salt": 1}]}',            # $and needs two clauses
    '{"salt": {"$gt": "12"}}',            # quoted number: no silent coercion
]
for document in bad_documents:
    try:
        parse_filter(document, schema)
    except FilterError as err:
        print(f"rejected ({err.kind.value} at {err.path or '$'}): {err.message}")

# -- the loose projection keeps only what identifies the food group
strict = parse_filter(
    '{"$and": [{"food group": "Cheeses"}, {"salt": {"$lt": 3}}, {"protein, total": {"$gt": 20}}]}',
    schema,
)
print("loose projection:", to_document(loose_projection(strict)))
