"""Metadata filter language for food-composition search.

Defines the queryable field schema, the filter AST, a parser/validator for
the JSON filter dialect that LLMs are asked to emit, a predicate evaluator,
and the food-group projection used by the loose retrieval fallback.

The dialect is a JSON object language: ``{"salt": {"$lt": 3}}`` compares a
field, ``{"food group": "Cheeses"}`` is shorthand for ``$eq``, and
``{"$and": [...]}`` / ``{"$or": [...]}`` combine two or more clauses. An
empty object matches everything.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Union

FOOD_GROUP_FIELD = "food group"

VALID_UNITS = ("g", "kcal")


def canonical_field_name(name: str) -> str:
    """Normalize a field name: trim, collapse whitespace runs, lowercase.

    Commas are preserved, so ``" Protein,  Total "`` canonicalizes to
    ``"protein, total"`` but ``"protein total"`` stays a different name.
    """
    return " ".join(name.split()).lower()


class FieldKind(Enum):
    NUMERIC = "numeric"
    CATEGORICAL = "categorical"


class FieldSchema:
    """The set of filterable fields: numeric components plus the food group.

    Numeric fields carry a unit restricted to grams or kilocalories per
    100 g. Names are canonicalized on construction and on lookup, so
    cosmetic spelling variance ("Protein,  Total") resolves to the right
    field while genuinely wrong names are still rejected.
    """

    def __init__(
        self,
        numeric: Mapping[str, str],
        categorical: Iterable[str] = (FOOD_GROUP_FIELD,),
    ):
        self._kinds: dict[str, FieldKind] = {}
        self._units: dict[str, str] = {}
        for name, unit in numeric.items():
            canon = canonical_field_name(name)
            if unit not in VALID_UNITS:
                raise ValueError(
                    f"field {name!r}: unit must be one of {VALID_UNITS}, got {unit!r}"
                )
            if canon in self._kinds:
                raise ValueError(f"duplicate field name after canonicalization: {canon!r}")
            self._kinds[canon] = FieldKind.NUMERIC
            self._units[canon] = unit
        for name in categorical:
            canon = canonical_field_name(name)
            if canon in self._kinds:
                raise ValueError(f"duplicate field name after canonicalization: {canon!r}")
            self._kinds[canon] = FieldKind.CATEGORICAL

    def resolve(self, name: str) -> str | None:
        """Canonical name if the field exists, else None."""
        canon = canonical_field_name(name)
        return canon if canon in self._kinds else None

    def kind_of(self, canonical: str) -> FieldKind:
        return self._kinds[canonical]

    def unit_of(self, canonical: str) -> str | None:
        """Unit of a numeric field ('g' or 'kcal'); None for categorical."""
        return self._units.get(canonical)

    def field_names(self) -> list[str]:
        return sorted(self._kinds)

    def describe(self) -> list[dict]:
        """Stable listing of fields for prompts and the schema API."""
        out = []
        for name in self.field_names():
            kind = self._kinds[name]
            out.append(
                {
                    "name": name,
                    "kind": kind.value,
                    "unit": self._units.get(name),
                }
            )
        return out

    def __contains__(self, name: str) -> bool:
        return canonical_field_name(name) in self._kinds

    def __len__(self) -> int:
        return len(self._kinds)


class Op(Enum):
    EQ = "$eq"
    NE = "$ne"
    GT = "$gt"
    GTE = "$gte"
    LT = "$lt"
    LTE = "$lte"
    IN = "$in"
    NIN = "$nin"


_OP_BY_TOKEN = {op.value: op for op in Op}
RANGE_OPS = frozenset({Op.GT, Op.GTE, Op.LT, Op.LTE})
LIST_OPS = frozenset({Op.IN, Op.NIN})


@dataclass(frozen=True)
class Cmp:
    """Single comparison: field <op> value (value is a tuple for $in/$nin)."""

    field: str
    op: Op
    value: Union[int, float, str, tuple]


@dataclass(frozen=True)
class And:
    clauses: tuple["FilterExpr", ...]

    def __post_init__(self):
        if len(self.clauses) < 2:
            raise ValueError("$and requires at least 2 clauses")


@dataclass(frozen=True)
class Or:
    clauses: tuple["FilterExpr", ...]

    def __post_init__(self):
        if len(self.clauses) < 2:
            raise ValueError("$or requires at least 2 clauses")


@dataclass(frozen=True)
class MatchAll:
    """The empty filter: matches every record."""


FilterExpr = Union[Cmp, And, Or, MatchAll]

MATCH_ALL = MatchAll()


class FilterErrorKind(Enum):
    SYNTAX = "SyntaxError"
    UNKNOWN_FIELD = "UnknownField"
    TYPE_MISMATCH = "TypeMismatch"
    STRUCTURE = "StructureError"


class FilterError(Exception):
    """A filter document failed parsing or validation.

    Any kind means strict filtering failed and the caller may start the
    fallback cascade. ``raw_response`` is attached by the generation layer
    so the original LLM output survives into audit logs.
    """

    def __init__(self, kind: FilterErrorKind, path: str, message: str):
        self.kind = kind
        self.path = path
        self.message = message
        self.raw_response: str | None = None
        super().__init__(f"{kind.value} at {path or '$'}: {message}")

    def to_diagnostic(self) -> dict:
        return {"kind": self.kind.value, "path": self.path, "message": self.message}


def _join(path: str, segment: str) -> str:
    return segment if not path else f"{path}/{segment}"


def _is_number(value) -> bool:
    return (
        isinstance(value, (int, float))
        and not isinstance(value, bool)
        and math.isfinite(value)
    )


def parse_filter(document: Union[str, Mapping], schema: FieldSchema) -> FilterExpr:
    """Parse and validate a filter document against the schema.

    Accepts the document as raw text (typically straight from an LLM) or as
    an already-decoded mapping. Raises FilterError on any defect:

    - SyntaxError: not JSON, or not a JSON object at the top level
    - StructureError: wrong shape (``$and`` with one clause, a clause with
      multiple keys, unknown operator token, empty ``$in`` list, ...)
    - UnknownField: field name not in the schema after canonicalization
    - TypeMismatch: operator/value incompatible with the field kind
    """
    if isinstance(document, str):
        try:
            data = json.loads(document)
        except json.JSONDecodeError as exc:
            raise FilterError(FilterErrorKind.SYNTAX, "", f"invalid JSON: {exc}") from None
    else:
        data = document
    if not isinstance(data, Mapping):
        raise FilterError(
            FilterErrorKind.SYNTAX, "", "filter document must be a JSON object"
        )
    if len(data) == 0:
        return MATCH_ALL
    return _parse_node(data, schema, "")


def _parse_node(node, schema: FieldSchema, path: str) -> FilterExpr:
    if not isinstance(node, Mapping):
        raise FilterError(
            FilterErrorKind.STRUCTURE, path, "filter clause must be a JSON object"
        )
    if len(node) == 0:
        raise FilterError(
            FilterErrorKind.STRUCTURE,
            path,
            "empty clause (only the top-level filter may be empty)",
        )
    if len(node) != 1:
        raise FilterError(
            FilterErrorKind.STRUCTURE,
            path,
            f"clause must have exactly one key, found {len(node)}",
        )
    key, value = next(iter(node.items()))
    if not isinstance(key, str):
        raise FilterError(FilterErrorKind.STRUCTURE, path, "clause key must be a string")

    if key in ("$and", "$or"):
        kpath = _join(path, key)
        if not isinstance(value, list):
            raise FilterError(FilterErrorKind.STRUCTURE, kpath, f"{key} expects a list")
        if len(value) < 2:
            raise FilterError(
                FilterErrorKind.STRUCTURE, kpath, f"{key} requires at least 2 clauses"
            )
        clauses = tuple(
            _parse_node(child, schema, _join(kpath, str(i)))
            for i, child in enumerate(value)
        )
        return And(clauses) if key == "$and" else Or(clauses)

    if key.startswith("$"):
        raise FilterError(
            FilterErrorKind.STRUCTURE,
            _join(path, key),
            f"operator {key!r} is not valid in this position",
        )

    fpath = _join(path, key)
    canon = schema.resolve(key)
    if canon is None:
        raise FilterError(FilterErrorKind.UNKNOWN_FIELD, fpath, f"unknown field {key!r}")
    kind = schema.kind_of(canon)

    if isinstance(value, Mapping):
        if len(value) != 1:
            raise FilterError(
                FilterErrorKind.STRUCTURE,
                fpath,
                "field clause must contain exactly one operator",
            )
        token, operand = next(iter(value.items()))
        op = _OP_BY_TOKEN.get(token)
        if op is None:
            raise FilterError(
                FilterErrorKind.STRUCTURE,
                _join(fpath, str(token)),
                f"unknown operator {token!r}",
            )
        return _validated_cmp(canon, op, operand, kind, _join(fpath, token))

    # implicit-equality shorthand: {field: value}
    return _validated_cmp(canon, Op.EQ, value, kind, fpath)


def _validated_cmp(field: str, op: Op, value, kind: FieldKind, path: str) -> Cmp:
    if op in LIST_OPS:
        if not isinstance(value, list):
            raise FilterError(
                FilterErrorKind.TYPE_MISMATCH, path, f"{op.value} expects a list of values"
            )
        if not value:
            raise FilterError(
                FilterErrorKind.STRUCTURE, path, f"{op.value} requires a non-empty list"
            )
        if kind is FieldKind.NUMERIC:
            if not all(_is_number(v) for v in value):
                raise FilterError(
                    FilterErrorKind.TYPE_MISMATCH,
                    path,
                    f"{op.value} on numeric field {field!r} requires numeric values",
                )
        else:
            if not all(isinstance(v, str) for v in value):
                raise FilterError(
                    FilterErrorKind.TYPE_MISMATCH,
                    path,
                    f"{op.value} on categorical field {field!r} requires text values",
                )
        return Cmp(field, op, tuple(value))

    if op in RANGE_OPS:
        if kind is not FieldKind.NUMERIC:
            raise FilterError(
                FilterErrorKind.TYPE_MISMATCH,
                path,
                f"range operator {op.value} is not valid on categorical field {field!r}",
            )
        if not _is_number(value):
            raise FilterError(
                FilterErrorKind.TYPE_MISMATCH,
                path,
                f"{op.value} on numeric field {field!r} requires a number",
            )
        return Cmp(field, op, value)

    # $eq / $ne; no number<->text coercion: a quoted number on a numeric
    # field is an error the fallback cascade is meant to surface.
    if kind is FieldKind.NUMERIC:
        if not _is_number(value):
            raise FilterError(
                FilterErrorKind.TYPE_MISMATCH,
                path,
                f"numeric field {field!r} requires a numeric value",
            )
    else:
        if not isinstance(value, str):
            raise FilterError(
                FilterErrorKind.TYPE_MISMATCH,
                path,
                f"categorical field {field!r} requires a text value",
            )
    return Cmp(field, op, value)


_MISSING = object()


def _eq_value(record_value, target) -> bool:
    if isinstance(target, str):
        return isinstance(record_value, str) and record_value == target
    return _is_number(record_value) and record_value == target


def evaluate(expr: FilterExpr, record: Mapping) -> bool:
    """Does the record's metadata satisfy the filter?

    Total function: never raises for a filter validated against the same
    schema that governs the record. A field absent from the record fails
    every comparison on it, including $ne and $nin — a food with no
    measurement must not satisfy a constraint on that measurement.
    """
    if isinstance(expr, MatchAll):
        return True
    if isinstance(expr, And):
        return all(evaluate(c, record) for c in expr.clauses)
    if isinstance(expr, Or):
        return any(evaluate(c, record) for c in expr.clauses)

    value = record.get(expr.field, _MISSING)
    if value is _MISSING:
        return False
    op = expr.op
    target = expr.value
    if op is Op.EQ:
        return _eq_value(value, target)
    if op is Op.NE:
        return not _eq_value(value, target)
    if op is Op.IN:
        return any(_eq_value(value, t) for t in target)
    if op is Op.NIN:
        return not any(_eq_value(value, t) for t in target)
    # range operators
    if not _is_number(value):
        return False
    if op is Op.GT:
        return value > target
    if op is Op.GTE:
        return value >= target
    if op is Op.LT:
        return value < target
    return value <= target  # Op.LTE


def is_food_group_only(expr: FilterExpr) -> bool:
    """True when the filter constrains nothing but the food group (EQ/IN)."""
    if isinstance(expr, Cmp):
        return expr.field == FOOD_GROUP_FIELD and expr.op in (Op.EQ, Op.IN)
    if isinstance(expr, (And, Or)):
        return all(is_food_group_only(c) for c in expr.clauses)
    return False


def loose_projection(expr: FilterExpr) -> FilterExpr:
    """Project a filter onto its food-group constraints.

    Identity on filters that already reference only the food group. For a
    conjunction, keeps the food-group clauses (so the projection's matches
    are a superset of the original's). Anything else — including a
    disjunction that mixes food-group and other constraints — projects to
    MatchAll, the only sound widening.
    """
    if is_food_group_only(expr):
        return expr
    if isinstance(expr, And):
        kept = [c for c in expr.clauses if is_food_group_only(c)]
        if not kept:
            return MATCH_ALL
        if len(kept) == 1:
            return kept[0]
        return And(tuple(kept))
    return MATCH_ALL


def to_document(expr: FilterExpr) -> dict:
    """Serialize a filter back to its JSON-object document form.

    Always uses the explicit operator spelling; round-trips through
    parse_filter to a structurally equal expression.
    """
    if isinstance(expr, MatchAll):
        return {}
    if isinstance(expr, And):
        return {"$and": [to_document(c) for c in expr.clauses]}
    if isinstance(expr, Or):
        return {"$or": [to_document(c) for c in expr.clauses]}
    value = list(expr.value) if isinstance(expr.value, tuple) else expr.value
    return {expr.field: {expr.op.value: value}}


def dumps_filter(expr: FilterExpr) -> str:
    return json.dumps(to_document(expr), ensure_ascii=False)
