"""Relational core: constants, labeled nulls, tuple ids, schemas and instances.

Instances are immutable once built.  Relations hold (tuple-id, value vector)
entries, so two entries may carry equal value vectors while remaining distinct
facts; all duplicate bookkeeping in the rest of the package relies on that.

Constants come in three kinds derived from their lexical form: ``integer``
(canonical ``-?[0-9]+``), ``decimal`` (canonical form always keeps at least one
fraction digit, trailing zeros stripped) and ``text`` (everything else).
Decimals are kept as exact scaled integers internally, never floats, so
arithmetic such as ``1.7 + 3.3 = 5.0`` is bit-stable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import SchemaMismatch, ValidationError

TEXT = "text"
INTEGER = "integer"
DECIMAL = "decimal"

_INT_RE = re.compile(r"[+-]?[0-9]+\Z")
_DEC_RE = re.compile(r"[+-]?[0-9]+\.[0-9]+\Z")
_ID_RE = re.compile(r"(?P<tag>.*?)(?P<ord>[0-9]+)\Z")


# ---------------------------------------------------------------------------
# values


@dataclass(frozen=True)
class Constant:
    lexical: str
    kind: str

    def __repr__(self) -> str:
        return f"Constant({self.lexical!r})"


@dataclass(frozen=True)
class Null:
    label: int

    def __repr__(self) -> str:
        return f"Null({self.label})"


Value = Constant | Null


def _canon_decimal(lexical: str) -> str:
    negative = lexical.startswith("-")
    digits = lexical.lstrip("+-")
    whole, frac = digits.split(".")
    whole = whole.lstrip("0") or "0"
    frac = frac.rstrip("0") or "0"
    if whole == "0" and frac == "0":
        negative = False
    return ("-" if negative else "") + whole + "." + frac


def const(lexical: str) -> Constant:
    """Build a constant, deriving its kind from the lexical form and
    canonicalizing (leading zeros, signs, trailing decimal zeros)."""
    if not isinstance(lexical, str):
        raise ValidationError(f"constant lexical must be a string, got {lexical!r}")
    if _INT_RE.match(lexical):
        return Constant(str(int(lexical)), INTEGER)
    if _DEC_RE.match(lexical):
        return Constant(_canon_decimal(lexical), DECIMAL)
    return Constant(lexical, TEXT)


def null(label: int) -> Null:
    if not isinstance(label, int) or label < 1:
        raise ValidationError(f"null label must be a positive integer, got {label!r}")
    return Null(label)


def numeric_value(value: Constant) -> Fraction:
    if value.kind == INTEGER:
        return Fraction(int(value.lexical))
    if value.kind == DECIMAL:
        whole, frac = value.lexical.split(".")
        sign = -1 if whole.startswith("-") else 1
        whole = whole.lstrip("-")
        return sign * (Fraction(int(whole)) + Fraction(int(frac), 10 ** len(frac)))
    raise ValidationError(f"not a numeric constant: {value!r}")


def value_sort_key(value: Value) -> tuple:
    """Total order used for canonical instance layout: constants before
    nulls, constants by canonical lexical, nulls by label."""
    if isinstance(value, Constant):
        return (0, value.lexical)
    return (1, value.label)


_KIND_RANK = {INTEGER: 0, DECIMAL: 1}


def constant_order_key(value: Constant) -> tuple:
    """Total order used by comparison conditions.  Numeric kinds compare by
    rational value (kind breaks exact ties, so ``5 < 5.0`` while ``5 = 5.0``
    is false); text compares lexicographically; numerics sort before text."""
    if value.kind in _KIND_RANK:
        return (0, numeric_value(value), _KIND_RANK[value.kind], value.lexical)
    return (1, value.lexical, 0, "")


# ---------------------------------------------------------------------------
# tuple identifiers


@dataclass(frozen=True)
class TupleId:
    tag: str
    ordinal: int

    def __str__(self) -> str:
        return f"{self.tag}{self.ordinal}"

    def __repr__(self) -> str:
        return f"TupleId({str(self)!r})"

    def sort_key(self) -> tuple[str, int]:
        return (self.tag, self.ordinal)

    @classmethod
    def parse(cls, text: str) -> "TupleId":
        m = _ID_RE.match(text)
        if not m or not m.group("ord"):
            raise ValidationError(f"malformed tuple id {text!r}; expected <tag><ordinal>")
        return cls(m.group("tag"), int(m.group("ord")))


class NullAllocator:
    """Hands out strictly increasing null labels for one pipeline run."""

    def __init__(self, start_after: int = 0):
        self._last = start_after

    def fresh(self) -> Null:
        self._last += 1
        return Null(self._last)

    @property
    def last(self) -> int:
        return self._last


class IdAllocator:
    """Hands out tuple ids per tag; never reuses an ordinal within a run."""

    def __init__(self):
        self._last: dict[str, int] = {}

    def reserve(self, tid: TupleId) -> None:
        if tid.ordinal > self._last.get(tid.tag, 0):
            self._last[tid.tag] = tid.ordinal

    def fresh(self, tag: str) -> TupleId:
        nxt = self._last.get(tag, 0) + 1
        self._last[tag] = nxt
        return TupleId(tag, nxt)


def relation_tag(name: str) -> str:
    return name.lower()


# ---------------------------------------------------------------------------
# schemas


@dataclass(frozen=True)
class RelationSchema:
    name: str
    attributes: tuple[str, ...]

    def __post_init__(self):
        if not self.name:
            raise ValidationError("relation name must be nonempty")
        if len(set(self.attributes)) != len(self.attributes):
            raise ValidationError(f"duplicate attribute in relation {self.name}")

    @property
    def arity(self) -> int:
        return len(self.attributes)

    def position(self, attribute: str) -> int:
        try:
            return self.attributes.index(attribute)
        except ValueError:
            raise ValidationError(
                f"relation {self.name} has no attribute {attribute!r}"
            ) from None


@dataclass(frozen=True)
class Schema:
    relations: tuple[RelationSchema, ...]

    def __post_init__(self):
        names = [r.name for r in self.relations]
        if len(set(names)) != len(names):
            raise ValidationError("duplicate relation name in schema")

    @classmethod
    def of(cls, *relations: RelationSchema) -> "Schema":
        return cls(tuple(relations))

    def names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.relations)

    def has(self, name: str) -> bool:
        return any(r.name == name for r in self.relations)

    def relation(self, name: str) -> RelationSchema:
        for r in self.relations:
            if r.name == name:
                return r
        raise ValidationError(f"schema has no relation {name!r}")

    def replacing(self, *changes: RelationSchema, drop: Iterable[str] = (),
                  add: Iterable[RelationSchema] = ()) -> "Schema":
        dropped = set(drop)
        by_name = {c.name: c for c in changes}
        out = [by_name.get(r.name, r) for r in self.relations if r.name not in dropped]
        out.extend(add)
        return Schema(tuple(out))


def schemas_equal(a: Schema, b: Schema) -> bool:
    return sorted(a.relations, key=lambda r: r.name) == sorted(
        b.relations, key=lambda r: r.name
    )


# ---------------------------------------------------------------------------
# instances


@dataclass(frozen=True)
class Fact:
    id: TupleId
    values: tuple[Value, ...]


class Instance:
    """A database instance: per-relation collections of identified facts."""

    __slots__ = ("schema", "_facts")

    def __init__(self, schema: Schema, facts: Mapping[str, Sequence[Fact]]):
        self.schema = schema
        stored: dict[str, tuple[Fact, ...]] = {}
        seen_ids: set[TupleId] = set()
        for rel in schema.relations:
            entries = tuple(facts.get(rel.name, ()))
            for fact in entries:
                if len(fact.values) != rel.arity:
                    raise ValidationError(
                        f"fact {fact.id} has arity {len(fact.values)}, "
                        f"relation {rel.name} expects {rel.arity}"
                    )
                if fact.id in seen_ids:
                    raise ValidationError(f"duplicate tuple id {fact.id} in instance")
                seen_ids.add(fact.id)
            stored[rel.name] = entries
        unknown = set(facts) - set(stored)
        if unknown:
            raise ValidationError(f"facts for relations not in schema: {sorted(unknown)}")
        self._facts = stored

    def facts(self, relation: str) -> tuple[Fact, ...]:
        if relation not in self._facts:
            raise ValidationError(f"instance has no relation {relation!r}")
        return self._facts[relation]

    def iter_facts(self) -> Iterator[tuple[str, Fact]]:
        for rel in self.schema.relations:
            for fact in self._facts[rel.name]:
                yield rel.name, fact

    def size(self) -> int:
        return sum(len(v) for v in self._facts.values())

    def all_ids(self) -> Iterator[TupleId]:
        for _, fact in self.iter_facts():
            yield fact.id

    def max_null_label(self) -> int:
        best = 0
        for _, fact in self.iter_facts():
            for v in fact.values:
                if isinstance(v, Null) and v.label > best:
                    best = v.label
        return best

    def has_nulls(self) -> bool:
        return any(
            isinstance(v, Null) for _, f in self.iter_facts() for v in f.values
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        return self.schema == other.schema and self._facts == other._facts

    def __repr__(self) -> str:
        rels = ", ".join(f"{r}:{len(self._facts[r])}" for r in self.schema.names())
        return f"Instance({rels})"


def empty_instance(schema: Schema) -> Instance:
    return Instance(schema, {})


def seed_allocators(*instances: Instance) -> tuple[NullAllocator, IdAllocator]:
    nulls = NullAllocator(max((i.max_null_label() for i in instances), default=0))
    ids = IdAllocator()
    for inst in instances:
        for tid in inst.all_ids():
            ids.reserve(tid)
    return nulls, ids


# ---------------------------------------------------------------------------
# normalization and equality


def _fact_key(fact: Fact) -> tuple:
    return (tuple(value_sort_key(v) for v in fact.values), fact.id.sort_key())


def _normal_pass(instance: Instance) -> Instance:
    relabel: dict[int, int] = {}
    ordered: list[tuple[RelationSchema, list[Fact]]] = []
    for rel in sorted(instance.schema.relations, key=lambda r: r.name):
        facts = sorted(instance.facts(rel.name), key=_fact_key)
        for fact in facts:
            for v in fact.values:
                if isinstance(v, Null) and v.label not in relabel:
                    relabel[v.label] = len(relabel) + 1
        ordered.append((rel, facts))
    out: dict[str, list[Fact]] = {}
    for rel, facts in ordered:
        out[rel.name] = [
            Fact(
                f.id,
                tuple(
                    Null(relabel[v.label]) if isinstance(v, Null) else v
                    for v in f.values
                ),
            )
            for f in facts
        ]
    schema = Schema(tuple(rel for rel, _ in ordered))
    return Instance(schema, out)


def _instance_key(instance: Instance) -> tuple:
    return tuple(
        (
            rel.name,
            rel.attributes,
            tuple((f.id.sort_key(), tuple(value_sort_key(v) for v in f.values))
                  for f in instance.facts(rel.name)),
        )
        for rel in instance.schema.relations
    )


def normalize(instance: Instance) -> Instance:
    """Canonical form: relations sorted by name, facts sorted by value vector
    then id, null labels renumbered 1..k in first-occurrence order.

    Sorting keys involve null labels, and relabeling can in turn perturb the
    sort, so the pass is iterated to a fixpoint; should the iteration ever
    cycle, the lexicographically least state of the cycle is returned, which
    keeps the function deterministic and idempotent.
    """
    seen: dict[tuple, int] = {}
    states: list[Instance] = []
    cur = instance
    while True:
        key = _instance_key(cur)
        if key in seen:
            cycle = states[seen[key]:]
            return min(cycle, key=_instance_key)
        seen[key] = len(states)
        states.append(cur)
        cur = _normal_pass(cur)


def require_same_schema(a: Instance, b: Instance) -> None:
    if not schemas_equal(a.schema, b.schema):
        raise SchemaMismatch(
            f"instances are not comparable: schemas {a.schema.names()} "
            f"vs {b.schema.names()}"
        )


def instances_equal(a: Instance, b: Instance) -> bool:
    """True iff the normalized instances carry identical value-vector
    multisets per relation.  Tuple ids are ignored; null labels are compared
    after each side's independent canonical renumbering, so ground instances
    compare literally and null-bearing instances compare up to relabeling."""
    require_same_schema(a, b)
    na, nb = normalize(a), normalize(b)
    for rel in na.schema.names():
        va = [f.values for f in na.facts(rel)]
        vb = [f.values for f in nb.facts(rel)]
        if va != vb:
            return False
    return True


# ---------------------------------------------------------------------------
# JSON form (the bit-exact instance exchange format)


def value_to_json(value: Value) -> dict:
    if isinstance(value, Constant):
        return {"const": value.lexical}
    return {"null": value.label}


def value_from_json(obj) -> Value:
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ValidationError(f"malformed value {obj!r}")
    if "const" in obj:
        return const(obj["const"])
    if "null" in obj:
        label = obj["null"]
        if not isinstance(label, int):
            raise ValidationError(f"null label must be an integer, got {label!r}")
        return null(label)
    raise ValidationError(f"malformed value {obj!r}")


def instance_to_json(instance: Instance) -> dict:
    return {
        "relations": [
            {
                "name": rel.name,
                "attributes": list(rel.attributes),
                "tuples": [
                    {"id": str(f.id), "values": [value_to_json(v) for v in f.values]}
                    for f in instance.facts(rel.name)
                ],
            }
            for rel in instance.schema.relations
        ]
    }


def instance_from_json(obj) -> Instance:
    if not isinstance(obj, dict) or "relations" not in obj:
        raise ValidationError("instance JSON must be an object with a 'relations' list")
    rels = []
    facts: dict[str, list[Fact]] = {}
    for rel_obj in obj["relations"]:
        try:
            name = rel_obj["name"]
            attributes = tuple(rel_obj["attributes"])
            tuples = rel_obj.get("tuples", [])
        except (TypeError, KeyError) as exc:
            raise ValidationError(f"malformed relation entry: {rel_obj!r}") from exc
        rels.append(RelationSchema(name, attributes))
        entries = []
        for t in tuples:
            tid = TupleId.parse(t["id"])
            entries.append(Fact(tid, tuple(value_from_json(v) for v in t["values"])))
        facts[name] = entries
    return Instance(Schema(tuple(rels)), facts)
