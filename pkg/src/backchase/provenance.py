"""Semiring annotations: polynomials, witness bases, where-sets, side tables.

Polynomials live in the commutative semiring N[X] over tuple ids: ``+`` records
alternative derivations, ``*`` joint use.  Canonical form keeps monomials
sorted with like monomials merged; textual form is ``r1*s1 + 2*r3``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import ProvenanceError, ValidationError
from .model import Instance, TupleId, Value, value_from_json, value_to_json

Monomial = tuple[TupleId, ...]  # sorted id multiset

MODES = ("none", "where", "why", "how")


def check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ValidationError(f"unknown provenance mode {mode!r}; pick one of {MODES}")
    return mode


def monomial(ids: Iterable[TupleId]) -> Monomial:
    return tuple(sorted(ids, key=lambda t: t.sort_key()))


def _mono_key(m: Monomial) -> tuple:
    return tuple(t.sort_key() for t in m)


@dataclass(frozen=True)
class Polynomial:
    """Canonical semiring polynomial: sorted (monomial, coefficient) pairs."""

    terms: tuple[tuple[Monomial, int], ...]

    @classmethod
    def zero(cls) -> "Polynomial":
        return cls(())

    @classmethod
    def one(cls) -> "Polynomial":
        return cls((((), 1),))

    @classmethod
    def of(cls, *ids: TupleId) -> "Polynomial":
        return cls(((monomial(ids), 1),))

    @classmethod
    def build(cls, terms: Iterable[tuple[Monomial, int]]) -> "Polynomial":
        acc: dict[Monomial, int] = {}
        for mono, coeff in terms:
            if coeff:
                mono = monomial(mono)
                acc[mono] = acc.get(mono, 0) + coeff
        cleaned = [(m, c) for m, c in acc.items() if c != 0]
        cleaned.sort(key=lambda mc: _mono_key(mc[0]))
        return cls(tuple(cleaned))

    def is_zero(self) -> bool:
        return not self.terms

    def monomials(self) -> Iterator[tuple[Monomial, int]]:
        return iter(self.terms)

    def eval_all_ones(self) -> int:
        return sum(c for _, c in self.terms)

    def ids(self) -> frozenset[TupleId]:
        return frozenset(t for m, _ in self.terms for t in m)


def poly_add(a: Polynomial, b: Polynomial) -> Polynomial:
    return Polynomial.build(list(a.terms) + list(b.terms))


def poly_mul(a: Polynomial, b: Polynomial) -> Polynomial:
    out = []
    for ma, ca in a.terms:
        for mb, cb in b.terms:
            out.append((monomial(ma + mb), ca * cb))
    return Polynomial.build(out)


def format_polynomial(p: Polynomial) -> str:
    if p.is_zero():
        return "0"
    parts = []
    for mono, coeff in p.terms:
        ids = "*".join(str(t) for t in mono)
        if not ids:
            parts.append(str(coeff))
        elif coeff == 1:
            parts.append(ids)
        else:
            parts.append(f"{coeff}*{ids}")
    return " + ".join(parts)


def parse_polynomial(text: str) -> Polynomial:
    text = text.strip()
    if text == "0":
        return Polynomial.zero()
    terms = []
    for chunk in text.split("+"):
        coeff = 1
        ids: list[TupleId] = []
        factors = [f.strip() for f in chunk.split("*")]
        if not any(factors):
            raise ValidationError(f"malformed polynomial term {chunk!r}")
        for i, factor in enumerate(factors):
            if not factor:
                raise ValidationError(f"malformed polynomial term {chunk!r}")
            if i == 0 and factor.isdigit():
                coeff = int(factor)
            else:
                ids.append(TupleId.parse(factor))
        terms.append((monomial(ids), coeff))
    return Polynomial.build(terms)


# ---------------------------------------------------------------------------
# witness bases (why-provenance)

Witness = frozenset[TupleId]
WitnessBasis = frozenset[Witness]


def witness_basis(witnesses: Iterable[Iterable[TupleId]]) -> WitnessBasis:
    return frozenset(frozenset(w) for w in witnesses)


def to_witness_basis(p: Polynomial) -> WitnessBasis:
    """Project a polynomial onto its witness basis: one witness per monomial,
    coefficients and multiplicities dropped, duplicates merged."""
    return frozenset(frozenset(m) for m, _ in p.terms)


def merge_bases(a: WitnessBasis, b: WitnessBasis) -> WitnessBasis:
    return a | b


def basis_to_json(basis: WitnessBasis) -> list[list[str]]:
    return sorted(
        [sorted((str(t) for t in w), key=lambda s: TupleId.parse(s).sort_key())
         for w in basis]
    )


def basis_from_json(obj) -> WitnessBasis:
    return witness_basis([[TupleId.parse(s) for s in w] for w in obj])


# ---------------------------------------------------------------------------
# provenance stores

Annotation = Polynomial | WitnessBasis | frozenset  # how | why | where


@dataclass
class ProvenanceStore:
    """Per-target-fact annotations produced by one chase."""

    mode: str
    annotations: dict[TupleId, Annotation]

    def __post_init__(self):
        check_mode(self.mode)

    @classmethod
    def empty(cls, mode: str) -> "ProvenanceStore":
        return cls(mode, {})

    def annotation(self, tid: TupleId):
        return self.annotations.get(tid)

    def witnesses(self, tid: TupleId) -> WitnessBasis | None:
        """Witness basis for a fact, derivable in why and how modes."""
        ann = self.annotations.get(tid)
        if ann is None:
            return None
        if self.mode == "how":
            return to_witness_basis(ann)
        if self.mode == "why":
            return ann
        return None

    def relation_names(self, tid: TupleId) -> frozenset[str] | None:
        if self.mode != "where":
            return None
        return self.annotations.get(tid)

    def duplicate_count(self, tid: TupleId) -> int:
        """How many source derivations the fact folds together (1 if no
        annotation is held)."""
        ann = self.annotations.get(tid)
        if ann is None:
            return 1
        if self.mode == "how":
            return max(1, ann.eval_all_ones())
        if self.mode == "why":
            return max(1, len(ann))
        raise ProvenanceError(
            f"{self.mode}-provenance cannot count merged derivations"
        )


def store_to_json(store: ProvenanceStore) -> dict:
    ann: dict[str, object] = {}
    for tid in sorted(store.annotations, key=lambda t: t.sort_key()):
        value = store.annotations[tid]
        if store.mode == "how":
            ann[str(tid)] = format_polynomial(value)
        elif store.mode == "why":
            ann[str(tid)] = basis_to_json(value)
        elif store.mode == "where":
            ann[str(tid)] = sorted(value)
    return {"mode": store.mode, "annotations": ann}


def store_from_json(obj) -> ProvenanceStore:
    mode = check_mode(obj.get("mode", "none"))
    annotations: dict[TupleId, Annotation] = {}
    for key, value in obj.get("annotations", {}).items():
        tid = TupleId.parse(key)
        if mode == "how":
            annotations[tid] = parse_polynomial(value)
        elif mode == "why":
            annotations[tid] = basis_from_json(value)
        elif mode == "where":
            annotations[tid] = frozenset(value)
    return ProvenanceStore(mode, annotations)


# ---------------------------------------------------------------------------
# side tables


@dataclass(frozen=True)
class SideTableSpec:
    """What to persist next to a chase result.

    ``dangling``: full rows of ``relation`` that matched no trigger of the
    mapping.  ``projection``: the named attributes of every row, keyed by
    tuple id (an empty attribute list keeps ids only, preserving cardinality).
    """

    name: str
    relation: str
    kind: str  # "dangling" | "projection"
    attributes: tuple[str, ...]

    def __post_init__(self):
        if self.kind not in ("dangling", "projection"):
            raise ValidationError(f"unknown side table kind {self.kind!r}")


@dataclass(frozen=True)
class SideRow:
    ref: TupleId
    values: tuple[Value, ...]


@dataclass(frozen=True)
class SideTable:
    name: str
    attributes: tuple[str, ...]
    rows: tuple[SideRow, ...]

    def lookup(self, ref: TupleId) -> SideRow | None:
        for row in self.rows:
            if row.ref == ref:
                return row
        return None


def build_side_table(source: Instance, spec: SideTableSpec,
                     matched_ids: frozenset[TupleId] | None = None) -> SideTable:
    """Materialize a side table from the chase-phase source instance.

    For ``dangling`` specs the caller supplies the set of tuple ids that
    participated in at least one trigger; rows are the relation's remaining
    tuples.  For ``projection`` specs every row is projected onto the spec's
    attributes.
    """
    rel = source.schema.relation(spec.relation)
    if spec.kind == "dangling":
        if matched_ids is None:
            raise ValidationError("dangling side tables need the matched-id set")
        rows = tuple(
            SideRow(f.id, f.values)
            for f in source.facts(rel.name)
            if f.id not in matched_ids
        )
        return SideTable(spec.name, rel.attributes, rows)
    positions = [rel.position(a) for a in spec.attributes]
    rows = tuple(
        SideRow(f.id, tuple(f.values[p] for p in positions))
        for f in source.facts(rel.name)
    )
    return SideTable(spec.name, spec.attributes, rows)


def side_table_to_json(table: SideTable) -> dict:
    return {
        "name": table.name,
        "attributes": list(table.attributes),
        "rows": [
            {"ref": str(r.ref), "values": [value_to_json(v) for v in r.values]}
            for r in table.rows
        ],
    }


def side_table_from_json(obj) -> SideTable:
    try:
        return SideTable(
            obj["name"],
            tuple(obj["attributes"]),
            tuple(
                SideRow(
                    TupleId.parse(r["ref"]),
                    tuple(value_from_json(v) for v in r["values"]),
                )
                for r in obj.get("rows", [])
            ),
        )
    except (TypeError, KeyError) as exc:
        raise ValidationError(f"malformed side table JSON: {obj!r}") from exc
