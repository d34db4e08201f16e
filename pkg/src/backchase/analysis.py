"""Homomorphism search and classification of reconstructions.

A homomorphism maps labeled nulls to constants or nulls (constants are rigid)
such that every fact of the domain instance lands, by value vector, on a fact
of the codomain instance.  Classification checks a reconstruction against the
original through a five-level lattice, strongest first:

=================== =========================================================
exact               identical instances (canonical comparison)
classical           equal up to a bijective renaming of nulls
tp_relaxed          homomorphism into the original, equal fact count,
                    exchange-equivalent
relaxed             homomorphism into the original, exchange-equivalent
result_equivalent   exchange-equivalent only
=================== =========================================================

Exchange equivalence chases both instances through the mapping and asks for
homomorphisms in both directions between the results.  Function terms in
heads are abstracted to fresh existential placeholders for this check, so
equivalence is judged on derivation structure rather than computed values
(otherwise any inverse that reintroduces nulls into function inputs could
never qualify).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable

from .chase import chase
from .functions import FunctionRegistry
from .model import (
    Constant,
    Fact,
    Instance,
    Null,
    Value,
    instances_equal,
    require_same_schema,
    value_sort_key,
)
from .tgds import Atom, FunctionTerm, SchemaMapping, StTgd, Term, Variable


class InverseType(enum.Enum):
    EXACT = "exact"
    CLASSICAL = "classical"
    TP_RELAXED = "tp_relaxed"
    RELAXED = "relaxed"
    RESULT_EQUIVALENT = "result_equivalent"
    NONE = "none"


_STRENGTH = {
    InverseType.EXACT: 5,
    InverseType.CLASSICAL: 4,
    InverseType.TP_RELAXED: 3,
    InverseType.RELAXED: 2,
    InverseType.RESULT_EQUIVALENT: 1,
    InverseType.NONE: 0,
}


def strength(t: InverseType) -> int:
    return _STRENGTH[t]


def at_least(achieved: InverseType, predicted: InverseType) -> bool:
    return strength(achieved) >= strength(predicted)


def weakest(types: Iterable[InverseType]) -> InverseType:
    """Minimum of the strength order; an empty sequence is vacuously exact."""
    out = InverseType.EXACT
    for t in types:
        if strength(t) < strength(out):
            out = t
    return out


@dataclass(frozen=True)
class Homomorphism:
    mapping: dict[int, Value]

    def apply(self, value: Value) -> Value:
        if isinstance(value, Null):
            return self.mapping.get(value.label, value)
        return value


def verify_homomorphism(hom: Homomorphism, src: Instance, dst: Instance) -> bool:
    for rel in src.schema.names():
        targets = {f.values for f in dst.facts(rel)}
        for fact in src.facts(rel):
            if tuple(hom.apply(v) for v in fact.values) not in targets:
                return False
    return True


def find_homomorphism(src: Instance, dst: Instance) -> Homomorphism | None:
    """Backtracking search for a homomorphism ``src -> dst``.

    The decision (found / not found) is deterministic; the witness mapping is
    whatever the search finds first.  Facts with the fewest nulls are placed
    first so constants prune early.
    """
    require_same_schema(src, dst)
    pending: list[tuple[str, Fact]] = []
    for rel in src.schema.names():
        for fact in src.facts(rel):
            pending.append((rel, fact))
    pending.sort(
        key=lambda rf: (
            sum(1 for v in rf[1].values if isinstance(v, Null)),
            rf[0],
            tuple(value_sort_key(v) for v in rf[1].values),
            rf[1].id.sort_key(),
        )
    )
    candidates = {
        rel: sorted(
            (f.values for f in dst.facts(rel)),
            key=lambda vs: tuple(value_sort_key(v) for v in vs),
        )
        for rel in dst.schema.names()
    }

    def assign(i: int, binding: dict[int, Value]) -> dict[int, Value] | None:
        if i == len(pending):
            return binding
        rel, fact = pending[i]
        for target in candidates[rel]:
            trial = dict(binding)
            ok = True
            for v, t in zip(fact.values, target):
                if isinstance(v, Constant):
                    if v != t:
                        ok = False
                        break
                else:
                    bound = trial.get(v.label)
                    if bound is None:
                        trial[v.label] = t
                    elif bound != t:
                        ok = False
                        break
            if ok:
                result = assign(i + 1, trial)
                if result is not None:
                    return result
        return None

    solution = assign(0, {})
    return Homomorphism(solution) if solution is not None else None


def isomorphic(a: Instance, b: Instance) -> bool:
    """Equality up to a bijective renaming of nulls: a one-to-one matching of
    facts per relation under a single null bijection."""
    require_same_schema(a, b)
    if not a.has_nulls() and not b.has_nulls():
        return instances_equal(a, b)
    rels = sorted(a.schema.names())
    for rel in rels:
        if len(a.facts(rel)) != len(b.facts(rel)):
            return False

    slots: list[tuple[str, Fact]] = [
        (rel, f) for rel in rels for f in a.facts(rel)
    ]

    def match(i: int, taken: dict[str, set[int]],
              fwd: dict[int, int], rev: dict[int, int]) -> bool:
        if i == len(slots):
            return True
        rel, fact = slots[i]
        for j, candidate in enumerate(b.facts(rel)):
            if j in taken[rel]:
                continue
            trial_fwd, trial_rev = dict(fwd), dict(rev)
            ok = True
            for v, t in zip(fact.values, candidate.values):
                if isinstance(v, Constant) or isinstance(t, Constant):
                    if v != t:
                        ok = False
                        break
                else:
                    if trial_fwd.get(v.label, t.label) != t.label:
                        ok = False
                        break
                    if trial_rev.get(t.label, v.label) != v.label:
                        ok = False
                        break
                    trial_fwd[v.label] = t.label
                    trial_rev[t.label] = v.label
            if ok:
                taken[rel].add(j)
                if match(i + 1, taken, trial_fwd, trial_rev):
                    return True
                taken[rel].remove(j)
        return False

    return match(0, {rel: set() for rel in rels}, {}, {})


# ---------------------------------------------------------------------------
# data exchange equivalence


def abstract_function_heads(mapping: SchemaMapping) -> SchemaMapping:
    """Replace every head function term with a fresh existential variable."""
    new_sigma = []
    for tgd in mapping.sigma:
        counter = 0
        changed = False
        new_head = []
        extra: set[str] = set()

        def rewrite(term: Term) -> Term:
            nonlocal counter, changed
            if isinstance(term, FunctionTerm):
                changed = True
                name = f"_f{counter}"
                counter += 1
                extra.add(name)
                return Variable(name)
            return term

        for atom in tgd.head:
            new_head.append(Atom(atom.relation, tuple(rewrite(t) for t in atom.terms)))
        if changed:
            new_sigma.append(
                StTgd(
                    body=tgd.body,
                    head=tuple(new_head),
                    conditions=tgd.conditions,
                    existential_vars=tgd.existential_vars | frozenset(extra),
                )
            )
        else:
            new_sigma.append(tgd)
    return SchemaMapping(mapping.source, mapping.target, tuple(new_sigma))


def data_exchange_equivalent(
    a: Instance,
    b: Instance,
    mapping: SchemaMapping,
    functions: FunctionRegistry | None = None,
) -> bool:
    """Chase both instances through the mapping (provenance off, independent
    fresh-null namespaces) and test homomorphic equivalence of the results."""
    require_same_schema(a, b)
    abstract = abstract_function_heads(mapping)
    ja, _ = chase(a, abstract, "none", functions)
    jb, _ = chase(b, abstract, "none", functions)
    if find_homomorphism(ja, jb) is None:
        return False
    return find_homomorphism(jb, ja) is not None


# ---------------------------------------------------------------------------
# classification


@dataclass(frozen=True)
class Classification:
    type: InverseType
    hom_forward: bool      # reconstructed -> original
    hom_backward: bool     # original -> reconstructed
    cardinality_equal: bool
    de_equivalent: bool

    def to_json(self) -> dict:
        return {
            "type": self.type.value,
            "hom_forward": self.hom_forward,
            "hom_backward": self.hom_backward,
            "cardinality_equal": self.cardinality_equal,
            "de_equivalent": self.de_equivalent,
        }


def classify_report(
    original: Instance,
    reconstructed: Instance,
    mapping: SchemaMapping,
    functions: FunctionRegistry | None = None,
) -> Classification:
    require_same_schema(original, reconstructed)
    hom_fwd = find_homomorphism(reconstructed, original) is not None
    hom_bwd = find_homomorphism(original, reconstructed) is not None
    card = reconstructed.size() == original.size()
    de = data_exchange_equivalent(original, reconstructed, mapping, functions)

    if instances_equal(reconstructed, original):
        t = InverseType.EXACT
    elif isomorphic(reconstructed, original):
        t = InverseType.CLASSICAL
    elif hom_fwd and card and de:
        t = InverseType.TP_RELAXED
    elif hom_fwd and de:
        t = InverseType.RELAXED
    elif de:
        t = InverseType.RESULT_EQUIVALENT
    else:
        t = InverseType.NONE
    return Classification(t, hom_fwd, hom_bwd, card, de)


def classify(
    original: Instance,
    reconstructed: Instance,
    mapping: SchemaMapping,
    functions: FunctionRegistry | None = None,
) -> InverseType:
    """Strongest inverse type whose condition holds for the pair."""
    return classify_report(original, reconstructed, mapping, functions).type
