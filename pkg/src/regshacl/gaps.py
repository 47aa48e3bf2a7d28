"""Per-alternative diagnosis of unmet requirements for one focus node.

A node shape is flattened into atoms: every non-logical constraint, plus
each nested ``sh:or`` and ``sh:not`` counted as a single atom. ``sh:and``,
``sh:node`` and ``sh:property`` edges are flattened through. The first
``sh:or`` met at the top of the shape supplies the alternatives; anything
outside it is a common requirement.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from typing import Optional

from .rdf import Graph, Iri, PrefixMap, Term, display, local_name
from .shapes import (
    And,
    ClassConstraint,
    Constraint,
    Datatype,
    HasValue,
    MaxCount,
    MinCount,
    Not,
    NodeRef,
    Or,
    PropertyRef,
    Range,
    Shape,
    ShapesGraph,
)
from .validate import Validator


@dataclass
class Gap:
    source_shape: str
    path: Optional[Iri]
    component: str
    requirement: str
    observed: list[Term]
    constraint: Optional[Constraint] = field(default=None, repr=False, compare=False)
    # populated for a nested sh:or atom: its own branches, best first
    alternatives: list["AlternativeDiagnosis"] = field(default_factory=list)


@dataclass
class AlternativeDiagnosis:
    branch_index: int
    order_tag: Optional[Decimal]
    gaps: list[Gap]
    satisfied_count: int
    total_count: int
    shape: str = ""


@dataclass
class GapReport:
    focus_node: Term
    shape: str
    conforms: bool
    common_gaps: list[Gap]
    alternatives: list[AlternativeDiagnosis]
    common_total: int = 0


@dataclass
class _Atom:
    shape: Shape
    constraint: Constraint


class _Diagnoser:
    def __init__(self, shapes: ShapesGraph, data: Graph, prefixes: Optional[PrefixMap] = None):
        self.shapes = shapes
        self.validator = Validator(shapes, data, prefixes)
        self.prefixes = prefixes or shapes.prefixes

    def atoms(self, shape: Shape, split_first_or: bool = False):
        """Flatten ``shape`` into atoms; optionally pull out the first Or."""
        out: list[_Atom] = []
        found: list[Optional[Or]] = [None]

        def walk(s: Shape) -> None:
            for c in s.constraints:
                if isinstance(c, And) and not s.is_property:
                    for m in c.members:
                        walk(self.shapes[m])
                elif isinstance(c, NodeRef) and not s.is_property:
                    walk(self.shapes[c.member])
                elif isinstance(c, PropertyRef) and not s.is_property:
                    walk(self.shapes[c.member])
                elif isinstance(c, Or) and split_first_or and found[0] is None and not s.is_property:
                    found[0] = c
                else:
                    out.append(_Atom(s, c))

        walk(shape)
        return out, found[0]

    def gap_for(self, atom: _Atom, focus: Term) -> Optional[Gap]:
        shape, c = atom.shape, atom.constraint
        observed = self.validator.value_nodes(shape, focus)
        if isinstance(c, Or) and not shape.is_property:
            branches = self.rank(self.branches(c, focus))
            if any(not b.gaps for b in branches):
                return None
            return Gap(shape.id, shape.path, c.component, self.requirement(shape, c), [], c, branches)
        if not self.validator.evaluate(shape, c, focus):
            return None
        return Gap(shape.id, shape.path, c.component, self.requirement(shape, c), list(observed), c)

    def requirement(self, shape: Shape, c: Constraint) -> str:
        text = c.describe(self.prefixes)
        if isinstance(c, Or):
            text = f"one of {len(c.members)} alternatives"
        if shape.path is not None:
            text += f" on {display(shape.path, self.prefixes)}"
        return text

    def diagnose_branch(self, index: int, member: Shape, focus: Term) -> AlternativeDiagnosis:
        atoms, _ = self.atoms(member)
        gaps = [g for g in (self.gap_for(a, focus) for a in atoms) if g is not None]
        return AlternativeDiagnosis(
            branch_index=index,
            order_tag=self.order_tag(member),
            gaps=gaps,
            satisfied_count=len(atoms) - len(gaps),
            total_count=len(atoms),
            shape=member.id,
        )

    def branches(self, c: Or, focus: Term) -> list[AlternativeDiagnosis]:
        return [self.diagnose_branch(i, self.shapes[m], focus) for i, m in enumerate(c.members)]

    def order_tag(self, shape: Shape) -> Optional[Decimal]:
        """sh:order of the branch shape, else the smallest one among its flattened parts."""
        if shape.order is not None:
            return shape.order
        tags = []
        seen = set()

        def walk(s: Shape) -> None:
            if s.id in seen:
                return
            seen.add(s.id)
            if s.order is not None:
                tags.append(s.order)
            for c in s.constraints:
                if isinstance(c, (And, NodeRef, PropertyRef)):
                    for m in (c.members if isinstance(c, And) else (c.member,)):
                        walk(self.shapes[m])

        walk(shape)
        return min(tags) if tags else None

    @staticmethod
    def rank(alternatives: list[AlternativeDiagnosis]) -> list[AlternativeDiagnosis]:
        return rank(alternatives)


def rank(alternatives: list[AlternativeDiagnosis]) -> list[AlternativeDiagnosis]:
    """Fewest gaps first; ties by order tag (untagged last), then branch index."""
    return sorted(
        alternatives,
        key=lambda a: (len(a.gaps), a.order_tag is None, a.order_tag or 0, a.branch_index),
    )


def diagnose(shapes: ShapesGraph, shape_id: str, focus: Term, data: Graph,
             prefixes: Optional[PrefixMap] = None) -> GapReport:
    """Gap report for ``focus`` against node shape ``shape_id``.

    ``focus`` need not be a target of the shape.
    """
    shape = shapes[shape_id]
    d = _Diagnoser(shapes, data, prefixes)
    atoms, top_or = d.atoms(shape, split_first_or=True)
    common = [g for g in (d.gap_for(a, focus) for a in atoms) if g is not None]
    alternatives = d.rank(d.branches(top_or, focus)) if top_or is not None else []
    satisfied_alt = top_or is None or any(not a.gaps for a in alternatives)
    return GapReport(
        focus_node=focus,
        shape=shape.id,
        conforms=not common and satisfied_alt,
        common_gaps=common,
        alternatives=alternatives,
        common_total=len(atoms),
    )


def _name(term: Optional[Term], prefixes: Optional[PrefixMap]) -> str:
    if term is None:
        return "the focus node"
    if isinstance(term, Iri):
        if prefixes is not None and prefixes.compact(term):
            return prefixes.compact(term)
        return local_name(term)
    return display(term, prefixes)


def _shape_name(shape_id: str, prefixes: Optional[PrefixMap]) -> str:
    if shape_id.startswith("_:"):
        return shape_id
    return _name(Iri(shape_id), prefixes)


def _values(values: list[Term], prefixes) -> str:
    return ", ".join(_name(v, prefixes) if isinstance(v, Iri) else display(v, prefixes) for v in values)


def explain(gap: Gap, prefixes: Optional[PrefixMap] = None) -> str:
    """One deterministic sentence describing ``gap`` for end users."""
    c = gap.constraint
    path = _name(gap.path, prefixes)
    found = _values(gap.observed, prefixes) if gap.observed else "none"
    if isinstance(c, MinCount):
        if not gap.observed:
            return f"{path} is missing: at least {c.n} value(s) required, none found."
        return f"{path} needs at least {c.n} value(s), found {len(gap.observed)} ({found})."
    if isinstance(c, MaxCount):
        return f"{path} allows at most {c.n} value(s), found {len(gap.observed)} ({found})."
    if isinstance(c, HasValue):
        return f"{path} must include {_name(c.value, prefixes)}, which is missing (found: {found})."
    if isinstance(c, Range):
        symbol = {"minInclusive": ">=", "maxInclusive": "<=", "minExclusive": ">", "maxExclusive": "<"}[c.relation]
        if not gap.observed:
            return f"{path} must be {symbol} {c.bound.lexical}, but no value is present."
        return f"{path} must be {symbol} {c.bound.lexical}, found {found}."
    if isinstance(c, Datatype):
        return f"{path} must have datatype {_name(c.datatype, prefixes)}, found {found}."
    if isinstance(c, ClassConstraint):
        return f"{path} must be an instance of {_name(c.cls, prefixes)}, found {found}."
    if isinstance(c, Or):
        options = ", ".join(_shape_name(a.shape, prefixes) for a in sorted(gap.alternatives, key=lambda a: a.branch_index))
        where = f" for {path}" if gap.path is not None else ""
        text = f"None of the {len(c.members)} alternatives{where} is met ({options})."
        best = gap.alternatives[0] if gap.alternatives else None
        if best is not None and best.gaps:
            lacks = "; ".join(explain(g, prefixes).rstrip(".") for g in best.gaps)
            text += f" Closest is {_shape_name(best.shape, prefixes)}, which lacks: {lacks}."
        return text
    if isinstance(c, Not):
        return f"{path} must not conform to {gap.source_shape}, but it does."
    if isinstance(c, (And, NodeRef, PropertyRef)):
        return f"{path} does not meet {gap.requirement} (found: {found})."
    return f"{path}: {gap.requirement} not met (found: {found})."
