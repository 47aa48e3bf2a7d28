"""Closed-world validation of a data graph against compiled shapes."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .rdf import (
    RDF,
    SH,
    SH_NS,
    XSD_BOOLEAN,
    BNode,
    Comparison,
    Graph,
    Iri,
    Literal,
    PrefixMap,
    Term,
    Triple,
    compare_literal,
    display,
    instances_of,
    is_instance,
)
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
    TargetClass,
    TargetNode,
)
from .turtle import Document

VIOLATION = "Violation"


@dataclass(frozen=True)
class ValidationResult:
    focus_node: Term
    result_path: Optional[Iri]
    value: Optional[Term]
    source_shape: str
    source_constraint_component: str
    message: str
    severity: str = VIOLATION
    constraint: Optional[Constraint] = field(default=None, compare=False, repr=False)

    def key(self) -> tuple:
        """Identity of a result for multiset comparisons."""
        return (self.focus_node, self.result_path, self.value, self.source_shape,
                self.source_constraint_component)


@dataclass
class ValidationReport:
    results: list[ValidationResult] = field(default_factory=list)

    @property
    def conforms(self) -> bool:
        return not self.results


def merge_graphs(graphs: Iterable[Graph]) -> Graph:
    merged = Graph()
    for g in graphs:
        merged.update(g)
    return merged.freeze()


def focus_nodes(shape: Shape, data: Graph) -> list[Term]:
    found: dict[Term, None] = {}
    for target in shape.targets:
        if isinstance(target, TargetClass):
            for node in instances_of(data, target.cls):
                found[node] = None
        elif isinstance(target, TargetNode):
            found[target.node] = None
    return list(found)


class Validator:
    """Evaluates shapes over one data graph.

    Logical constraints evaluate their members in check-only mode: inner
    failures decide the outcome but are never reported.
    """

    def __init__(self, shapes: ShapesGraph, data: Graph, prefixes: Optional[PrefixMap] = None):
        self.shapes = shapes
        self.data = data
        self.prefixes = prefixes or shapes.prefixes
        self._memo: dict[tuple[str, Term], bool] = {}

    def _show(self, term) -> str:
        return display(term, self.prefixes)

    # -- shape level ---------------------------------------------------

    def check_shape(self, shape: Shape, node: Term) -> list[ValidationResult]:
        if shape.is_property:
            return self.conforms_property(shape, node)
        return self.conforms_node(shape, node)

    def conforms(self, shape_id: str, node: Term) -> bool:
        key = (shape_id, node)
        if key not in self._memo:
            self._memo[key] = not self.check_shape(self.shapes[shape_id], node)
        return self._memo[key]

    def conforms_node(self, shape: Shape, focus: Term) -> list[ValidationResult]:
        assert not shape.is_property
        results = []
        for c in shape.constraints:
            results.extend(self.evaluate(shape, c, focus))
        return results

    def conforms_property(self, shape: Shape, focus: Term) -> list[ValidationResult]:
        assert shape.is_property
        results = []
        for c in shape.constraints:
            results.extend(self.evaluate(shape, c, focus))
        return results

    def value_nodes(self, shape: Shape, focus: Term) -> list[Term]:
        if shape.is_property:
            return self.data.objects(focus, shape.path)
        return [focus]

    # -- constraint level ------------------------------------------------

    def evaluate(self, shape: Shape, c: Constraint, focus: Term) -> list[ValidationResult]:
        """Results produced by one constraint of ``shape`` at ``focus``."""
        values = self.value_nodes(shape, focus)
        path = shape.path

        def result(value: Optional[Term], message: str) -> ValidationResult:
            return ValidationResult(focus, path, value, shape.id, c.component, message, constraint=c)

        where = self._show(path) if path is not None else "focus node"
        if isinstance(c, MinCount):
            if len(values) < c.n:
                return [result(None, f"{where}: expected at least {c.n} value(s), found {len(values)}")]
            return []
        if isinstance(c, MaxCount):
            if len(values) > c.n:
                return [result(None, f"{where}: expected at most {c.n} value(s), found {len(values)}")]
            return []
        if isinstance(c, HasValue):
            if c.value in values:
                return []
            return [result(None, f"{where}: required value {self._show(c.value)} is missing")]
        if isinstance(c, PropertyRef):
            member = self.shapes[c.member]
            out = []
            for v in values:
                out.extend(self.conforms_property(member, v))
            return out

        # The remaining kinds report at most one result: the first offending value node.
        for v in values:
            message = self._value_failure(c, v)
            if message is not None:
                return [result(v, f"{where}: {message}")]
        return []

    def _value_failure(self, c: Constraint, v: Term) -> Optional[str]:
        """Why value node ``v`` violates ``c``, or None if it complies."""
        show = self._show
        if isinstance(c, Datatype):
            if isinstance(v, Literal) and v.datatype == c.datatype:
                return None
            return f"value {show(v)} does not have datatype {show(c.datatype)}"
        if isinstance(c, ClassConstraint):
            if not isinstance(v, Literal) and is_instance(self.data, v, c.cls):
                return None
            return f"value {show(v)} is not an instance of {show(c.cls)}"
        if isinstance(c, Range):
            if not isinstance(v, Literal):
                return f"value {show(v)} is not a literal and cannot satisfy {c.relation} {c.bound.lexical}"
            outcome = compare_literal(v, c.bound, c.relation)
            if outcome is Comparison.SATISFIED:
                return None
            if outcome is Comparison.INCOMPARABLE:
                return f"value {show(v)} is not comparable with {c.relation} {c.bound.lexical}"
            return f"value {show(v)} violates {c.relation} {c.bound.lexical}"
        if isinstance(c, NodeRef):
            if self.conforms(c.member, v):
                return None
            return f"value {show(v)} does not conform to shape {self.shapes.label(c.member)}"
        if isinstance(c, And):
            if all(self.conforms(m, v) for m in c.members):
                return None
            return f"value {show(v)} does not conform to all {len(c.members)} shapes of the conjunction"
        if isinstance(c, Or):
            if any(self.conforms(m, v) for m in c.members):
                return None
            return f"value {show(v)} conforms to none of the {len(c.members)} alternatives"
        if isinstance(c, Not):
            if not self.conforms(c.member, v):
                return None
            return f"value {show(v)} conforms to negated shape {self.shapes.label(c.member)}"
        raise TypeError(f"unknown constraint {c!r}")

    def conforms_logical(self, c: Constraint, node: Term) -> bool:
        if isinstance(c, And):
            return all(self.conforms(m, node) for m in c.members)
        if isinstance(c, Or):
            return any(self.conforms(m, node) for m in c.members)
        if isinstance(c, Not):
            return not self.conforms(c.member, node)
        raise TypeError(f"{c!r} is not a logical constraint")

    def validate(self) -> ValidationReport:
        report = ValidationReport()
        for shape in self.shapes.entry_points():
            for focus in focus_nodes(shape, self.data):
                report.results.extend(self.check_shape(shape, focus))
        return report


def validate(shapes: ShapesGraph, data: Graph, ontology: Optional[Graph] = None) -> ValidationReport:
    """Validate ``data`` (plus optional ontology triples) against ``shapes``."""
    if ontology is not None:
        data = merge_graphs([data, ontology])
    return Validator(shapes, data).validate()


def conforms_logical(c: Constraint, node: Term, data: Graph, shapes: ShapesGraph) -> bool:
    return Validator(shapes, data).conforms_logical(c, node)


def report_to_graph(report: ValidationReport, prefixes: Optional[PrefixMap] = None) -> Document:
    g = Graph()
    counter = iter(range(1 << 30))

    def fresh() -> BNode:
        return BNode(f"r{next(counter)}")

    root = fresh()
    g.add(Triple(root, RDF.type, SH.ValidationReport))
    g.add(Triple(root, SH.conforms, Literal("true" if report.conforms else "false", XSD_BOOLEAN)))
    anon_shapes: dict[str, BNode] = {}
    for r in report.results:
        node = fresh()
        g.add(Triple(root, SH.result, node))
        g.add(Triple(node, RDF.type, SH.ValidationResult))
        g.add(Triple(node, SH.focusNode, r.focus_node))
        if r.result_path is not None:
            g.add(Triple(node, SH.resultPath, r.result_path))
        if r.value is not None:
            g.add(Triple(node, SH.value, r.value))
        if r.source_shape.startswith("_:"):
            shape_term = anon_shapes.setdefault(r.source_shape, fresh())
        else:
            shape_term = Iri(r.source_shape)
        g.add(Triple(node, SH.sourceShape, shape_term))
        g.add(Triple(node, SH.sourceConstraintComponent, Iri(SH_NS + r.source_constraint_component)))
        g.add(Triple(node, SH.resultSeverity, Iri(SH_NS + r.severity)))
        g.add(Triple(node, SH.resultMessage, Literal(r.message)))
    out = PrefixMap({"sh": SH_NS, "rdf": str(RDF)})
    for p, ns in (prefixes.items() if prefixes else ()):
        if p not in out:
            out.bind(p, ns)
    return Document(graph=g, prefixes=out)
