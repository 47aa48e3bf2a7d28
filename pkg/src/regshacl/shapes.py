"""Compile a SHACL shapes graph into typed shapes and constraints."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Optional, Union

from .rdf import (
    RANGE_RELATIONS,
    RDF,
    SH,
    SH_NS,
    XSD_DECIMAL,
    XSD_INTEGER,
    BNode,
    Graph,
    Iri,
    Literal,
    MalformedList,
    PrefixMap,
    Term,
    Triple,
    add_list,
    collect_list,
    display,
    local_name,
    numeric_value,
)
from .turtle import Document


class ShapeError(Exception):
    pass


class InvalidShape(ShapeError):
    pass


class DanglingReference(ShapeError):
    pass


class CyclicReference(ShapeError):
    pass


class UnsupportedConstraint(ShapeError):
    def __init__(self, predicate: Iri, shape: str = ""):
        super().__init__(f"unsupported SHACL predicate {predicate.n3()} on shape {shape}")
        self.predicate = predicate


class MalformedConstraint(ShapeError):
    pass


class UnknownShape(ShapeError, KeyError):
    def __str__(self) -> str:
        return f"unknown shape {self.args[0]}"


ShapeId = str


class ShapeKind(enum.Enum):
    NODE = "NodeShape"
    PROPERTY = "PropertyShape"


@dataclass(frozen=True)
class TargetClass:
    cls: Iri


@dataclass(frozen=True)
class TargetNode:
    node: Term


Target = Union[TargetClass, TargetNode]


# -- constraints -----------------------------------------------------------
# ``component`` is the local name of the SHACL constraint component IRI.


@dataclass(frozen=True)
class MinCount:
    n: int
    component = "MinCountConstraintComponent"

    def describe(self, prefixes=None) -> str:
        return f"minCount {self.n}"


@dataclass(frozen=True)
class MaxCount:
    n: int
    component = "MaxCountConstraintComponent"

    def describe(self, prefixes=None) -> str:
        return f"maxCount {self.n}"


@dataclass(frozen=True)
class Datatype:
    datatype: Iri
    component = "DatatypeConstraintComponent"

    def describe(self, prefixes=None) -> str:
        return f"datatype {display(self.datatype, prefixes)}"


@dataclass(frozen=True)
class ClassConstraint:
    cls: Iri
    component = "ClassConstraintComponent"

    def describe(self, prefixes=None) -> str:
        return f"class {display(self.cls, prefixes)}"


@dataclass(frozen=True)
class HasValue:
    value: Term
    component = "HasValueConstraintComponent"

    def describe(self, prefixes=None) -> str:
        return f"hasValue {display(self.value, prefixes)}"


@dataclass(frozen=True)
class Range:
    relation: str
    bound: Literal

    @property
    def component(self) -> str:
        return self.relation[0].upper() + self.relation[1:] + "ConstraintComponent"

    def describe(self, prefixes=None) -> str:
        return f"{self.relation} {self.bound.lexical}"


@dataclass(frozen=True)
class And:
    members: tuple[ShapeId, ...]
    component = "AndConstraintComponent"

    def describe(self, prefixes=None) -> str:
        return f"and of {len(self.members)} shapes"


@dataclass(frozen=True)
class Or:
    members: tuple[ShapeId, ...]
    component = "OrConstraintComponent"

    def describe(self, prefixes=None) -> str:
        return f"or of {len(self.members)} alternatives"


@dataclass(frozen=True)
class Not:
    member: ShapeId
    component = "NotConstraintComponent"

    def describe(self, prefixes=None) -> str:
        return f"not {self.member}"


@dataclass(frozen=True)
class PropertyRef:
    member: ShapeId
    component = "PropertyConstraintComponent"

    def describe(self, prefixes=None) -> str:
        return f"property {self.member}"


@dataclass(frozen=True)
class NodeRef:
    member: ShapeId
    component = "NodeConstraintComponent"

    def describe(self, prefixes=None) -> str:
        return f"node {self.member}"


Constraint = Union[MinCount, MaxCount, Datatype, ClassConstraint, HasValue, Range, And, Or, Not, PropertyRef, NodeRef]
LOGICAL = (And, Or, Not)
ATOMIC = (MinCount, MaxCount, Datatype, ClassConstraint, HasValue, Range)


def references(c: Constraint) -> tuple[ShapeId, ...]:
    if isinstance(c, (And, Or)):
        return c.members
    if isinstance(c, (Not, PropertyRef, NodeRef)):
        return (c.member,)
    return ()


@dataclass
class Shape:
    id: ShapeId
    node: Term
    kind: ShapeKind
    path: Optional[Iri] = None
    targets: list[Target] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    order: Optional[Decimal] = None

    @property
    def is_property(self) -> bool:
        return self.kind is ShapeKind.PROPERTY


@dataclass
class ShapesGraph:
    shapes: dict[ShapeId, Shape] = field(default_factory=dict)
    prefixes: PrefixMap = field(default_factory=PrefixMap)
    external: set[ShapeId] = field(default_factory=set)

    def __getitem__(self, shape_id: ShapeId) -> Shape:
        try:
            return self.shapes[shape_id]
        except KeyError:
            raise UnknownShape(shape_id) from None

    def __contains__(self, shape_id) -> bool:
        return shape_id in self.shapes

    def __iter__(self):
        return iter(self.shapes.values())

    def __len__(self) -> int:
        return len(self.shapes)

    def by_node(self, node: Term) -> Optional[Shape]:
        for shape in self.shapes.values():
            if shape.node == node:
                return shape
        return None

    def entry_points(self) -> list[Shape]:
        return [s for s in self.shapes.values() if s.targets]

    def label(self, shape_id: ShapeId) -> str:
        if shape_id.startswith("_:"):
            return shape_id
        return display(Iri(shape_id), self.prefixes)


def entry_points(shapes: ShapesGraph) -> list[Shape]:
    return shapes.entry_points()


def order_of(shape: Shape) -> Optional[Decimal]:
    return shape.order


# SHACL predicates that carry no constraint semantics here.
_STRUCTURAL = {
    SH.path, SH.targetClass, SH.targetNode, SH.order,
    SH.name, SH.description, SH.group, SH.message, SH.defaultValue,
}
_SH_OR = SH.term("or")
_SH_AND = SH.term("and")
_SH_NOT = SH.term("not")
_LIST_TAKING = (_SH_OR, _SH_AND)
_SH_CLASS = SH.term("class")
_INTEGER_LEX = re.compile(r"[+]?\d+\Z")


def _node_name(node: Term) -> str:
    return node.value if isinstance(node, Iri) else f"_:{node.label}"


def _is_candidate(g: Graph, node: Term) -> bool:
    return bool(
        g.match(node, RDF.type, SH.NodeShape)
        or g.match(node, RDF.type, SH.PropertyShape)
        or g.match(node, SH.path, None)
        or g.match(node, SH.targetClass, None)
        or g.match(node, SH.targetNode, None)
    )


def _list_members(g: Graph, head: Term, where: str) -> list[Term]:
    try:
        return collect_list(g, head)
    except MalformedList as exc:
        raise MalformedConstraint(f"{where}: {exc}") from None


def _children(g: Graph, node: Term) -> list[tuple[str, Term]]:
    """Shape nodes referenced from ``node`` with a naming step for each."""
    out = []
    for p in g.predicates_of(node):
        if p in (SH.property, SH.node, _SH_NOT):
            for i, o in enumerate(g.objects(node, p), 1):
                out.append((f"{local_name(p)}{i}", o))
        elif p in _LIST_TAKING:
            for i, head in enumerate(g.objects(node, p), 1):
                for j, member in enumerate(_list_members(g, head, _node_name(node)), 1):
                    out.append((f"{local_name(p)}{i}.{j}" if i > 1 else f"{local_name(p)}{j}", member))
    return out


def discover(doc: Union[Document, Graph], prefixes: Optional[PrefixMap] = None,
             allow_external: bool = False) -> ShapesGraph:
    """Find every shape in a shapes document and compile it.

    A referenced IRI with no triples is a DanglingReference unless
    ``allow_external`` is set, which is meant for excerpts whose members are
    defined elsewhere. Such ids are listed in ``ShapesGraph.external`` and
    cannot be validated against.
    """
    if isinstance(doc, Document):
        g, prefixes = doc.graph, prefixes or doc.prefixes
    else:
        g = doc
    prefixes = prefixes or PrefixMap()

    roots = [n for n in g.subject_terms() if _is_candidate(g, n)]
    for p in (SH.property, SH.node, _SH_NOT):
        roots.extend(t.object for t in g.match(None, p, None))
    for p in _LIST_TAKING:
        for t in g.match(None, p, None):
            roots.extend(_list_members(g, t.object, _node_name(t.subject)))
    roots = [n for n in dict.fromkeys(roots) if not isinstance(n, Literal)]
    ids: dict[Term, ShapeId] = {}

    def walk(node: Term, name: str) -> None:
        if node in ids:
            return
        ids[node] = name
        for step, child in _children(g, node):
            if isinstance(child, Literal):
                raise MalformedConstraint(f"literal {child.n3()} used as a shape reference in {name}")
            if isinstance(child, Iri):
                walk(child, child.value)
            else:
                walk(child, f"{_anon_base(name)}/{step}")

    iri_roots = sorted({n for n in roots if isinstance(n, Iri)}, key=lambda n: n.value)
    for node in iri_roots:
        walk(node, node.value)
    anonymous = 0
    for node in roots:
        if node not in ids:
            anonymous += 1
            walk(node, f"_:shape{anonymous}")

    sg = ShapesGraph(prefixes=prefixes)
    for node, sid in sorted(ids.items(), key=lambda kv: (kv[1].startswith("_:"), kv[1])):
        if isinstance(node, Iri) and not g.predicates_of(node):
            if not allow_external:
                raise DanglingReference(f"shape {node.n3()} is referenced but never described")
            sg.external.add(sid)
            continue
        sg.shapes[sid] = _compile_shape(g, node, sid, ids)
    _check_references(sg)
    return sg


def _anon_base(name: str) -> str:
    if name.startswith("_:"):
        return name
    return "_:" + local_name(Iri(name))


def _compile_shape(g: Graph, node: Term, sid: ShapeId, ids: dict[Term, ShapeId]) -> Shape:
    paths = g.objects(node, SH.path)
    typed_node = bool(g.match(node, RDF.type, SH.NodeShape))
    typed_prop = bool(g.match(node, RDF.type, SH.PropertyShape))
    if len(paths) > 1:
        raise InvalidShape(f"shape {sid} has {len(paths)} sh:path values")
    if paths and typed_node:
        raise InvalidShape(f"shape {sid} is typed sh:NodeShape but has sh:path")
    if typed_prop and not paths:
        raise InvalidShape(f"shape {sid} is typed sh:PropertyShape but has no sh:path")
    path = None
    if paths:
        if not isinstance(paths[0], Iri):
            raise UnsupportedConstraint(SH.path, sid)
        path = paths[0]
    targets: list[Target] = []
    for p in g.predicates_of(node):
        for o in g.objects(node, p):
            if p == SH.targetClass:
                if not isinstance(o, Iri):
                    raise MalformedConstraint(f"sh:targetClass of {sid} must be an IRI")
                targets.append(TargetClass(o))
            elif p == SH.targetNode:
                targets.append(TargetNode(o))
    order = None
    orders = g.objects(node, SH.order)
    if orders:
        order = numeric_value(orders[0])
        if order is None:
            raise MalformedConstraint(f"sh:order of {sid} must be numeric")
    return Shape(
        id=sid,
        node=node,
        kind=ShapeKind.PROPERTY if path is not None else ShapeKind.NODE,
        path=path,
        targets=targets,
        constraints=compile_constraints(node, g, ids, sid, has_path=path is not None),
        order=order,
    )


def _count(o: Term, pred: str, sid: str) -> int:
    if not (isinstance(o, Literal) and o.datatype == XSD_INTEGER and _INTEGER_LEX.match(o.lexical)):
        raise MalformedConstraint(f"sh:{pred} of {sid} must be a non-negative integer, got {o.n3()}")
    return int(o.lexical)


def compile_constraints(node: Term, doc: Union[Document, Graph], ids: Optional[dict] = None,
                        sid: Optional[str] = None, has_path: Optional[bool] = None) -> list[Constraint]:
    """Constraints declared on ``node``, in document order."""
    g = doc.graph if isinstance(doc, Document) else doc
    if ids is None:
        ids = {n: s.id for s in discover(g) for n in [s.node]}
    sid = sid or _node_name(node)
    if has_path is None:
        has_path = bool(g.objects(node, SH.path))

    def ref(o: Term) -> ShapeId:
        return ids.get(o) or _node_name(o)

    out: list[Constraint] = []
    for p in g.predicates_of(node):
        if not p.value.startswith(SH_NS) or p in _STRUCTURAL:
            continue
        name = p.value[len(SH_NS):]
        for o in g.objects(node, p):
            if name in ("minCount", "maxCount"):
                if not has_path:
                    raise MalformedConstraint(f"sh:{name} on {sid} requires sh:path")
                n = _count(o, name, sid)
                out.append(MinCount(n) if name == "minCount" else MaxCount(n))
            elif name == "datatype":
                if not isinstance(o, Iri):
                    raise MalformedConstraint(f"sh:datatype of {sid} must be an IRI")
                out.append(Datatype(o))
            elif name == "class":
                if not isinstance(o, Iri):
                    raise MalformedConstraint(f"sh:class of {sid} must be an IRI")
                out.append(ClassConstraint(o))
            elif name == "hasValue":
                out.append(HasValue(o))
            elif name in RANGE_RELATIONS:
                if not isinstance(o, Literal):
                    raise MalformedConstraint(f"sh:{name} of {sid} must be a literal")
                out.append(Range(name, o))
            elif name in ("and", "or"):
                members = _list_members(g, o, sid)
                if not members:
                    raise MalformedConstraint(f"sh:{name} of {sid} has an empty list")
                refs = tuple(ref(m) for m in members)
                out.append(And(refs) if name == "and" else Or(refs))
            elif name == "not":
                out.append(Not(ref(o)))
            elif name == "property":
                out.append(PropertyRef(ref(o)))
            elif name == "node":
                out.append(NodeRef(ref(o)))
            else:
                raise UnsupportedConstraint(p, sid)
    return out


def _check_references(sg: ShapesGraph) -> None:
    for shape in sg:
        for c in shape.constraints:
            for member in references(c):
                if member in sg.external:
                    continue
                if member not in sg.shapes:
                    raise DanglingReference(f"{shape.id} references unknown shape {member}")
                target = sg.shapes[member]
                if isinstance(c, PropertyRef) and not target.is_property:
                    raise InvalidShape(f"sh:property of {shape.id} points at node shape {member}")
                if isinstance(c, NodeRef) and target.is_property:
                    raise InvalidShape(f"sh:node of {shape.id} points at property shape {member}")

    WHITE, GREY, BLACK = 0, 1, 2
    colour = {sid: WHITE for sid in sg.shapes}

    def visit(sid: str, trail: list[str]) -> None:
        colour[sid] = GREY
        for c in sg.shapes[sid].constraints:
            for member in references(c):
                if member in sg.external:
                    continue
                if colour[member] == GREY:
                    cycle = trail[trail.index(member):] + [member] if member in trail else [sid, member]
                    raise CyclicReference("shape reference cycle: " + " -> ".join(cycle))
                if colour[member] == WHITE:
                    visit(member, trail + [member])
        colour[sid] = BLACK

    for sid in sg.shapes:
        if colour[sid] == WHITE:
            visit(sid, [sid])


def shapes_to_document(sg: ShapesGraph) -> Document:
    """Emit a compiled shape model back to RDF triples."""
    g = Graph()
    counter = iter(range(1 << 30))
    fresh = lambda: BNode(f"s{next(counter)}")  # noqa: E731
    nodes: dict[ShapeId, Term] = {sid: Iri(sid) for sid in sg.external}
    for shape in sg:
        nodes[shape.id] = Iri(shape.id) if not shape.id.startswith("_:") else fresh()
    for shape in sg:
        n = nodes[shape.id]
        g.add(Triple(n, RDF.type, SH.PropertyShape if shape.is_property else SH.NodeShape))
        if shape.path is not None:
            g.add(Triple(n, SH.path, shape.path))
        for t in shape.targets:
            if isinstance(t, TargetClass):
                g.add(Triple(n, SH.targetClass, t.cls))
            else:
                g.add(Triple(n, SH.targetNode, t.node))
        if shape.order is not None:
            text = str(shape.order)
            g.add(Triple(n, SH.order, Literal(text, XSD_DECIMAL if "." in text else XSD_INTEGER)))
        for c in shape.constraints:
            if isinstance(c, MinCount):
                g.add(Triple(n, SH.minCount, Literal(str(c.n), XSD_INTEGER)))
            elif isinstance(c, MaxCount):
                g.add(Triple(n, SH.maxCount, Literal(str(c.n), XSD_INTEGER)))
            elif isinstance(c, Datatype):
                g.add(Triple(n, SH.datatype, c.datatype))
            elif isinstance(c, ClassConstraint):
                g.add(Triple(n, _SH_CLASS, c.cls))
            elif isinstance(c, HasValue):
                g.add(Triple(n, SH.hasValue, c.value))
            elif isinstance(c, Range):
                g.add(Triple(n, SH.term(c.relation), c.bound))
            elif isinstance(c, (And, Or)):
                head = add_list(g, [nodes[m] for m in c.members], fresh)
                g.add(Triple(n, _SH_AND if isinstance(c, And) else _SH_OR, head))
            elif isinstance(c, Not):
                g.add(Triple(n, _SH_NOT, nodes[c.member]))
            elif isinstance(c, PropertyRef):
                g.add(Triple(n, SH.property, nodes[c.member]))
            elif isinstance(c, NodeRef):
                g.add(Triple(n, SH.node, nodes[c.member]))
    return Document(graph=g, prefixes=sg.prefixes.copy())
