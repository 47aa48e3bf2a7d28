"""RDF terms and an in-memory indexed triple store."""

from __future__ import annotations

import enum
import re
from collections import deque
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from typing import Iterable, Iterator, NamedTuple, Optional, Union

import networkx as nx
from networkx.algorithms import isomorphism as iso

RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS_NS = "http://www.w3.org/2000/01/rdf-schema#"
XSD_NS = "http://www.w3.org/2001/XMLSchema#"
SH_NS = "http://www.w3.org/ns/shacl#"


_IRI_UNSAFE = set('<>"{}|^`\\')


@dataclass(frozen=True)
class Iri:
    value: str

    def __post_init__(self):
        if not self.value or any(c.isspace() for c in self.value):
            raise ValueError(f"invalid IRI: {self.value!r}")

    def __str__(self) -> str:
        return self.value

    def n3(self) -> str:
        return "<" + "".join(
            f"\\u{ord(c):04X}" if c in _IRI_UNSAFE or ord(c) < 0x20 else c for c in self.value
        ) + ">"


@dataclass(frozen=True)
class BNode:
    label: str

    def __str__(self) -> str:
        return f"_:{self.label}"

    def n3(self) -> str:
        return f"_:{self.label}"


class Namespace(str):
    """Namespace IRI; attribute access builds member IRIs (``SH.path``)."""

    def __getattr__(self, name: str) -> Iri:
        if name.startswith("__"):
            raise AttributeError(name)
        return Iri(self + name)

    def term(self, name: str) -> Iri:
        return Iri(self + name)


RDF = Namespace(RDF_NS)
RDFS = Namespace(RDFS_NS)
XSD = Namespace(XSD_NS)
SH = Namespace(SH_NS)

XSD_STRING = XSD.string
XSD_INTEGER = XSD.integer
XSD_DECIMAL = XSD.decimal
XSD_BOOLEAN = XSD.boolean
RDF_LANGSTRING = RDF.langString


@dataclass(frozen=True)
class Literal:
    lexical: str
    datatype: Iri = XSD_STRING
    language: Optional[str] = None

    def __post_init__(self):
        if self.language is not None and self.datatype != RDF_LANGSTRING:
            object.__setattr__(self, "datatype", RDF_LANGSTRING)

    def __str__(self) -> str:
        return self.lexical

    def n3(self) -> str:
        text = '"' + escape_string(self.lexical) + '"'
        if self.language:
            return f"{text}@{self.language}"
        if self.datatype == XSD_STRING:
            return text
        return f"{text}^^{self.datatype.n3()}"


Term = Union[Iri, BNode, Literal]

_ESCAPES = {'"': '\\"', "\\": "\\\\", "\n": "\\n", "\r": "\\r", "\t": "\\t", "\b": "\\b", "\f": "\\f"}


def escape_string(text: str) -> str:
    return "".join(_ESCAPES.get(c, c) for c in text)


def literal(value, datatype: Optional[Iri] = None) -> Literal:
    """Build a literal from a Python value (bool, int, Decimal, str)."""
    if isinstance(value, bool):
        return Literal("true" if value else "false", XSD_BOOLEAN)
    if isinstance(value, int):
        return Literal(str(value), datatype or XSD_INTEGER)
    if isinstance(value, Decimal):
        return Literal(str(value), datatype or XSD_DECIMAL)
    return Literal(str(value), datatype or XSD_STRING)


class Triple(NamedTuple):
    subject: Term
    predicate: Iri
    object: Term


def check_triple(triple: Triple) -> None:
    s, p, o = triple
    if not isinstance(s, (Iri, BNode)):
        raise TypeError(f"subject must be an IRI or blank node, got {s!r}")
    if not isinstance(p, Iri):
        raise TypeError(f"predicate must be an IRI, got {p!r}")
    if not isinstance(o, (Iri, BNode, Literal)):
        raise TypeError(f"object must be an RDF term, got {o!r}")


class FrozenGraphError(RuntimeError):
    pass


class MalformedList(ValueError):
    pass


class Graph:
    """Set of triples with SPO, POS and OSP indexes.

    Iteration follows insertion order. Once :meth:`freeze` is called the
    graph rejects further inserts.
    """

    def __init__(self, triples: Iterable[Triple] = ()):
        self._triples: dict[Triple, None] = {}
        self._spo: dict[Term, dict[Iri, dict[Term, None]]] = {}
        self._pos: dict[Iri, dict[Term, dict[Term, None]]] = {}
        self._osp: dict[Term, dict[Term, dict[Iri, None]]] = {}
        self._frozen = False
        for t in triples:
            self.add(t)

    def add(self, triple) -> "Graph":
        triple = Triple(*triple)
        if self._frozen:
            raise FrozenGraphError("graph is frozen")
        if triple in self._triples:
            return self
        check_triple(triple)
        s, p, o = triple
        self._triples[triple] = None
        self._spo.setdefault(s, {}).setdefault(p, {})[o] = None
        self._pos.setdefault(p, {}).setdefault(o, {})[s] = None
        self._osp.setdefault(o, {}).setdefault(s, {})[p] = None
        return self

    insert = add

    def update(self, triples: Iterable[Triple]) -> "Graph":
        for t in triples:
            self.add(t)
        return self

    def freeze(self) -> "Graph":
        self._frozen = True
        return self

    @property
    def frozen(self) -> bool:
        return self._frozen

    def copy(self) -> "Graph":
        return Graph(self._triples)

    def __len__(self) -> int:
        return len(self._triples)

    def __iter__(self) -> Iterator[Triple]:
        return iter(self._triples)

    def __contains__(self, triple) -> bool:
        return Triple(*triple) in self._triples

    def __repr__(self) -> str:
        return f"<Graph with {len(self)} triples>"

    def match(self, subject=None, predicate=None, object=None) -> list[Triple]:
        s, p, o = subject, predicate, object
        if s is not None:
            by_p = self._spo.get(s, {})
            if p is not None:
                objs = by_p.get(p, {})
                if o is not None:
                    return [Triple(s, p, o)] if o in objs else []
                return [Triple(s, p, x) for x in objs]
            if o is not None:
                return [Triple(s, q, o) for q in self._osp.get(o, {}).get(s, {})]
            return [Triple(s, q, x) for q, objs in by_p.items() for x in objs]
        if p is not None:
            by_o = self._pos.get(p, {})
            if o is not None:
                return [Triple(x, p, o) for x in by_o.get(o, {})]
            return [Triple(x, p, y) for y, subs in by_o.items() for x in subs]
        if o is not None:
            return [Triple(x, q, o) for x, preds in self._osp.get(o, {}).items() for q in preds]
        return list(self._triples)

    def objects(self, subject: Term, predicate: Iri) -> list[Term]:
        """Objects of ``(subject, predicate, ?)`` in insertion order."""
        return list(self._spo.get(subject, {}).get(predicate, {}))

    def subjects(self, predicate: Iri, object: Term) -> list[Term]:
        return list(self._pos.get(predicate, {}).get(object, {}))

    def value(self, subject: Term, predicate: Iri) -> Optional[Term]:
        objs = self._spo.get(subject, {}).get(predicate, {})
        return next(iter(objs), None)

    def subject_terms(self) -> list[Term]:
        return list(self._spo)

    def object_count(self, term: Term) -> int:
        """Number of triples that have ``term`` in object position."""
        return sum(len(preds) for preds in self._osp.get(term, {}).values())

    def predicates_of(self, subject: Term) -> list[Iri]:
        return list(self._spo.get(subject, {}))


def objects_of(graph: Graph, subject: Term, predicate: Iri) -> set[Term]:
    return set(graph.objects(subject, predicate))


def collect_list(graph: Graph, head: Term) -> list[Term]:
    """Members of the RDF collection rooted at ``head``."""
    items: list[Term] = []
    seen = set()
    node = head
    while node != RDF.nil:
        if node in seen:
            raise MalformedList(f"collection starting at {head} is cyclic")
        seen.add(node)
        firsts = graph.objects(node, RDF.first)
        rests = graph.objects(node, RDF.rest)
        if len(firsts) != 1 or len(rests) != 1:
            raise MalformedList(
                f"list node {node} has {len(firsts)} rdf:first and {len(rests)} rdf:rest values"
            )
        items.append(firsts[0])
        node = rests[0]
    return items


def add_list(graph: Graph, items: Iterable[Term], new_bnode) -> Term:
    """Encode ``items`` as an RDF collection; returns the head node."""
    items = list(items)
    if not items:
        return RDF.nil
    nodes = [new_bnode() for _ in items]
    for i, (node, item) in enumerate(zip(nodes, items)):
        graph.add(Triple(node, RDF.first, item))
        graph.add(Triple(node, RDF.rest, nodes[i + 1] if i + 1 < len(nodes) else RDF.nil))
    return nodes[0]


def subclass_closure(graph: Graph, cls: Iri) -> list[Iri]:
    """``cls`` plus every class reaching it through rdfs:subClassOf edges.

    Returned in breadth-first order; cycles are tolerated.
    """
    seen = {cls: None}
    queue = deque([cls])
    while queue:
        current = queue.popleft()
        for sub in graph.subjects(RDFS.subClassOf, current):
            if sub not in seen:
                seen[sub] = None
                queue.append(sub)
    return list(seen)


def instances_of(graph: Graph, cls: Iri) -> list[Term]:
    found: dict[Term, None] = {}
    for c in subclass_closure(graph, cls):
        for node in graph.subjects(RDF.type, c):
            found[node] = None
    return list(found)


def is_instance(graph: Graph, node: Term, cls: Iri) -> bool:
    closure = set(subclass_closure(graph, cls))
    return any(t in closure for t in graph.objects(node, RDF.type))


class Comparison(enum.Enum):
    SATISFIED = "satisfied"
    VIOLATED = "violated"
    INCOMPARABLE = "incomparable"


RANGE_RELATIONS = ("minInclusive", "maxInclusive", "minExclusive", "maxExclusive")

_NUMBER = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)\Z")


def numeric_value(term: Term) -> Optional[Decimal]:
    """Decimal value of a literal's lexical form, ignoring its datatype."""
    if not isinstance(term, Literal) or term.language is not None:
        return None
    text = term.lexical.strip()
    if not _NUMBER.match(text):
        return None
    try:
        return Decimal(text)
    except InvalidOperation:  # pragma: no cover - regex already guards this
        return None


def compare_literal(value: Term, bound: Term, relation: str) -> Comparison:
    if relation not in RANGE_RELATIONS:
        raise ValueError(f"unknown range relation {relation!r}")
    x, b = numeric_value(value), numeric_value(bound)
    if x is None or b is None:
        return Comparison.INCOMPARABLE
    ok = {
        "minInclusive": x >= b,
        "maxInclusive": x <= b,
        "minExclusive": x > b,
        "maxExclusive": x < b,
    }[relation]
    return Comparison.SATISFIED if ok else Comparison.VIOLATED


class PrefixMap:
    """Prefix label to namespace IRI, remembering declaration order."""

    def __init__(self, mapping: Optional[dict[str, str]] = None):
        self._map: dict[str, str] = {}
        for k, v in (mapping or {}).items():
            self.bind(k, v)

    def bind(self, prefix: str, namespace: str) -> None:
        self._map.pop(prefix, None)
        self._map[prefix] = str(namespace)

    def get(self, prefix: str) -> Optional[str]:
        return self._map.get(prefix)

    def __contains__(self, prefix: str) -> bool:
        return prefix in self._map

    def __iter__(self):
        return iter(self._map)

    def __len__(self) -> int:
        return len(self._map)

    def items(self):
        return self._map.items()

    def __eq__(self, other) -> bool:
        if isinstance(other, PrefixMap):
            return list(self._map.items()) == list(other._map.items())
        return NotImplemented

    def __repr__(self) -> str:
        return f"PrefixMap({self._map!r})"

    def copy(self) -> "PrefixMap":
        return PrefixMap(dict(self._map))

    def compact(self, iri: Iri) -> Optional[str]:
        """Shortest prefixed name for ``iri`` or None when no prefix fits."""
        best = None
        for prefix, ns in self._map.items():
            if iri.value.startswith(ns):
                local = iri.value[len(ns):]
                if is_local_name(local) and (best is None or len(local) < len(best[1])):
                    best = (prefix, local)
        return f"{best[0]}:{best[1]}" if best else None


_LOCAL = re.compile(r"(?:[A-Za-z0-9_]|%[0-9A-Fa-f]{2})(?:(?:[A-Za-z0-9_\-.]|%[0-9A-Fa-f]{2})*(?:[A-Za-z0-9_\-]|%[0-9A-Fa-f]{2}))?\Z")


def is_local_name(text: str) -> bool:
    return text == "" or bool(_LOCAL.match(text))


def local_name(iri: Iri) -> str:
    value = iri.value
    for sep in ("#", "/", ":"):
        if sep in value:
            tail = value.rsplit(sep, 1)[1]
            if tail:
                return tail
    return value


def display(term: Optional[Term], prefixes: Optional[PrefixMap] = None) -> str:
    """Human-oriented rendering: prefixed names where possible."""
    if term is None:
        return "-"
    if isinstance(term, Iri):
        if prefixes is not None:
            short = prefixes.compact(term)
            if short is not None:
                return short
        return term.n3()
    if isinstance(term, Literal):
        if term.language or term.datatype in (XSD_STRING, XSD_INTEGER, XSD_DECIMAL, XSD_BOOLEAN):
            return term.n3() if term.datatype in (XSD_STRING, RDF_LANGSTRING) else term.lexical
        return f'"{escape_string(term.lexical)}"^^{display(term.datatype, prefixes)}'
    return str(term)


def _as_nx(graph: Graph) -> nx.MultiDiGraph:
    g = nx.MultiDiGraph()
    for s, p, o in graph:
        for node in (s, o):
            if node not in g:
                g.add_node(node, label=("_bnode",) if isinstance(node, BNode) else node)
        g.add_edge(s, o, p=p)
    return g


def isomorphic(a: Graph, b: Graph) -> bool:
    """Graph isomorphism treating blank nodes as relabelable."""
    if len(a) != len(b):
        return False
    ground_a = {t for t in a if not any(isinstance(x, BNode) for x in (t.subject, t.object))}
    ground_b = {t for t in b if not any(isinstance(x, BNode) for x in (t.subject, t.object))}
    if ground_a != ground_b:
        return False
    matcher = iso.MultiDiGraphMatcher(
        _as_nx(a),
        _as_nx(b),
        node_match=iso.categorical_node_match("label", None),
        edge_match=iso.categorical_multiedge_match("p", None),
    )
    return matcher.is_isomorphic()
